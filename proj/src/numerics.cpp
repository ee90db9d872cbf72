#include "blp/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/numeric/odeint.hpp>

namespace blp {

template <std::size_t N>
void integrate_ode(const OdeRhs<N>& rhs, OdeState<N>& y, double t0, double t1,
                   const OdeTolerance& tol) {
  namespace odeint = boost::numeric::odeint;
  if (t1 <= t0) return;
  auto stepper = odeint::make_controlled(tol.absolute, tol.relative,
                                         odeint::runge_kutta_dopri5<OdeState<N>>());
  const double dt0 = std::min(0.01, t1 - t0);
  try {
    odeint::integrate_adaptive(stepper, rhs, y, t0, t1, dt0);
  } catch (const std::exception& e) {
    throw NumericalError(std::string("ODE step failure: ") + e.what());
  }
  for (double v : y) {
    if (!std::isfinite(v)) throw NumericalError("ODE produced a non-finite state");
  }
}

template void integrate_ode<1>(const OdeRhs<1>&, OdeState<1>&, double, double, const OdeTolerance&);
template void integrate_ode<2>(const OdeRhs<2>&, OdeState<2>&, double, double, const OdeTolerance&);
template void integrate_ode<4>(const OdeRhs<4>&, OdeState<4>&, double, double, const OdeTolerance&);
template void integrate_ode<6>(const OdeRhs<6>&, OdeState<6>&, double, double, const OdeTolerance&);

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
  if (b == a) return 0.0;
  double error = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      f, a, b, 20, tol, &error);
  if (!std::isfinite(value)) throw NumericalError("quadrature produced a non-finite value");
  if (error > 100.0 * tol * std::max(1.0, std::abs(value))) {
    throw NumericalError("quadrature tolerance breach: error estimate " + std::to_string(error));
  }
  return value;
}

double integrate_piecewise(const std::function<double(double)>& f, double a, double b,
                           std::span<const double> breakpoints, double tol) {
  std::vector<double> cuts{a};
  for (double c : breakpoints) {
    if (c > a && c < b) cuts.push_back(c);
  }
  std::sort(cuts.begin() + 1, cuts.end());
  cuts.push_back(b);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) total += integrate(f, cuts[i], cuts[i + 1], tol);
  return total;
}

std::vector<double> cauchy_coefficients(const std::function<cplx(cplx)>& fn, std::size_t points,
                                        double radius, std::size_t kmax) {
  if (points < 2 * (kmax + 1)) throw std::invalid_argument("cauchy_coefficients: too few points");
  if (!(radius > 0.0 && radius <= 1.0)) throw std::invalid_argument("cauchy_coefficients: radius");
  std::vector<cplx> values(points);
  const double step = 2.0 * std::numbers::pi / static_cast<double>(points);
  // Real Taylor coefficients: values on the lower half circle are conjugates.
  for (std::size_t j = 0; j <= points / 2; ++j) {
    values[j] = fn(std::polar(radius, step * static_cast<double>(j)));
  }
  for (std::size_t j = points / 2 + 1; j < points; ++j) values[j] = std::conj(values[points - j]);
  std::vector<cplx> twiddle(points);
  for (std::size_t j = 0; j < points; ++j) twiddle[j] = std::polar(1.0, -step * static_cast<double>(j));
  std::vector<double> coefficients(kmax + 1);
  for (std::size_t k = 0; k <= kmax; ++k) {
    cplx acc = 0.0;
    for (std::size_t j = 0; j < points; ++j) acc += values[j] * twiddle[(j * k) % points];
    coefficients[k] = acc.real() / static_cast<double>(points) / std::pow(radius, static_cast<double>(k));
  }
  return coefficients;
}

double default_cauchy_radius(std::size_t points) {
  return std::exp(-36.0 / static_cast<double>(points));
}

}  // namespace blp
