#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace blp {

/// Raised when an iterative or adaptive numerical scheme cannot meet its
/// tolerance (ODE step failure, quadrature error, non-convergence).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using cplx = std::complex<double>;

struct OdeTolerance {
  double absolute = 1e-14;
  double relative = 1e-11;
};

template <std::size_t N>
using OdeState = std::array<double, N>;

template <std::size_t N>
using OdeRhs = std::function<void(const OdeState<N>&, OdeState<N>&, double)>;

/// Adaptive Dormand-Prince integration of y' = rhs(y, t) from t0 to t1.
/// Complex states are carried as interleaved (re, im) pairs. Instantiated
/// for N = 1, 2, 4, 6.
template <std::size_t N>
void integrate_ode(const OdeRhs<N>& rhs, OdeState<N>& y, double t0, double t1,
                   const OdeTolerance& tol);

extern template void integrate_ode<1>(const OdeRhs<1>&, OdeState<1>&, double, double, const OdeTolerance&);
extern template void integrate_ode<2>(const OdeRhs<2>&, OdeState<2>&, double, double, const OdeTolerance&);
extern template void integrate_ode<4>(const OdeRhs<4>&, OdeState<4>&, double, double, const OdeTolerance&);
extern template void integrate_ode<6>(const OdeRhs<6>&, OdeState<6>&, double, double, const OdeTolerance&);

/// Adaptive Gauss-Kronrod quadrature on [a, b] (b may be +infinity).
/// Throws NumericalError when the error estimate exceeds `tol * max(1, |I|)`
/// by more than two orders of magnitude.
double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-10);

/// Same as integrate() but splits [a, b] at the supplied interior points.
double integrate_piecewise(const std::function<double(double)>& f, double a, double b,
                           std::span<const double> breakpoints, double tol = 1e-10);

/// Taylor coefficients a_0..a_kmax of a function analytic in the unit disk
/// with real coefficients,
/// from its values on the circle |s| = radius sampled at `points` equally
/// spaced nodes (trapezoidal Cauchy integral).
std::vector<double> cauchy_coefficients(const std::function<cplx(cplx)>& fn, std::size_t points,
                                        double radius, std::size_t kmax);

/// Radius that makes the aliasing factor radius^points equal e^{-36}.
double default_cauchy_radius(std::size_t points);

}  // namespace blp
