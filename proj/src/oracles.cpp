#include "blp/oracles.hpp"

#include <algorithm>
#include <cmath>

#include "blp/gw.hpp"
#include "blp/scaling.hpp"

namespace blp {
namespace {

OracleCheck check(std::string name, double value, double threshold) {
  return {std::move(name), value, threshold, value <= threshold};
}

std::vector<OffspringLaw> reference_laws() {
  return {OffspringLaw::yule(1.0), OffspringLaw({{0, 0.25}, {2, 0.75}}, 1.0),
          OffspringLaw({{0, 0.2}, {1, 0.3}, {2, 0.5}}, 1.0)};
}

}  // namespace

std::vector<OracleCheck> gw_oracle_suite() {
  std::vector<OracleCheck> out;
  const OffspringLaw yule = OffspringLaw::yule(1.0);

  double worst = 0.0;
  for (double s : {0.0, 0.1, 0.25, 0.5, 0.75, 0.9}) {
    for (double t : {0.5, 1.0, 2.0, 5.0}) {
      const double e = std::exp(-t);
      worst = std::max(worst, std::abs(pgf_flow(yule, s, t) - s * e / (1.0 - (1.0 - e) * s)));
    }
  }
  out.push_back(check("yule F(s,t)", worst, 1e-8));

  worst = 0.0;
  for (double s : {0.1, 0.25, 0.5, 0.75, 0.9}) {
    worst = std::max(worst, std::abs(a_function(yule, s) - s / (1.0 - s)));
  }
  out.push_back(check("yule A(s) = s/(1-s)", worst, 1e-8));

  worst = 0.0;
  for (double theta : {0.1, 0.5, 1.0, 2.0, 10.0}) {
    worst = std::max(worst, std::abs(w_laplace(yule, theta) - 1.0 / (1.0 + theta)));
  }
  out.push_back(check("yule phi(theta) = 1/(1+theta)", worst, 1e-8));

  out.push_back(check("yule vartheta = 1", std::abs(vartheta(yule) - 1.0), 1e-8));

  const TLaw t_law(yule, 32, 512);
  worst = 0.0;
  for (std::size_t k = 1; k <= 20; ++k) {
    worst = std::max(worst, std::abs(t_law.pmf(k) - 1.0 / (static_cast<double>(k) * (k + 1.0))));
  }
  out.push_back(check("yule P(T=k) = 1/(k(k+1)), k <= 20", worst, 1e-8));

  const char* names[] = {"{p2=1}", "{p0=1/4,p2=3/4}", "{p0=.2,p1=.3,p2=.5}"};
  const auto laws = reference_laws();
  for (std::size_t i = 0; i < laws.size(); ++i) {
    const OffspringLaw& law = laws[i];
    const double rho = rates(law).rho;
    const double lambda = rates(law).lambda;
    double conj = 0.0;
    for (double s : {0.0, 0.25, 0.5, 0.75}) {
      const double a = a_function(law, s);
      for (double t : {0.5, 1.0, 2.0}) {
        conj = std::max(conj, std::abs(a_function(law, pgf_flow(law, s, t)) - std::exp(-rho * t) * a));
      }
    }
    out.push_back(check(std::string("A conjugation ") + names[i], conj, 1e-6));
    double feq = 0.0;
    for (double theta : {0.1, 1.0, 10.0}) {
      const double phi = w_laplace(law, theta);
      for (double s : {0.5, 1.0, 2.0}) {
        feq = std::max(feq, std::abs(w_laplace(law, theta * std::exp(lambda * s)) - pgf_flow(law, phi, s)));
      }
    }
    out.push_back(check(std::string("phi functional equation ") + names[i], feq, 1e-8));
  }
  return out;
}

std::vector<OracleCheck> scaling_oracle_suite() {
  std::vector<OracleCheck> out;
  const double alpha = 1.5;
  const double lambda = 1.0;
  const struct {
    const char* name;
    SlowVariation slow;
  } cases[] = {{"L=1", SlowVariation::constant(1.0)},
               {"L=log(e+x)", SlowVariation::log_power(1.0)},
               {"L=1/log(e+x)", SlowVariation::log_power(-1.0)}};
  for (const auto& item : cases) {
    item.slow.validate_for(alpha);
    double worst = 0.0;
    for (int i = 0; i <= 150; ++i) {
      const double y = std::pow(10.0, -12.0 + 15.0 * i / 150.0);
      const double x = big_h(item.slow, alpha, y);
      worst = std::max(worst, std::abs(std::pow(x, -alpha) * item.slow(x) - y) / y);
    }
    out.push_back(check(std::string("H inversion residual ") + item.name, worst, 1e-10));
  }

  const SlowVariation one = SlowVariation::constant(1.0);
  double worst_h = 0.0;
  double worst_r = 0.0;
  for (double t : {0.0, 0.5, 1.0, 3.0, 9.0, 20.0}) {
    const double exact = std::exp(lambda * t / alpha);
    worst_h = std::max(worst_h, std::abs(h_of_t(one, alpha, lambda, t) - exact) / exact);
    for (double c : {0.5, 2.0}) {
      const ThresholdSpec level = ThresholdSpec::exponential(c, lambda, alpha);
      worst_r = std::max(worst_r, std::abs(r_of_t(one, alpha, lambda, level, t) - c * t) / std::max(1.0, c * t));
    }
  }
  out.push_back(check("h(t) = e^{lambda t/alpha} for L=1", worst_h, 1e-12));
  out.push_back(check("r(t) = c t for L=1", worst_r, 1e-12));
  return out;
}

}  // namespace blp
