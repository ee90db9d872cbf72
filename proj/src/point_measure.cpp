#include "blp/point_measure.hpp"

#include <cmath>
#include <stdexcept>

namespace blp {

void PointMeasure::add(double location, std::uint64_t multiplicity) {
  if (multiplicity == 0) throw std::invalid_argument("PointMeasure: multiplicity must be >= 1");
  atoms_.push_back({location, multiplicity});
}

void PointMeasure::append(const PointMeasure& other) {
  atoms_.insert(atoms_.end(), other.atoms_.begin(), other.atoms_.end());
}

std::uint64_t PointMeasure::total_mass() const {
  std::uint64_t mass = 0;
  for (const Atom& a : atoms_) mass += a.multiplicity;
  return mass;
}

PointMeasure PointMeasure::scaled(double x) const {
  if (!(x > 0.0)) throw std::invalid_argument("PointMeasure::scaled: factor must be positive");
  PointMeasure out;
  out.atoms_.reserve(atoms_.size());
  for (const Atom& a : atoms_) out.atoms_.push_back({a.location / x, a.multiplicity});
  return out;
}

double PointMeasure::integrate(const std::function<double(double)>& g) const {
  double sum = 0.0;
  for (const Atom& a : atoms_) sum += static_cast<double>(a.multiplicity) * g(a.location);
  return sum;
}

double i_functional(const std::function<double(double)>& g, const PointMeasure& nu) {
  // accumulate in log space; a single zero factor ends it
  double log_prod = 0.0;
  for (const Atom& a : nu.atoms()) {
    const double v = g(a.location);
    if (v < 0.0 || v > 1.0) throw std::domain_error("i_functional: g must take values in [0, 1]");
    if (v == 0.0) return 0.0;
    if (v < 1.0) log_prod += static_cast<double>(a.multiplicity) * std::log(v);
  }
  return std::exp(log_prod);
}

}  // namespace blp
