#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace blp {

struct Atom {
  double location;
  std::uint64_t multiplicity = 1;
};

/// Finite sum of Dirac masses with integer multiplicities.
class PointMeasure {
 public:
  PointMeasure() = default;

  void add(double location, std::uint64_t multiplicity = 1);
  void append(const PointMeasure& other);

  const std::vector<Atom>& atoms() const { return atoms_; }
  bool empty() const { return atoms_.empty(); }
  std::uint64_t total_mass() const;

  /// nu / x: every location divided by x.
  PointMeasure scaled(double x) const;

  /// Sum of multiplicity * g(location).
  double integrate(const std::function<double(double)>& g) const;

 private:
  std::vector<Atom> atoms_;
};

/// I(g, nu) = prod g(x_k)^{m_k}; 1 for the empty measure.
double i_functional(const std::function<double(double)>& g, const PointMeasure& nu);

}  // namespace blp
