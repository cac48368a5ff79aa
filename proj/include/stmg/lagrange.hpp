#pragma once

#include <vector>

namespace stmg {

/// Lagrange cardinal basis on a set of strictly increasing nodes in [0,1].
class LagrangeBasis {
public:
  LagrangeBasis() = default;
  explicit LagrangeBasis(std::vector<double> nodes);

  int degree() const { return static_cast<int>(nodes_.size()) - 1; }
  int size() const { return static_cast<int>(nodes_.size()); }
  const std::vector<double>& nodes() const { return nodes_; }

  /// value of the i-th cardinal polynomial at t
  double eval(int i, double t) const;
  /// first derivative of the i-th cardinal polynomial at t
  double deriv(int i, double t) const;

private:
  void check_index(int i) const;
  std::vector<double> nodes_;
};

} // namespace stmg
