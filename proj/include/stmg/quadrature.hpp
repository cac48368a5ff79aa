#pragma once

#include <vector>

namespace stmg {

enum class QuadratureKind { Gauss, GaussLobatto, GaussRadauRight };

/// Quadrature rule on the unit interval [0,1]. Weights sum to one.
struct QuadratureRule {
  std::vector<double> points;
  std::vector<double> weights;
  QuadratureKind kind = QuadratureKind::Gauss;

  int size() const { return static_cast<int>(points.size()); }
};

/// n-point Gauss-Legendre rule on [0,1], exact for degree 2n-1.
QuadratureRule gauss(int n);

/// n-point Gauss-Lobatto rule on [0,1] (n >= 2), endpoints included,
/// exact for degree 2n-3.
QuadratureRule gauss_lobatto(int n);

/// n-point right-sided Gauss-Radau rule on [0,1] (last point is 1),
/// exact for degree 2n-2.
QuadratureRule gauss_radau_right(int n);

} // namespace stmg
