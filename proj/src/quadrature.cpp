#include "stmg/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace stmg {

namespace {

// Legendre polynomial P_n and its first derivative on [-1,1].
struct LegendreValue {
  double p;
  double dp;
};

LegendreValue legendre(int n, double x) {
  double p0 = 1.0, p1 = x;
  if (n == 0)
    return {1.0, 0.0};
  for (int j = 2; j <= n; ++j) {
    const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
    p0 = p1;
    p1 = p2;
  }
  // derivative from the standard identity, regularized at the endpoints
  double dp;
  if (std::abs(1.0 - x * x) < 1e-14)
    dp = 0.5 * n * (n + 1.0) * (x > 0 ? 1.0 : ((n % 2 == 0) ? -1.0 : 1.0));
  else
    dp = n * (x * p1 - p0) / (x * x - 1.0);
  return {p1, dp};
}

// Roots of a smooth function on (-1,1) located by sign-change scan followed
// by Newton iterations (bisection fallback keeps the bracket).
std::vector<double> interior_roots(const std::function<double(double)>& f,
                                   const std::function<double(double)>& df,
                                   int expected) {
  const int samples = std::max(4000, 200 * expected);
  std::vector<double> roots;
  double xa = -1.0 + 1e-12;
  double fa = f(xa);
  for (int i = 1; i <= samples; ++i) {
    const double xb = -1.0 + 2.0 * i / samples - (i == samples ? 1e-12 : 0.0);
    const double fb = f(xb);
    if (fa == 0.0) {
      roots.push_back(xa);
    } else if (fa * fb < 0.0) {
      double lo = xa, hi = xb;
      double x = 0.5 * (lo + hi);
      for (int it = 0; it < 100; ++it) {
        const double fx = f(x);
        if (fx == 0.0)
          break;
        if (f(lo) * fx < 0.0)
          hi = x;
        else
          lo = x;
        const double d = df(x);
        double xn = (d != 0.0) ? x - fx / d : 0.5 * (lo + hi);
        if (xn <= lo || xn >= hi)
          xn = 0.5 * (lo + hi);
        if (std::abs(xn - x) < 1e-15) {
          x = xn;
          break;
        }
        x = xn;
      }
      roots.push_back(x);
    }
    xa = xb;
    fa = fb;
  }
  if (static_cast<int>(roots.size()) != expected)
    throw std::runtime_error("quadrature: root scan failed to locate all nodes");
  std::sort(roots.begin(), roots.end());
  return roots;
}

QuadratureRule map_to_unit(std::vector<double> pts, std::vector<double> wts,
                           QuadratureKind kind) {
  // affine map [-1,1] -> [0,1]
  QuadratureRule rule;
  rule.kind = kind;
  rule.points.resize(pts.size());
  rule.weights.resize(wts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    rule.points[i] = 0.5 * (pts[i] + 1.0);
    rule.weights[i] = 0.5 * wts[i];
  }
  return rule;
}

} // namespace

QuadratureRule gauss(int n) {
  if (n < 1)
    throw std::invalid_argument("gauss: n must be >= 1");
  if (n == 1)
    return {{0.5}, {1.0}, QuadratureKind::Gauss};
  auto roots = interior_roots([n](double x) { return legendre(n, x).p; },
                              [n](double x) { return legendre(n, x).dp; }, n);
  std::vector<double> wts(n);
  for (int i = 0; i < n; ++i) {
    const auto v = legendre(n, roots[i]);
    wts[i] = 2.0 / ((1.0 - roots[i] * roots[i]) * v.dp * v.dp);
  }
  return map_to_unit(roots, wts, QuadratureKind::Gauss);
}

QuadratureRule gauss_lobatto(int n) {
  if (n < 2)
    throw std::invalid_argument("gauss_lobatto: n must be >= 2");
  std::vector<double> pts, wts;
  pts.push_back(-1.0);
  if (n > 2) {
    auto roots =
        interior_roots([n](double x) { return legendre(n - 1, x).dp; },
                       [n](double x) {
                         // P''_{n-1} from the Legendre ODE
                         const auto v = legendre(n - 1, x);
                         return (2.0 * x * v.dp - (n - 1.0) * n * v.p) /
                                (1.0 - x * x);
                       },
                       n - 2);
    pts.insert(pts.end(), roots.begin(), roots.end());
  }
  pts.push_back(1.0);
  wts.resize(n);
  for (int i = 0; i < n; ++i) {
    const double p = legendre(n - 1, pts[i]).p;
    wts[i] = 2.0 / (n * (n - 1.0) * p * p);
  }
  return map_to_unit(pts, wts, QuadratureKind::GaussLobatto);
}

QuadratureRule gauss_radau_right(int n) {
  if (n < 1)
    throw std::invalid_argument("gauss_radau_right: n must be >= 1");
  if (n == 1)
    return {{1.0}, {1.0}, QuadratureKind::GaussRadauRight};
  // Left Radau on [-1,1]: node at -1 plus the roots of P_{n-1}+P_n; the
  // right-sided rule is its reflection.
  auto f = [n](double x) { return legendre(n - 1, x).p + legendre(n, x).p; };
  auto df = [n](double x) { return legendre(n - 1, x).dp + legendre(n, x).dp; };
  auto roots = interior_roots(f, df, n - 1);
  std::vector<double> pts, wts;
  pts.push_back(-1.0);
  wts.push_back(2.0 / (n * static_cast<double>(n)));
  for (double x : roots) {
    pts.push_back(x);
    const double p = legendre(n - 1, x).p;
    wts.push_back((1.0 - x) / (n * static_cast<double>(n) * p * p));
  }
  // reflect to put the fixed node at the right end
  std::vector<double> rpts(n), rwts(n);
  for (int i = 0; i < n; ++i) {
    rpts[i] = -pts[n - 1 - i];
    rwts[i] = wts[n - 1 - i];
  }
  auto rule = map_to_unit(rpts, rwts, QuadratureKind::GaussRadauRight);
  rule.points.back() = 1.0; // exact by construction
  return rule;
}

} // namespace stmg
