#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "test_support.hpp"

using namespace stmg;
using namespace stmg_test;

TEST_CASE("quadrature rules are exact to their advertised degree") {
  std::string msg;
  CHECK_MESSAGE(check_quadrature(msg), msg);
}

TEST_CASE("quadrature endpoint conventions") {
  for (int n = 1; n <= 5; ++n) {
    const QuadratureRule r = gauss_radau_right(n);
    CHECK(r.points.back() == doctest::Approx(1.0).epsilon(1e-14));
  }
  for (int n = 2; n <= 5; ++n) {
    const QuadratureRule r = gauss_lobatto(n);
    CHECK(r.points.front() == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(r.points.back() == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("Lagrange basis: cardinality, partition of unity, reproduction") {
  for (int n : {2, 3, 4}) {
    const LagrangeBasis basis(gauss_lobatto(n).points);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        CHECK(basis.eval(i, basis.nodes()[static_cast<std::size_t>(j)]) ==
              doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-13));
    Xoshiro256 rng(1);
    for (int trial = 0; trial < 10; ++trial) {
      const double t = rng.uniform();
      double sum = 0.0, dsum = 0.0, val = 0.0;
      for (int i = 0; i < n; ++i) {
        sum += basis.eval(i, t);
        dsum += basis.deriv(i, t);
        // reproduce q(t) = t^(n-1) from nodal values
        val += std::pow(basis.nodes()[static_cast<std::size_t>(i)], n - 1) *
               basis.eval(i, t);
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-13));
      CHECK(std::abs(dsum) < 1e-11);
      CHECK(val == doctest::Approx(std::pow(t, n - 1)).epsilon(1e-12));
    }
  }
}

TEST_CASE("temporal weight shapes") {
  for (int k : {0, 1, 2, 3}) {
    const TemporalWeights w = dg_weights(k);
    CHECK(w.n_t == k + 1);
    CHECK(w.m_tau.rows() == k + 1);
    CHECK(w.beta.isZero(0.0));
    CHECK(w.unknown_nodes.back() == doctest::Approx(1.0).epsilon(1e-14));
  }
  for (int k : {1, 2, 3}) {
    const TemporalWeights w = cgp_weights(k);
    CHECK(w.n_t == k);
    CHECK(w.m_tau.rows() == k);
    CHECK(w.unknown_nodes.back() == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("DG(0) reproduces backward Euler") {
  const TemporalWeights w = dg_weights(0);
  for (double tau : {0.5, 0.1, 0.01}) {
    for (double lambda : {1.0, 3.5}) {
      const double got = scalar_dg_step(w, tau, lambda, 1.0);
      const double be = 1.0 / (1.0 + tau * lambda);
      CHECK(std::abs(got - be) <= 1e-13);
    }
  }
}

TEST_CASE("CGP(1) reproduces Crank-Nicolson") {
  const TemporalWeights w = cgp_weights(1);
  for (double tau : {0.5, 0.1, 0.01}) {
    for (double lambda : {1.0, 3.5}) {
      const double got = scalar_cgp_step(w, tau, lambda, 1.0);
      const double cn = (1.0 - 0.5 * tau * lambda) / (1.0 + 0.5 * tau * lambda);
      CHECK(std::abs(got - cn) <= 1e-13);
    }
  }
}

TEST_CASE("DG(1) stability function matches two-stage Radau IIA") {
  for (double z : {-0.5, -2.0, -10.0}) {
    const double got = dg_stability(1, z);
    const double radau =
        (1.0 + z / 3.0) / (1.0 - 2.0 * z / 3.0 + z * z / 6.0);
    CHECK(std::abs(got - radau) <= 1e-12);
  }
}

TEST_CASE("scalar decay orders: multi-step error shrinks at k+1") {
  // u' = -u on [0,1]; endpoint error order is at least k+1 for both families
  for (TimeScheme scheme : {TimeScheme::DG, TimeScheme::CGP}) {
    for (int k : {1, 2}) {
      const TemporalWeights w =
          scheme == TimeScheme::DG ? dg_weights(k) : cgp_weights(k);
      auto endpoint_error = [&](int n) {
        const double tau = 1.0 / n;
        double u = 1.0;
        for (int s = 0; s < n; ++s)
          u = scheme == TimeScheme::DG ? scalar_dg_step(w, tau, 1.0, u)
                                       : scalar_cgp_step(w, tau, 1.0, u);
        return std::abs(u - std::exp(-1.0));
      };
      const double rate = std::log2(endpoint_error(8) / endpoint_error(16));
      CHECK(rate >= k + 1 - 0.3);
    }
  }
}

TEST_CASE("trajectory evaluation is consistent with the basis") {
  for (TimeScheme scheme : {TimeScheme::DG, TimeScheme::CGP}) {
    for (int k : {1, 2}) {
      const TemporalWeights w =
          scheme == TimeScheme::DG ? dg_weights(k) : cgp_weights(k);
      Eigen::VectorXd coeffs(w.n_t);
      Xoshiro256 rng(3);
      for (int i = 0; i < w.n_t; ++i)
        coeffs[i] = rng.normal();
      const double left = rng.normal();
      // at an unknown node the trajectory equals the coefficient
      for (int i = 0; i < w.n_t; ++i)
        CHECK(w.eval_trajectory(coeffs, left,
                                w.unknown_nodes[static_cast<std::size_t>(i)]) ==
              doctest::Approx(coeffs[i]).epsilon(1e-12));
      // eval_trajectory decomposes into the published weights
      for (double t : {0.0, 0.31, 0.77, 1.0}) {
        double v = w.left_weight(t) * left;
        for (int i = 0; i < w.n_t; ++i)
          v += w.unknown_weight(i, t) * coeffs[i];
        CHECK(w.eval_trajectory(coeffs, left, t) ==
              doctest::Approx(v).epsilon(1e-12));
      }
      if (scheme == TimeScheme::CGP)
        CHECK(w.eval_trajectory(coeffs, left, 0.0) ==
              doctest::Approx(left).epsilon(1e-12));
      else
        CHECK(w.left_weight(0.5) == 0.0);
    }
  }
}
