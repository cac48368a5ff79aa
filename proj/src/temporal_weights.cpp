#include "stmg/temporal_weights.hpp"

#include <stdexcept>

#include "stmg/quadrature.hpp"

namespace stmg {

double TemporalWeights::unknown_weight(int i, double t) const {
  if (scheme == TimeScheme::DG)
    return trial_basis.eval(i, t);
  return trial_basis.eval(i + 1, t);
}

double TemporalWeights::left_weight(double t) const {
  if (scheme == TimeScheme::DG)
    return 0.0;
  return trial_basis.eval(0, t);
}

double TemporalWeights::eval_trajectory(const Eigen::VectorXd& coeffs,
                                        double left_value, double t) const {
  double v = left_weight(t) * left_value;
  for (int i = 0; i < n_t; ++i)
    v += unknown_weight(i, t) * coeffs[i];
  return v;
}

TemporalWeights dg_weights(int k) {
  if (k < 0)
    throw std::invalid_argument("dg_weights: k must be >= 0");
  TemporalWeights w;
  w.scheme = TimeScheme::DG;
  w.k = k;
  w.n_t = k + 1;

  const auto radau = gauss_radau_right(k + 1);
  w.trial_basis = LagrangeBasis(radau.points);
  w.unknown_nodes = radau.points;

  // integrals of degree <= 2k are needed; use a k+1 point Gauss rule
  const auto q = gauss(k + 1);
  const int n = k + 1;
  w.m_tau = Eigen::MatrixXd::Zero(n, n);
  w.a_tau = Eigen::MatrixXd::Zero(n, n);
  w.alpha = Eigen::VectorXd::Zero(n);
  w.beta = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double m = 0.0, a = 0.0;
      for (int p = 0; p < q.size(); ++p) {
        const double t = q.points[p];
        const double wt = q.weights[p];
        m += wt * w.trial_basis.eval(j, t) * w.trial_basis.eval(i, t);
        a += wt * w.trial_basis.deriv(j, t) * w.trial_basis.eval(i, t);
      }
      // jump term at the left interval boundary
      a += w.trial_basis.eval(j, 0.0) * w.trial_basis.eval(i, 0.0);
      w.m_tau(i, j) = m;
      w.a_tau(i, j) = a;
    }
    w.alpha[i] = w.trial_basis.eval(i, 0.0);
  }
  return w;
}

TemporalWeights cgp_weights(int k) {
  if (k < 1)
    throw std::invalid_argument("cgp_weights: k must be >= 1");
  TemporalWeights w;
  w.scheme = TimeScheme::CGP;
  w.k = k;
  w.n_t = k;

  const auto lobatto = gauss_lobatto(k + 1);
  w.trial_basis = LagrangeBasis(lobatto.points);
  w.unknown_nodes.assign(lobatto.points.begin() + 1, lobatto.points.end());
  LagrangeBasis test(
      std::vector<double>(lobatto.points.begin() + 1, lobatto.points.end()));

  // integrands of degree <= 2k; k+1 Gauss points are exact up to 2k+1
  const auto q = gauss(k + 1);
  w.m_tau = Eigen::MatrixXd::Zero(k, k);
  w.a_tau = Eigen::MatrixXd::Zero(k, k);
  w.alpha = Eigen::VectorXd::Zero(k);
  w.beta = Eigen::VectorXd::Zero(k);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j <= k; ++j) {
      double m = 0.0, a = 0.0;
      for (int p = 0; p < q.size(); ++p) {
        const double t = q.points[p];
        const double wt = q.weights[p];
        m += wt * w.trial_basis.eval(j, t) * test.eval(i, t);
        a += wt * w.trial_basis.deriv(j, t) * test.eval(i, t);
      }
      if (j == 0) {
        w.beta[i] = m;
        w.alpha[i] = a;
      } else {
        w.m_tau(i, j - 1) = m;
        w.a_tau(i, j - 1) = a;
      }
    }
  }
  return w;
}

} // namespace stmg
