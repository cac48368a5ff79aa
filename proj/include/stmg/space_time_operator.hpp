#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>

#include "stmg/spatial_operator.hpp"
#include "stmg/temporal_weights.hpp"

namespace stmg {

enum class Equation { Heat, Wave };

using SpaceTimeFunction = std::function<double(const Point&, double)>;

/// Known state entering a batch of time steps: temperature/displacement at
/// the batch start, plus the velocity for the wave equation.
struct BatchState {
  Eigen::VectorXd u;
  Eigen::VectorXd v; // empty for the heat equation
};

/// Block system of n_steps consecutive time steps treated at once. Unknowns
/// are ordered step-major, then temporal node, then spatial dof. The apply
/// is matrix-free: per application it performs exactly n_steps * n_t mass
/// and stiffness operator applications and forms all temporal couplings
/// from the cached products (the wave velocity elimination is carried as a
/// recursion in the mass-transformed variable). Dirichlet dofs act as
/// identity rows of the full block system.
class SpaceTimeOperator {
public:
  SpaceTimeOperator(Equation equation, const TemporalWeights& weights,
                    double tau, int n_steps, const SpatialOperator& mass,
                    const SpatialOperator& stiffness);

  Equation equation() const { return equation_; }
  const TemporalWeights& weights() const { return weights_; }
  double tau() const { return tau_; }
  int n_steps() const { return n_steps_; }
  int n_t() const { return weights_.n_t; }
  Index n_space() const { return mass_->n_dofs(); }
  Index n_dofs() const { return n_steps_ * weights_.n_t * n_space(); }
  Index block_offset(int step, int node) const {
    return (static_cast<Index>(step) * weights_.n_t + node) * n_space();
  }
  const SpatialOperator& mass_operator() const { return *mass_; }
  const SpatialOperator& stiffness_operator() const { return *stiffness_; }
  const SpatialDofMap& dofmap() const { return mass_->dofmap(); }

  void apply(const Eigen::VectorXd& u, Eigen::VectorXd& y) const;
  Eigen::VectorXd apply(const Eigen::VectorXd& u) const;

  /// right-hand side of one batch starting at time t0: the source term
  /// collocated at the temporal unknown nodes plus the coupling to the
  /// entering state
  Eigen::VectorXd assemble_rhs(const SpaceTimeFunction& f, double t0,
                               const BatchState& entering) const;

  /// state at the end of the batch (u at the right endpoint, wave velocity
  /// by the velocity reconstruction)
  BatchState extract_final(const Eigen::VectorXd& u,
                           const BatchState& entering) const;

  /// spatial vector of the trajectory at reference time t_ref in [0,1] of a
  /// step (uses the entering state for the CGP left value)
  Eigen::VectorXd value_at(const Eigen::VectorXd& u, const BatchState& entering,
                           int step, double t_ref) const;

  /// temporal coupling coefficients: the (step s, step j) block of the full
  /// matrix equals sum_kl cM(k,l) M_h + cA(k,l) A_h in the (node k, node l)
  /// slot. Closed-form; shared by the dense and sparse assembly below and
  /// independent of apply().
  void block_coefficients(int s, int j, Eigen::MatrixXd& cM,
                          Eigen::MatrixXd& cA) const;

  /// full batched matrix (test oracle, direct coarse solver); guarded size
  Eigen::MatrixXd assemble_dense() const;
  Eigen::SparseMatrix<double> assemble_sparse() const;

  long applications() const { return apply_count_; }
  void reset_counter() const { apply_count_ = 0; }

private:
  // temporal helper quantities (reference interval, tau applied at use)
  void zero_boundary(Eigen::VectorXd& block_vec) const;

  Equation equation_;
  TemporalWeights weights_;
  double tau_;
  int n_steps_;
  const SpatialOperator* mass_;
  const SpatialOperator* stiffness_;

  // wave helpers: minv_a = m^-1 a, minv_alpha = m^-1 alpha, ...
  Eigen::MatrixXd ama_;        // a m^-1 a
  Eigen::VectorXd am_alpha_;   // a m^-1 alpha
  Eigen::VectorXd minv_a_last_; // last row of m^-1 a
  Eigen::VectorXd alpha_a_;    // alpha - a m^-1 beta (CGP)
  double minv_alpha_last_ = 0.0;
  double minv_beta_last_ = 0.0;

  mutable long apply_count_ = 0;
};

} // namespace stmg
