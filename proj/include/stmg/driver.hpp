#pragma once

#include <optional>

#include "stmg/gmres.hpp"
#include "stmg/multigrid.hpp"

namespace stmg {

/// Fully resolved problem description: discretization, data callables,
/// solver settings. The time mesh follows the offset convention
/// n_steps_total = base_time_intervals * 2^(r+1) while the spatial mesh is
/// refined r times, so h and tau shrink together.
struct ProblemSpec {
  Equation equation = Equation::Heat;
  TimeScheme scheme = TimeScheme::DG;
  int k = 1;
  int p = 1;
  int dim = 2;
  std::array<double, 3> lo{0.0, 0.0, 0.0};
  std::array<double, 3> hi{1.0, 1.0, 1.0};
  double t_final = 1.0;
  int refinements = 2;        // r
  int base_cells = 2;         // spatial cells per axis before refinement
  int base_time_intervals = 1;
  int batch = 1;              // c: time steps per block system

  CoefficientField rho = constant_coefficient(1.0);
  SpaceTimeFunction source;   // required
  SpatialFunction initial_u;  // required
  SpatialFunction initial_v;  // wave only
  SpaceTimeFunction exact_u;  // optional: enables error norms
  SpaceTimeFunction exact_v;  // optional (wave)

  double perturb = 0.0; // relative mesh perturbation magnitude
  std::uint64_t seed = 42;

  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
  int max_iters = 1000;
  int restart = 100;
  int n_smooth = 1;
  bool precondition = true;
  std::vector<Coarsening> strategy; // empty = default ordering
  bool keep_trajectory = false;
  int probe_samples_per_step = 16;
};

struct ErrorRecord {
  double l2_l2 = 0.0;
  double linf_l2 = 0.0;
  double linf_linf = 0.0;
};

struct BatchStats {
  int iterations = 0;
  double final_residual = 0.0;
  bool converged = false;
};

struct SectionTimes {
  double total = 0.0;
  double smoother = 0.0;
  double gmg_wo_smoother = 0.0;
  double operator_wo_gmg = 0.0;
  double other = 0.0;
};

struct RunReport {
  bool converged = false;
  Index n_space_dofs = 0;
  int n_steps_total = 0;
  int n_batches = 0;
  Index dofs_global = 0; // n_steps_total * n_t * n_space
  std::vector<BatchStats> batches;
  double mean_iterations = 0.0;
  double work = 0.0; // sum over batches of (c*n_t) * N_x * iterations
  std::optional<ErrorRecord> error_u;
  std::optional<ErrorRecord> error_v;
  std::vector<LevelInfo> hierarchy;
  SectionTimes sections;
  // probe time series: times and one value column per probe point
  std::vector<double> probe_times;
  std::vector<std::vector<double>> probe_values;
  // kept only when spec.keep_trajectory: per batch, the solution block
  // vector and the state entering the batch
  std::vector<Eigen::VectorXd> trajectory;
  std::vector<BatchState> entering_states;
};

/// March over all batches of the problem, solving each block system with
/// V-cycle-preconditioned GMRES, and accumulate errors, iteration counts,
/// the work metric, probe signals, and section timings.
RunReport march(const ProblemSpec& spec, const std::vector<Point>& probes = {});

/// exact-solution error norms of a trajectory against a callable, by
/// temporal Gauss quadrature with k+2 points per step and spatial Gauss
/// quadrature with p+2 points per axis
ErrorRecord error_norms(const SpaceTimeOperator& op,
                        const std::vector<Eigen::VectorXd>& batch_solutions,
                        const std::vector<BatchState>& entering,
                        const SpaceTimeFunction& exact, double t_begin);

/// velocity node coefficients of every step of a batch (wave equation)
std::vector<Eigen::VectorXd> velocity_trajectory(const SpaceTimeOperator& op,
                                                 const Eigen::VectorXd& u,
                                                 const BatchState& entering);

/// Manufactured smooth problem u = sin(2 pi f t) prod_a sin(2 pi f x_a) with
/// the matching source, initial and exact data (rho = 1).
void manufactured_problem(ProblemSpec& spec, double frequency);

/// Heterogeneous-coefficient wave demo: compactly supported initial pulse of
/// width s on [-1,1]^dim over [0, 2], piecewise speed of sound, zero source.
void shm_problem(ProblemSpec& spec, double s);

/// default probe points of the demo
std::vector<Point> shm_default_probes();

} // namespace stmg
