#pragma once

#include <Eigen/Sparse>
#include <memory>
#include <string>

#include "stmg/asm_smoother.hpp"
#include "stmg/space_time_operator.hpp"
#include "stmg/transfer.hpp"

namespace stmg {

enum class Coarsening { SpaceH, SpaceP, TimeTau, TimeK };

std::string coarsening_name(Coarsening c);

/// One multigrid level descriptor; level 0 of a plan is the finest.
struct LevelSpec {
  int mesh_level = 0;
  int p = 1;
  int k = 0;
  int n_steps = 1;
  double tau = 1.0;
  Coarsening from_finer = Coarsening::SpaceH; // meaningless on level 0
};

/// Expand an ordered coarsening list into the level sequence, finest first.
/// Exactly one attribute changes per entry; invalid steps (k below the
/// scheme minimum, p < 1, n_steps < 1, mesh level < 0) throw.
std::vector<LevelSpec> build_level_plan(const LevelSpec& finest,
                                        TimeScheme scheme,
                                        const std::vector<Coarsening>& strategy);

/// Default ordering: all spatial h levels first, then tau halvings while
/// n_steps > 1, then k decrements down to the scheme minimum.
std::vector<Coarsening> default_strategy(const LevelSpec& finest,
                                         TimeScheme scheme);

struct MultigridOptions {
  int n_smooth = 1;
  Index direct_coarse_max = 20000;
  double coarse_rel_tol = 1e-3;
  int coarse_max_iters = 2000;
  int eig_iters = 20;
  std::uint64_t seed = 42;
};

struct LevelInfo {
  std::string coarsening; // "finest" on level 0
  int mesh_level, p, k, n_steps;
  Index n_dofs;
  double omega;
};

/// Geometric space-time multigrid V-cycle preconditioner for one batched
/// space-time system. Coarse operators are re-discretized per level; the
/// smoother is the cell-wise additive Schwarz method with a per-level
/// relaxation factor estimated from the extremal Ritz values of the
/// smoother-preconditioned operator. The coarsest level is solved directly
/// (sparse LU) below a size threshold, otherwise by unpreconditioned GMRES
/// to a loose tolerance.
class SpaceTimeMultigrid {
public:
  SpaceTimeMultigrid(Equation equation, TimeScheme scheme,
                     const MeshHierarchy& mesh, const CoefficientField& rho,
                     const std::vector<LevelSpec>& plan,
                     const MultigridOptions& options = {});

  int n_levels() const { return static_cast<int>(levels_.size()); }
  const SpaceTimeOperator& fine_operator() const { return *levels_[0].op; }
  const SpaceTimeOperator& operator_at(int l) const { return *levels_[l].op; }
  const ASMSmoother& smoother_at(int l) const { return *levels_[l].smoother; }
  double omega_at(int l) const { return levels_[l].omega; }
  void set_omega(int l, double omega) { levels_[l].omega = omega; }
  std::vector<LevelInfo> level_info() const;

  /// preconditioner application: one V-cycle from the finest level, zero
  /// initial guess
  void apply(const Eigen::VectorXd& r, Eigen::VectorXd& z) const;

  void v_cycle(int l, const Eigen::VectorXd& f, Eigen::VectorXd& u) const;
  /// one damped additive Schwarz sweep: u += omega_l * P_l^{-1} (f - S_l u)
  void smooth(int l, const Eigen::VectorXd& f, Eigen::VectorXd& u) const;

  // wall-clock accounting for the profile sections
  double seconds_total() const { return seconds_total_; }
  double seconds_smoother() const { return seconds_smoother_; }
  void reset_timers() const { seconds_total_ = seconds_smoother_ = 0.0; }

private:
  struct Level {
    LevelSpec spec;
    TemporalWeights weights;
    std::unique_ptr<SpatialDofMap> dofmap;
    std::unique_ptr<SpatialOperator> mass;
    std::unique_ptr<SpatialOperator> stiffness;
    std::unique_ptr<SpaceTimeOperator> op;
    std::unique_ptr<ASMSmoother> smoother;
    std::unique_ptr<Transfer> to_coarser; // set on all but the coarsest
    double omega = 1.0;
    std::unique_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> coarse_lu;
  };

  double estimate_relaxation(const Level& level, std::uint64_t seed) const;
  void coarse_solve(const Eigen::VectorXd& f, Eigen::VectorXd& u) const;

  MultigridOptions options_;
  std::vector<Level> levels_; // finest first
  mutable double seconds_total_ = 0.0;
  mutable double seconds_smoother_ = 0.0;
};

} // namespace stmg
