#include "stmg/driver.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace stmg {

namespace {

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

struct ErrorAcc {
  double l2_l2 = 0.0;
  double linf_l2 = 0.0;
  double linf_linf = 0.0;
  ErrorRecord finish() const {
    return {std::sqrt(l2_l2), linf_l2, linf_linf};
  }
};

// temporal Gauss (k+2) x spatial Gauss (p+2) quadrature over one batch
void accumulate_errors(const SpaceTimeOperator& op, const Eigen::VectorXd& u,
                       const BatchState& entering, const SpaceTimeFunction& exact,
                       double t0, ErrorAcc& acc) {
  const QuadratureRule tq = gauss(op.weights().k + 2);
  const int n_sq = op.dofmap().p + 2;
  for (int s = 0; s < op.n_steps(); ++s)
    for (std::size_t q = 0; q < tq.points.size(); ++q) {
      const double t_ref = tq.points[q];
      const double t = t0 + (s + t_ref) * op.tau();
      const Eigen::VectorXd uval = op.value_at(u, entering, s, t_ref);
      const SpatialErrorSample e = sample_spatial_error(
          op.dofmap(), uval, [&](const Point& x) { return exact(x, t); }, n_sq);
      acc.l2_l2 += tq.weights[q] * op.tau() * e.l2;
      acc.linf_l2 = std::max(acc.linf_l2, std::sqrt(e.l2));
      acc.linf_linf = std::max(acc.linf_linf, e.linf);
    }
}

} // namespace

std::vector<Eigen::VectorXd> velocity_trajectory(const SpaceTimeOperator& op,
                                                 const Eigen::VectorXd& u,
                                                 const BatchState& entering) {
  if (op.equation() != Equation::Wave)
    throw std::invalid_argument("velocity_trajectory: wave equation only");
  const TemporalWeights& w = op.weights();
  const int nt = w.n_t;
  const Index nx = op.n_space();
  const bool cgp = w.scheme == TimeScheme::CGP;
  const Eigen::MatrixXd minv = w.m_tau.fullPivLu().inverse();
  const Eigen::MatrixXd minv_a = minv * w.a_tau;
  const Eigen::VectorXd minv_alpha = minv * w.alpha;
  Eigen::VectorXd minv_beta;
  if (cgp)
    minv_beta = minv * w.beta;
  std::vector<Eigen::VectorXd> v(static_cast<std::size_t>(op.n_steps()) * nt);
  Eigen::VectorXd prev_last = entering.u;
  Eigen::VectorXd v_prev_last = entering.v;
  for (int s = 0; s < op.n_steps(); ++s) {
    for (int i = 0; i < nt; ++i) {
      Eigen::VectorXd vi = Eigen::VectorXd::Zero(nx);
      for (int j = 0; j < nt; ++j)
        vi.noalias() +=
            minv_a(i, j) / op.tau() * u.segment(op.block_offset(s, j), nx);
      if (cgp)
        vi.noalias() += minv_alpha(i) / op.tau() * prev_last -
                        minv_beta(i) * v_prev_last;
      else
        vi.noalias() -= minv_alpha(i) / op.tau() * prev_last;
      v[static_cast<std::size_t>(s) * nt + i] = std::move(vi);
    }
    prev_last = u.segment(op.block_offset(s, nt - 1), nx);
    v_prev_last = v[static_cast<std::size_t>(s) * nt + nt - 1];
  }
  return v;
}

ErrorRecord error_norms(const SpaceTimeOperator& op,
                        const std::vector<Eigen::VectorXd>& batch_solutions,
                        const std::vector<BatchState>& entering,
                        const SpaceTimeFunction& exact, double t_begin) {
  ErrorAcc acc;
  for (std::size_t b = 0; b < batch_solutions.size(); ++b)
    accumulate_errors(op, batch_solutions[b], entering[b], exact,
                      t_begin + static_cast<double>(b) * op.n_steps() * op.tau(),
                      acc);
  return acc.finish();
}

RunReport march(const ProblemSpec& spec, const std::vector<Point>& probes) {
  const double t_wall0 = now_seconds();
  if (spec.dim < 1 || spec.dim > 3)
    throw std::invalid_argument("march: dim must be 1, 2, or 3");
  if (!spec.source || !spec.initial_u)
    throw std::invalid_argument("march: missing problem data");
  const int k_min = spec.scheme == TimeScheme::DG ? 0 : 1;
  if (spec.k < k_min || spec.p < 1)
    throw std::invalid_argument("march: invalid k or p");
  const int n_steps_total = spec.base_time_intervals
                            << (spec.refinements + 1);
  if (spec.batch < 1 || n_steps_total % spec.batch != 0)
    throw std::invalid_argument("march: batch must divide the step count");
  const double tau = spec.t_final / n_steps_total;

  MeshHierarchy mesh = make_cartesian(spec.dim, spec.lo, spec.hi,
                                      spec.base_cells, spec.refinements);
  if (spec.perturb > 0.0)
    perturb(mesh, spec.perturb, spec.seed);

  const TemporalWeights weights =
      spec.scheme == TimeScheme::DG ? dg_weights(spec.k) : cgp_weights(spec.k);
  const int fine_level = spec.refinements;
  SpatialDofMap dofmap(mesh.levels[static_cast<std::size_t>(fine_level)], spec.p);
  SpatialOperator mass(SpatialOperator::Kind::Mass, mesh, fine_level, dofmap);
  SpatialOperator stiffness(SpatialOperator::Kind::Stiffness, mesh, fine_level,
                            dofmap, spec.rho);
  SpaceTimeOperator op(spec.equation, weights, tau, spec.batch, mass, stiffness);

  std::unique_ptr<SpaceTimeMultigrid> mg;
  if (spec.precondition) {
    LevelSpec finest{fine_level, spec.p, spec.k, spec.batch, tau,
                     Coarsening::SpaceH};
    const std::vector<Coarsening> strategy =
        spec.strategy.empty() ? default_strategy(finest, spec.scheme)
                              : spec.strategy;
    MultigridOptions mgo;
    mgo.n_smooth = spec.n_smooth;
    mgo.seed = spec.seed;
    mg = std::make_unique<SpaceTimeMultigrid>(
        spec.equation, spec.scheme, mesh, spec.rho,
        build_level_plan(finest, spec.scheme, strategy), mgo);
    mg->reset_timers();
  }

  RunReport report;
  report.n_space_dofs = dofmap.n_dofs;
  report.n_steps_total = n_steps_total;
  report.n_batches = n_steps_total / spec.batch;
  report.dofs_global =
      static_cast<Index>(n_steps_total) * weights.n_t * dofmap.n_dofs;
  if (mg)
    report.hierarchy = mg->level_info();

  // initial state (interpolated, boundary values zeroed to match the
  // homogeneous Dirichlet convention of the operator)
  const bool wave = spec.equation == Equation::Wave;
  BatchState state;
  state.u = interpolate(dofmap, spec.initial_u);
  if (wave) {
    if (!spec.initial_v)
      throw std::invalid_argument("march: wave problem needs initial_v");
    state.v = interpolate(dofmap, spec.initial_v);
  }
  for (Index i = 0; i < dofmap.n_dofs; ++i)
    if (dofmap.boundary[static_cast<std::size_t>(i)]) {
      state.u[i] = 0.0;
      if (wave)
        state.v[i] = 0.0;
    }

  // probe bookkeeping
  std::vector<std::pair<Index, std::array<double, 3>>> probe_cells;
  for (const Point& x : probes)
    probe_cells.push_back(
        locate_point(mesh.levels[static_cast<std::size_t>(fine_level)], x));
  report.probe_values.resize(probes.size());
  if (!probes.empty()) {
    report.probe_times.push_back(0.0);
    for (std::size_t pi = 0; pi < probes.size(); ++pi)
      report.probe_values[pi].push_back(evaluate_fe(
          dofmap, state.u, probe_cells[pi].first, probe_cells[pi].second));
  }

  GmresOptions gopts;
  gopts.abs_tol = spec.abs_tol;
  gopts.rel_tol = spec.rel_tol;
  gopts.max_iters = spec.max_iters;
  gopts.restart = spec.restart;

  double op_seconds = 0.0;
  ErrorAcc acc_u, acc_v;
  report.converged = true;
  for (int b = 0; b < report.n_batches; ++b) {
    const double t0 = static_cast<double>(b) * spec.batch * tau;
    const Eigen::VectorXd rhs = op.assemble_rhs(spec.source, t0, state);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(op.n_dofs());
    LinearMap apply_op = [&](const Eigen::VectorXd& v, Eigen::VectorXd& y) {
      const double t = now_seconds();
      op.apply(v, y);
      op_seconds += now_seconds() - t;
    };
    LinearMap precond;
    if (mg)
      precond = [&](const Eigen::VectorXd& r, Eigen::VectorXd& z) {
        mg->apply(r, z);
      };
    const GmresResult res = gmres(apply_op, rhs, x, gopts, precond);
    report.batches.push_back({res.iterations, res.final_residual, res.converged});
    report.work += static_cast<double>(spec.batch) * weights.n_t *
                   dofmap.n_dofs * res.iterations;
    if (!res.converged) {
      report.converged = false;
      break;
    }

    if (spec.exact_u)
      accumulate_errors(op, x, state, spec.exact_u, t0, acc_u);
    if (wave && spec.exact_v) {
      const std::vector<Eigen::VectorXd> vtraj = velocity_trajectory(op, x, state);
      Eigen::VectorXd vflat(op.n_dofs());
      for (std::size_t i = 0; i < vtraj.size(); ++i)
        vflat.segment(static_cast<Index>(i) * op.n_space(), op.n_space()) =
            vtraj[i];
      BatchState ventering;
      ventering.u = state.v;
      accumulate_errors(op, vflat, ventering, spec.exact_v, t0, acc_v);
    }
    for (std::size_t pi = 0; pi < probes.size(); ++pi)
      for (int s = 0; s < spec.batch; ++s)
        for (int j = 1; j <= spec.probe_samples_per_step; ++j) {
          const double t_ref =
              static_cast<double>(j) / spec.probe_samples_per_step;
          const Eigen::VectorXd uval = op.value_at(x, state, s, t_ref);
          report.probe_values[pi].push_back(evaluate_fe(
              dofmap, uval, probe_cells[pi].first, probe_cells[pi].second));
          if (pi == 0)
            report.probe_times.push_back(t0 + (s + t_ref) * tau);
        }

    BatchState next = op.extract_final(x, state);
    if (spec.keep_trajectory) {
      report.trajectory.push_back(x);
      report.entering_states.push_back(state);
    }
    state = std::move(next);
  }

  if (spec.exact_u)
    report.error_u = acc_u.finish();
  if (wave && spec.exact_v)
    report.error_v = acc_v.finish();
  double iter_sum = 0.0;
  for (const BatchStats& bs : report.batches)
    iter_sum += bs.iterations;
  report.mean_iterations =
      report.batches.empty() ? 0.0 : iter_sum / report.batches.size();

  report.sections.total = now_seconds() - t_wall0;
  report.sections.smoother = mg ? mg->seconds_smoother() : 0.0;
  report.sections.gmg_wo_smoother =
      mg ? mg->seconds_total() - mg->seconds_smoother() : 0.0;
  report.sections.operator_wo_gmg = op_seconds;
  report.sections.other = report.sections.total - report.sections.smoother -
                          report.sections.gmg_wo_smoother -
                          report.sections.operator_wo_gmg;
  return report;
}

void manufactured_problem(ProblemSpec& spec, double frequency) {
  const double om = 2.0 * M_PI * frequency;
  const int dim = spec.dim;
  auto sinprod = [om, dim](const Point& x) {
    double s = 1.0;
    for (int a = 0; a < dim; ++a)
      s *= std::sin(om * x[a]);
    return s;
  };
  spec.rho = constant_coefficient(1.0);
  spec.exact_u = [om, sinprod](const Point& x, double t) {
    return std::sin(om * t) * sinprod(x);
  };
  spec.initial_u = [](const Point&) { return 0.0; };
  if (spec.equation == Equation::Heat) {
    spec.source = [om, dim, sinprod](const Point& x, double t) {
      return (om * std::cos(om * t) + dim * om * om * std::sin(om * t)) *
             sinprod(x);
    };
  } else {
    spec.source = [om, dim, sinprod](const Point& x, double t) {
      return (dim - 1) * om * om * std::sin(om * t) * sinprod(x);
    };
    spec.initial_v = [om, sinprod](const Point& x) { return om * sinprod(x); };
    spec.exact_v = [om, sinprod](const Point& x, double t) {
      return om * std::cos(om * t) * sinprod(x);
    };
  }
}

void shm_problem(ProblemSpec& spec, double s) {
  spec.equation = Equation::Wave;
  spec.lo = {-1.0, -1.0, -1.0};
  spec.hi = {1.0, 1.0, 1.0};
  spec.t_final = 2.0;
  spec.base_cells = 5;
  spec.base_time_intervals = 5;
  spec.rho = coefficient_shm(spec.dim);
  spec.abs_tol = 1e-10;
  const int dim = spec.dim;
  spec.source = [](const Point&, double) { return 0.0; };
  spec.initial_u = [s, dim](const Point& x) {
    double r2 = 0.0;
    for (int a = 0; a < dim; ++a)
      r2 += (x[a] / s) * (x[a] / s);
    if (r2 >= 1.0)
      return 0.0;
    return std::exp(-r2) * (1.0 - r2);
  };
  spec.initial_v = [](const Point&) { return 0.0; };
  spec.exact_u = nullptr;
  spec.exact_v = nullptr;
}

std::vector<Point> shm_default_probes() {
  return {{0.75, 0.0, 0.0}, {0.0, 0.0, 0.75}, {0.75, 0.1, 0.75}};
}

} // namespace stmg
