#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "stmg/config.hpp"
#include "test_support.hpp"

using namespace stmg;
using namespace stmg_test;

TEST_CASE("config: parse, round trip, overrides, unknown keys") {
  const std::string text = R"({
    "equation": "wave", "scheme": "cgp", "k": 2, "p": 3, "dim": 2,
    "batch": 4, "perturb": 0.15, "strategy": ["space-h", "time-tau"],
    "probes": [[0.5, 0.25, 0.0]], "seed": 7
  })";
  Config c = parse_config(text);
  CHECK(c.equation == "wave");
  CHECK(c.scheme == "cgp");
  CHECK(c.k == 2);
  CHECK(c.p == 3);
  CHECK(c.batch == 4);
  CHECK(c.perturb == 0.15);
  REQUIRE(c.strategy.size() == 2);
  REQUIRE(c.probes.size() == 1);
  CHECK(c.probes[0][1] == 0.25);
  // lossless round trip
  const Config c2 = parse_config(config_to_json(c).dump());
  CHECK(config_to_json(c2) == config_to_json(c));
  // unknown keys are rejected by name
  CHECK_THROWS_WITH_AS(parse_config(R"({"equatoin": "heat"})"),
                       doctest::Contains("equatoin"), std::exception);
  // overrides
  apply_override(c, "n_smooth", "2");
  apply_override(c, "rel_tol", "1e-10");
  apply_override(c, "equation", "heat");
  apply_override(c, "precondition", "false");
  CHECK(c.n_smooth == 2);
  CHECK(c.rel_tol == 1e-10);
  CHECK(c.equation == "heat");
  CHECK_FALSE(c.precondition);
  CHECK_THROWS(apply_override(c, "nonsense", "1"));
}

TEST_CASE("make_problem resolves the demo defaults") {
  Config c;
  c.equation = "wave";
  c.problem = "shm";
  c.dim = 3;
  const ProblemSpec spec = make_problem(c, 1);
  CHECK(spec.equation == Equation::Wave);
  CHECK(spec.t_final == 2.0);
  CHECK(spec.base_cells == 5);
  CHECK(spec.base_time_intervals == 5);
  CHECK(spec.abs_tol == 1e-10);
  CHECK(spec.lo[0] == -1.0);
  CHECK(spec.hi[0] == 1.0);
  CHECK_FALSE(spec.rho.is_unit());
  CHECK(resolve_probes(c).size() == 3);
  // heat + shm is rejected
  Config bad = c;
  bad.equation = "heat";
  CHECK_THROWS(make_problem(bad, 1));
}

TEST_CASE("march: convergence, work metric, report consistency") {
  ProblemSpec spec;
  spec.equation = Equation::Heat;
  spec.scheme = TimeScheme::DG;
  spec.k = spec.p = 1;
  spec.dim = 1;
  spec.base_cells = 4;
  spec.batch = 2;
  manufactured_problem(spec, 1.0);
  std::vector<double> errors;
  for (int r : {1, 2, 3}) {
    spec.refinements = r;
    const RunReport run = march(spec);
    CHECK(run.converged);
    REQUIRE(run.error_u.has_value());
    errors.push_back(run.error_u->l2_l2);
    CHECK(run.n_steps_total == (1 << (r + 1)));
    CHECK(run.n_batches == run.n_steps_total / spec.batch);
    CHECK(run.dofs_global ==
          static_cast<Index>(run.n_steps_total) * 2 * run.n_space_dofs);
    // work = sum over batches of (c * n_t) * N_x * iterations
    double work = 0.0;
    double iter_sum = 0.0;
    for (const BatchStats& b : run.batches) {
      work += static_cast<double>(spec.batch * 2) *
              static_cast<double>(run.n_space_dofs) * b.iterations;
      iter_sum += b.iterations;
      CHECK(b.converged);
    }
    CHECK(run.work == doctest::Approx(work));
    CHECK(run.mean_iterations ==
          doctest::Approx(iter_sum / run.batches.size()));
  }
  const double eoc = std::log2(errors[1] / errors[2]);
  CHECK(eoc == doctest::Approx(2.0).epsilon(0.2));
}

TEST_CASE("march matches an unpreconditioned solve") {
  ProblemSpec spec;
  spec.equation = Equation::Wave;
  spec.scheme = TimeScheme::CGP;
  spec.k = spec.p = 1;
  spec.dim = 1;
  spec.base_cells = 4;
  spec.refinements = 1;
  spec.batch = 2;
  manufactured_problem(spec, 1.0);
  const RunReport a = march(spec);
  spec.precondition = false;
  const RunReport b = march(spec);
  REQUIRE(a.error_u.has_value());
  REQUIRE(b.error_u.has_value());
  CHECK(a.error_u->l2_l2 ==
        doctest::Approx(b.error_u->l2_l2).epsilon(1e-8));
  REQUIRE(a.error_v.has_value());
  CHECK(a.error_v->l2_l2 > 0.0);
}

TEST_CASE("probe signals start at the initial condition") {
  ProblemSpec spec;
  spec.equation = Equation::Heat;
  spec.scheme = TimeScheme::DG;
  spec.k = spec.p = 1;
  spec.dim = 1;
  spec.base_cells = 4;
  spec.refinements = 2;
  spec.batch = 1;
  spec.probe_samples_per_step = 4;
  manufactured_problem(spec, 1.0);
  const std::vector<Point> probes{{0.5, 0.0, 0.0}, {0.25, 0.0, 0.0}};
  const RunReport run = march(spec, probes);
  REQUIRE(run.probe_values.size() == 2);
  REQUIRE(!run.probe_times.empty());
  CHECK(run.probe_times.front() == 0.0);
  CHECK(run.probe_times.back() == doctest::Approx(spec.t_final));
  CHECK(run.probe_times.size() == run.probe_values[0].size());
  // the manufactured solution sin(2 pi t) sin(2 pi x) vanishes at t = 0
  CHECK(std::abs(run.probe_values[0][0]) <= 1e-12);
  CHECK(std::abs(run.probe_values[1][0]) <= 1e-12);
  // and the probe signal tracks the exact solution at x = 0.25
  double max_err = 0.0;
  for (std::size_t i = 0; i < run.probe_times.size(); ++i) {
    const double t = run.probe_times[i];
    max_err = std::max(max_err, std::abs(run.probe_values[1][i] -
                                         std::sin(2.0 * M_PI * t)));
  }
  CHECK(max_err < 0.15);
}

TEST_CASE("CGP trajectories are continuous") {
  std::string msg;
  CHECK_MESSAGE(check_cgp_continuity(msg), msg);
}

TEST_CASE("DG jumps decay at rate k+1") {
  std::string msg;
  CHECK_MESSAGE(check_dg_jump_decay(msg), msg);
}
