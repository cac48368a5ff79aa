// pybind11 bindings: temporal weight tables, single solves, and refinement
// studies, driven by the same JSON configuration schema as the CLI.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "stmg/config.hpp"
#include "stmg/driver.hpp"

namespace py = pybind11;
using nlohmann::json;
using namespace stmg;

namespace {

json error_to_json(const ErrorRecord& e) {
  return json{{"l2_l2", e.l2_l2},
              {"linf_l2", e.linf_l2},
              {"linf_linf", e.linf_linf}};
}

json report_to_json(const RunReport& r) {
  json batches = json::array();
  for (const BatchStats& b : r.batches)
    batches.push_back({{"iterations", b.iterations},
                       {"final_residual", b.final_residual},
                       {"converged", b.converged}});
  json hierarchy = json::array();
  for (const LevelInfo& l : r.hierarchy)
    hierarchy.push_back({{"coarsening", l.coarsening},
                         {"mesh_level", l.mesh_level},
                         {"p", l.p},
                         {"k", l.k},
                         {"n_steps", l.n_steps},
                         {"n_dofs", l.n_dofs},
                         {"omega", l.omega}});
  json out{{"converged", r.converged},
           {"n_space_dofs", r.n_space_dofs},
           {"n_steps_total", r.n_steps_total},
           {"n_batches", r.n_batches},
           {"dofs_global", r.dofs_global},
           {"mean_iterations", r.mean_iterations},
           {"work", r.work},
           {"batches", batches},
           {"hierarchy", hierarchy},
           {"sections",
            {{"total", r.sections.total},
             {"smoother", r.sections.smoother},
             {"gmg_wo_smoother", r.sections.gmg_wo_smoother},
             {"operator_wo_gmg", r.sections.operator_wo_gmg},
             {"other", r.sections.other}}}};
  if (r.error_u)
    out["error_u"] = error_to_json(*r.error_u);
  if (r.error_v)
    out["error_v"] = error_to_json(*r.error_v);
  if (!r.probe_times.empty()) {
    out["probe_times"] = r.probe_times;
    out["probe_values"] = r.probe_values;
  }
  return out;
}

py::dict weights_dict(const TemporalWeights& w) {
  py::dict d;
  d["scheme"] = w.scheme == TimeScheme::DG ? "dg" : "cgp";
  d["k"] = w.k;
  d["n_t"] = w.n_t;
  d["m_tau"] = w.m_tau;
  d["a_tau"] = w.a_tau;
  d["alpha"] = w.alpha;
  d["beta"] = w.beta;
  d["nodes"] = w.unknown_nodes;
  return d;
}

} // namespace

PYBIND11_MODULE(_stmg, m) {
  m.doc() = "space-time multigrid solver for heat and acoustic wave equations";

  m.def(
      "temporal_weights",
      [](const std::string& scheme, int k) {
        if (scheme == "dg")
          return weights_dict(dg_weights(k));
        if (scheme == "cgp")
          return weights_dict(cgp_weights(k));
        throw std::invalid_argument("scheme must be 'dg' or 'cgp'");
      },
      py::arg("scheme"), py::arg("k"),
      "Temporal weight matrices of DG(k) or CGP(k) on the unit interval.");

  m.def(
      "solve_json",
      [](const std::string& config_json) {
        const Config config = parse_config(config_json);
        const ProblemSpec spec = make_problem(config, config.refinements);
        const RunReport run = march(spec, resolve_probes(config));
        json out{{"command", "solve"},
                 {"config", config_to_json(config)},
                 {"runs", json::array({report_to_json(run)})}};
        return out.dump();
      },
      py::arg("config_json"),
      "Single run at config.refinements; returns the report as a JSON "
      "string.");

  m.def(
      "convergence_json",
      [](const std::string& config_json) {
        const Config config = parse_config(config_json);
        if (config.r_min > config.r_max)
          throw std::invalid_argument("convergence: r_min > r_max");
        json runs = json::array();
        for (int r = config.r_min; r <= config.r_max; ++r) {
          const ProblemSpec spec = make_problem(config, r);
          json jr = report_to_json(march(spec));
          jr["refinement"] = r;
          runs.push_back(std::move(jr));
        }
        json out{{"command", "convergence"},
                 {"config", config_to_json(config)},
                 {"runs", std::move(runs)}};
        return out.dump();
      },
      py::arg("config_json"),
      "Refinement study over r_min..r_max; returns the report as a JSON "
      "string.");
}
