#pragma once

#include <string>

#include <json.hpp>

#include "stmg/driver.hpp"

namespace stmg {

/// Declarative run configuration (the JSON config file). A Config resolves
/// into a ProblemSpec per refinement via make_problem().
struct Config {
  std::string equation = "heat";   // heat | wave
  std::string scheme = "dg";       // dg | cgp
  std::string problem = "manufactured"; // manufactured | shm | zero
  int k = 1;
  int p = 1;
  int dim = 2;
  double t_final = 1.0;
  int base_cells = 2;
  int base_time_intervals = 1;
  int refinements = 2;   // used by solve/profile
  int r_min = 2;         // used by convergence
  int r_max = 4;
  int batch = 2;
  double frequency = 2.0;
  double shm_s = 0.3;
  double perturb = 0.0;
  double rho_random_lo = 0.0; // >0 enables per-coarse-cell random scaling
  double rho_random_hi = 0.0;
  std::uint64_t seed = 42;
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
  int max_iters = 1000;
  int restart = 100;
  int n_smooth = 1;
  bool precondition = true;
  int probe_samples_per_step = 16;
  std::vector<std::string> strategy; // empty = default ordering
  std::vector<Point> probes;         // empty + problem=shm => demo defaults
};

/// Parse from JSON text; unknown keys are rejected with their name.
Config parse_config(const std::string& json_text);

/// Apply a --set key=value override (dotted keys not needed: flat schema).
void apply_override(Config& config, const std::string& key,
                    const std::string& value);

/// Resolved config back to JSON (lossless round trip).
nlohmann::json config_to_json(const Config& config);

/// Build the callable problem description for one refinement level.
ProblemSpec make_problem(const Config& config, int refinement);

/// probe list with the demo defaults filled in
std::vector<Point> resolve_probes(const Config& config);

} // namespace stmg
