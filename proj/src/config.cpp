#include "stmg/config.hpp"

#include <set>
#include <stdexcept>

namespace stmg {

namespace {

using nlohmann::json;

Config config_from_json(const json& j) {
  static const std::set<std::string> known{
      "equation",      "scheme",        "problem",
      "k",             "p",             "dim",
      "t_final",       "base_cells",    "base_time_intervals",
      "refinements",   "r_min",         "r_max",
      "batch",         "frequency",     "shm_s",
      "perturb",       "rho_random_lo", "rho_random_hi",
      "seed",          "abs_tol",       "rel_tol",
      "max_iters",     "restart",       "n_smooth",
      "precondition",  "probe_samples_per_step",
      "strategy",      "probes"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (known.find(it.key()) == known.end())
      throw std::invalid_argument("config: unknown key '" + it.key() + "'");
  Config c;
  auto get = [&j](const char* key, auto& field) {
    if (j.contains(key))
      j.at(key).get_to(field);
  };
  get("equation", c.equation);
  get("scheme", c.scheme);
  get("problem", c.problem);
  get("k", c.k);
  get("p", c.p);
  get("dim", c.dim);
  get("t_final", c.t_final);
  get("base_cells", c.base_cells);
  get("base_time_intervals", c.base_time_intervals);
  get("refinements", c.refinements);
  get("r_min", c.r_min);
  get("r_max", c.r_max);
  get("batch", c.batch);
  get("frequency", c.frequency);
  get("shm_s", c.shm_s);
  get("perturb", c.perturb);
  get("rho_random_lo", c.rho_random_lo);
  get("rho_random_hi", c.rho_random_hi);
  get("seed", c.seed);
  get("abs_tol", c.abs_tol);
  get("rel_tol", c.rel_tol);
  get("max_iters", c.max_iters);
  get("restart", c.restart);
  get("n_smooth", c.n_smooth);
  get("precondition", c.precondition);
  get("probe_samples_per_step", c.probe_samples_per_step);
  get("strategy", c.strategy);
  if (j.contains("probes")) {
    c.probes.clear();
    for (const auto& row : j.at("probes")) {
      if (!row.is_array() || row.size() > 3)
        throw std::invalid_argument("config: probe must be an array of <= 3 reals");
      Point x{0.0, 0.0, 0.0};
      for (std::size_t a = 0; a < row.size(); ++a)
        x[a] = row[a].get<double>();
      c.probes.push_back(x);
    }
  }
  const std::set<std::string> eq{"heat", "wave"};
  const std::set<std::string> sc{"dg", "cgp"};
  const std::set<std::string> pr{"manufactured", "shm", "zero"};
  if (!eq.count(c.equation))
    throw std::invalid_argument("config: equation must be heat|wave");
  if (!sc.count(c.scheme))
    throw std::invalid_argument("config: scheme must be dg|cgp");
  if (!pr.count(c.problem))
    throw std::invalid_argument("config: problem must be manufactured|shm|zero");
  return c;
}

} // namespace

Config parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: JSON parse error: ") +
                                e.what());
  }
  if (!j.is_object())
    throw std::invalid_argument("config: top level must be an object");
  return config_from_json(j);
}

nlohmann::json config_to_json(const Config& c) {
  json probes = json::array();
  for (const Point& x : c.probes)
    probes.push_back({x[0], x[1], x[2]});
  return json{{"equation", c.equation},
              {"scheme", c.scheme},
              {"problem", c.problem},
              {"k", c.k},
              {"p", c.p},
              {"dim", c.dim},
              {"t_final", c.t_final},
              {"base_cells", c.base_cells},
              {"base_time_intervals", c.base_time_intervals},
              {"refinements", c.refinements},
              {"r_min", c.r_min},
              {"r_max", c.r_max},
              {"batch", c.batch},
              {"frequency", c.frequency},
              {"shm_s", c.shm_s},
              {"perturb", c.perturb},
              {"rho_random_lo", c.rho_random_lo},
              {"rho_random_hi", c.rho_random_hi},
              {"seed", c.seed},
              {"abs_tol", c.abs_tol},
              {"rel_tol", c.rel_tol},
              {"max_iters", c.max_iters},
              {"restart", c.restart},
              {"n_smooth", c.n_smooth},
              {"precondition", c.precondition},
              {"probe_samples_per_step", c.probe_samples_per_step},
              {"strategy", c.strategy},
              {"probes", probes}};
}

void apply_override(Config& config, const std::string& key,
                    const std::string& value) {
  json j = config_to_json(config);
  if (!j.contains(key))
    throw std::invalid_argument("config: unknown override key '" + key + "'");
  json v;
  try {
    v = json::parse(value);
  } catch (const json::parse_error&) {
    v = value; // bare strings allowed without quotes
  }
  j[key] = v;
  try {
    config = config_from_json(j);
  } catch (const json::exception& e) {
    throw std::invalid_argument("config: bad value for '" + key +
                                "': " + e.what());
  }
}

std::vector<Point> resolve_probes(const Config& config) {
  if (!config.probes.empty())
    return config.probes;
  if (config.problem == "shm")
    return shm_default_probes();
  return {};
}

ProblemSpec make_problem(const Config& config, int refinement) {
  ProblemSpec spec;
  spec.equation = config.equation == "wave" ? Equation::Wave : Equation::Heat;
  spec.scheme = config.scheme == "cgp" ? TimeScheme::CGP : TimeScheme::DG;
  spec.k = config.k;
  spec.p = config.p;
  spec.dim = config.dim;
  spec.t_final = config.t_final;
  spec.base_cells = config.base_cells;
  spec.base_time_intervals = config.base_time_intervals;
  spec.refinements = refinement;
  spec.batch = config.batch;
  spec.perturb = config.perturb;
  spec.seed = config.seed;
  spec.abs_tol = config.abs_tol;
  spec.rel_tol = config.rel_tol;
  spec.max_iters = config.max_iters;
  spec.restart = config.restart;
  spec.n_smooth = config.n_smooth;
  spec.precondition = config.precondition;
  spec.probe_samples_per_step = config.probe_samples_per_step;
  for (const std::string& s : config.strategy) {
    if (s == "space-h")
      spec.strategy.push_back(Coarsening::SpaceH);
    else if (s == "space-p")
      spec.strategy.push_back(Coarsening::SpaceP);
    else if (s == "time-tau")
      spec.strategy.push_back(Coarsening::TimeTau);
    else if (s == "time-k")
      spec.strategy.push_back(Coarsening::TimeK);
    else
      throw std::invalid_argument("config: unknown coarsening '" + s + "'");
  }
  if (config.problem == "manufactured") {
    manufactured_problem(spec, config.frequency);
  } else if (config.problem == "shm") {
    if (spec.equation != Equation::Wave)
      throw std::invalid_argument("config: shm problem requires equation=wave");
    shm_problem(spec, config.shm_s);
    spec.t_final = config.t_final != 1.0 ? config.t_final : 2.0;
    if (config.base_cells != 2)
      spec.base_cells = config.base_cells;
    if (config.base_time_intervals != 1)
      spec.base_time_intervals = config.base_time_intervals;
  } else { // zero
    spec.source = [](const Point&, double) { return 0.0; };
    spec.initial_u = [](const Point&) { return 0.0; };
    spec.initial_v = [](const Point&) { return 0.0; };
  }
  if (config.rho_random_hi > config.rho_random_lo && config.rho_random_lo > 0.0) {
    const MeshHierarchy coarse =
        make_cartesian(spec.dim, spec.lo, spec.hi, spec.base_cells, 0);
    spec.rho = randomize_coefficient(spec.rho, coarse, config.rho_random_lo,
                                     config.rho_random_hi, config.seed);
  }
  return spec;
}

} // namespace stmg
