#include "config.hpp"

#include "mollescore/rng.hpp"

namespace mollescore::cli {

void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& context) {
  if (!obj.is_object())
    throw config_error("expected an object for " + context);
  for (auto& [key, value] : obj.items()) {
    (void)value;
    if (!allowed.count(key))
      throw config_error("unknown key '" + key + "' in " + context);
  }
}

static const json& require(const json& obj, const std::string& key) {
  if (!obj.contains(key))
    throw config_error("missing required key '" + key + "'");
  return obj.at(key);
}

double num(const json& obj, const std::string& key) {
  const json& v = require(obj, key);
  if (!v.is_number()) throw config_error("'" + key + "' must be a number");
  return v.get<double>();
}

double num_or(const json& obj, const std::string& key, double fallback) {
  return obj.contains(key) ? num(obj, key) : fallback;
}

int integer(const json& obj, const std::string& key) {
  const json& v = require(obj, key);
  if (!v.is_number_integer())
    throw config_error("'" + key + "' must be an integer");
  return v.get<int>();
}

int int_or(const json& obj, const std::string& key, int fallback) {
  return obj.contains(key) ? integer(obj, key) : fallback;
}

std::string str_or(const json& obj, const std::string& key,
                   const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_string()) throw config_error("'" + key + "' must be a string");
  return v.get<std::string>();
}

std::vector<double> num_list(const json& obj, const std::string& key) {
  const json& v = require(obj, key);
  if (!v.is_array()) throw config_error("'" + key + "' must be an array");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number())
      throw config_error("'" + key + "' must hold numbers only");
    out.push_back(e.get<double>());
  }
  return out;
}

static Vector vec_of(const json& v, const std::string& key) {
  if (!v.is_array()) throw config_error("'" + key + "' must be an array");
  Vector out(v.size());
  for (size_t i = 0; i < v.size(); ++i) out[i] = v[i].get<double>();
  return out;
}

TargetSpec parse_target(const json& obj) {
  check_keys(obj,
             {"kind", "d", "radius", "x1", "x2", "k", "scale", "theta_nodes",
              "angular_nodes", "angular_monte_carlo"},
             "target");
  std::string kind = str_or(obj, "kind", "");
  TargetSpec spec;
  if (kind == "gaussian_iso") {
    spec = TargetSpec::gaussian(integer(obj, "d"));
  } else if (kind == "swiss_roll_2d") {
    spec = TargetSpec::swiss_roll();
  } else if (kind == "hypersphere") {
    spec = TargetSpec::sphere(integer(obj, "d"), num_or(obj, "radius", 1.0));
  } else if (kind == "two_point") {
    spec = TargetSpec::two_points(vec_of(require(obj, "x1"), "x1"),
                                  vec_of(require(obj, "x2"), "x2"));
  } else if (kind == "linear_subspace") {
    spec = TargetSpec::subspace(integer(obj, "k"), integer(obj, "d"),
                                num_or(obj, "scale", 1.0));
  } else {
    throw config_error("unknown target kind '" + kind + "'");
  }
  spec.theta_nodes = int_or(obj, "theta_nodes", spec.theta_nodes);
  spec.angular_nodes = int_or(obj, "angular_nodes", spec.angular_nodes);
  if (obj.contains("angular_monte_carlo"))
    spec.angular_monte_carlo = obj.at("angular_monte_carlo").get<bool>();
  return spec;
}

MollifySpec parse_mollify(const json& obj, double default_h) {
  MollifySpec spec;
  if (obj.contains("schedule")) {
    const json& s = obj.at("schedule");
    check_keys(s, {"c", "beta"}, "score.schedule");
    spec = MollifySpec::schedule(num(s, "c"), num(s, "beta"));
  } else {
    spec = MollifySpec::fixed(num_or(obj, "h", default_h));
  }
  spec.mc_samples = int_or(obj, "mc_samples", spec.mc_samples);
  if (obj.contains("antithetic"))
    spec.antithetic = obj.at("antithetic").get<bool>();
  std::string mode = str_or(obj, "mode", "monte_carlo");
  if (mode == "monte_carlo")
    spec.mode = MollifySpec::Mode::monte_carlo;
  else if (mode == "time_shift")
    spec.mode = MollifySpec::Mode::time_shift;
  else
    throw config_error("score.mode must be monte_carlo or time_shift");
  spec.validate();
  return spec;
}

SdeConfig parse_sde(const json& obj, std::uint64_t seed, int d) {
  check_keys(obj, {"T", "dt", "t_n", "n_samples", "geometric", "rho"}, "sde");
  SdeConfig cfg;
  cfg.T = num(obj, "T");
  cfg.t_n = num(obj, "t_n");
  cfg.dt = num_or(obj, "dt", cfg.t_n / 10.0);
  cfg.n_samples = integer(obj, "n_samples");
  if (obj.contains("geometric")) cfg.geometric = obj.at("geometric").get<bool>();
  cfg.rho = num_or(obj, "rho", cfg.rho);
  cfg.seed = seed;
  cfg.d = d;
  cfg.validate();
  return cfg;
}

std::unique_ptr<ScoreField> parse_score_field(const json& obj,
                                              const Dataset& ds,
                                              const TargetSpec* target,
                                              std::uint64_t seed) {
  check_keys(obj,
             {"backend", "h", "schedule", "mode", "mc_samples", "antithetic",
              "kmax", "cube_half"},
             "score");
  std::string backend = str_or(obj, "backend", "empirical");
  if (backend == "empirical") return std::make_unique<EmpiricalField>(ds);
  if (backend == "mollified")
    return std::make_unique<MollifiedField>(
        ds, parse_mollify(obj, 0.0), derive_stream(seed, "field/mollify"));
  if (backend == "analytic") {
    if (!target)
      throw config_error("analytic score needs a target, not a dataset file");
    return std::make_unique<AnalyticField>(*target);
  }
  if (backend == "spectral") {
    Dataset cube = rescale_to_cube(ds, num_or(obj, "cube_half", 0.5), nullptr);
    int kmax = int_or(obj, "kmax", 64);
    return std::make_unique<SpectralScoreField>(fit_coeffs(cube, kmax),
                                                num_or(obj, "h", 0.0));
  }
  throw config_error("unknown score backend '" + backend + "'");
}

Dataset resolve_dataset(const json& cfg, std::uint64_t seed,
                        TargetSpec* target_out) {
  const bool has_target = cfg.contains("target");
  const bool has_file = cfg.contains("dataset");
  const bool has_idx = cfg.contains("idx");
  if (has_target + has_file + has_idx != 1)
    throw config_error(
        "exactly one of 'target', 'dataset', 'idx' must be given");
  if (has_file) {
    return load_dataset(cfg.at("dataset").get<std::string>());
  }
  if (has_idx) {
    const json& ix = cfg.at("idx");
    check_keys(ix, {"images", "labels", "filter_label", "limit", "normalize"},
               "idx");
    std::optional<int> filter;
    if (ix.contains("filter_label")) filter = integer(ix, "filter_label");
    std::optional<int> limit;
    if (ix.contains("limit")) limit = integer(ix, "limit");
    bool normalize =
        ix.contains("normalize") ? ix.at("normalize").get<bool>() : true;
    std::optional<std::filesystem::path> labels;
    if (ix.contains("labels"))
      labels = ix.at("labels").get<std::string>();
    return load_idx(ix.at("images").get<std::string>(), filter, limit,
                    normalize, labels);
  }
  TargetSpec spec = parse_target(cfg.at("target"));
  if (target_out) *target_out = spec;
  int n = integer(cfg, "n_train");
  return sample_target(spec, n, derive_stream(seed, "cli/train"));
}

}  // namespace mollescore::cli
