#pragma once

#include <filesystem>
#include "json.hpp"
#include <set>
#include <string>

#include "mollescore/dataset.hpp"
#include "mollescore/mollify.hpp"
#include "mollescore/sampler.hpp"
#include "mollescore/scorefield.hpp"

namespace mollescore::cli {

using nlohmann::json;

struct CommonOpts {
  std::filesystem::path out = "out";
  std::uint64_t seed = 0;
  bool seed_overridden = false;
  int threads = 1;
  bool dry_run = false;
};

// strict schemas: unknown keys are configuration errors
void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& context);

double num(const json& obj, const std::string& key);
double num_or(const json& obj, const std::string& key, double fallback);
int integer(const json& obj, const std::string& key);
int int_or(const json& obj, const std::string& key, int fallback);
std::string str_or(const json& obj, const std::string& key,
                   const std::string& fallback);
std::vector<double> num_list(const json& obj, const std::string& key);

TargetSpec parse_target(const json& obj);
MollifySpec parse_mollify(const json& score_obj, double default_h);
SdeConfig parse_sde(const json& obj, std::uint64_t seed, int d);

// builds the score field named by score.backend over the given data/target
std::unique_ptr<ScoreField> parse_score_field(const json& score_obj,
                                              const Dataset& ds,
                                              const TargetSpec* target,
                                              std::uint64_t seed);

// dataset from {"dataset": path} | {"idx": {...}} | {"target": {...}, "n": n}
Dataset resolve_dataset(const json& cfg, std::uint64_t seed,
                        TargetSpec* target_out);

}  // namespace mollescore::cli
