#pragma once

#include <filesystem>

#include "mollescore/scorefield.hpp"

namespace mollescore {

// Reverse-diffusion run configuration. Uniform step by default; the
// geometric ladder t_n * rho^j is an opt-in for very small t_n.
struct SdeConfig {
  double T = 15.0;
  double dt = 1e-3;
  double t_n = 1e-2;
  int n_samples = 1;
  std::uint64_t seed = 0;
  int d = 1;
  bool geometric = false;
  double rho = 1.1;
  void validate() const;
};

struct SampleBatch {
  Matrix points;  // survivors x d
  SdeConfig config;
  std::string score_label;
  int rejected = 0;  // trajectories dropped on NaN/Inf
};

// Euler-Maruyama for dY = s_{T-tau}(Y) dtau + dB, Y_0 ~ N(0, T Id), run to
// diffusion time t_n. Per-trajectory RNG streams; identical results for any
// thread count.
SampleBatch reverse_sde(const ScoreField& field, const SdeConfig& cfg,
                        int threads = 1);

// Probability-flow log density: integrates dx/dt = -s_t(x)/2 from t_n to T
// with Heun steps, accumulating (1/2) int div s dt on the same stages, and
// anchors at log N(x_T; 0, T Id).
struct FlowResult {
  double log_density = 0;
  bool escaped = false;
};

inline double default_r_max(double T, int d) {
  return 10.0 * std::sqrt(T * static_cast<double>(d));
}

FlowResult flow_log_density(const ScoreField& field, double t_n, double T,
                            double dt, const Vector& x, double r_max = -1);

std::vector<FlowResult> flow_log_density_batch(const ScoreField& field,
                                               double t_n, double T, double dt,
                                               const Matrix& xs,
                                               double r_max = -1,
                                               int threads = 1);

// descending diffusion times from T to t_n (first entry T, last t_n)
std::vector<double> time_grid(const SdeConfig& cfg);

void save_batch(const SampleBatch& batch, const std::filesystem::path& csv,
                const std::filesystem::path& meta_json);

}  // namespace mollescore
