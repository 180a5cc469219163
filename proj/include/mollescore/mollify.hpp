#pragma once

#include "mollescore/score.hpp"

namespace mollescore {

// Gaussian mollification of the empirical conditional mean / score.
// monte_carlo averages m_emp over x + sqrt(h) z with a frozen z-stream;
// time_shift evaluates m_emp at bandwidth t + h instead (valid when the
// kernel-sum denominator concentrates).
struct MollifySpec {
  enum class Mode { monte_carlo, time_shift };

  bool scheduled = false;  // h(t) = c * t^beta instead of fixed h
  double h = 0.0;
  double c = 1.0;
  double beta = 0.5;
  int mc_samples = 64;  // M; density/KL work wants 4096
  bool antithetic = true;
  Mode mode = Mode::monte_carlo;

  static MollifySpec fixed(double h, int mc_samples = 64,
                           Mode mode = Mode::monte_carlo);
  static MollifySpec schedule(double c, double beta, int mc_samples = 64,
                              Mode mode = Mode::monte_carlo);
  void validate() const;
};

double resolve_bandwidth(const MollifySpec& spec, double t);

// z-stream key for one evaluation site; step/trajectory indices keep SDE
// steps decorrelated while staying reproducible.
std::uint64_t mollify_stream(std::uint64_t seed, std::uint64_t step_index = 0,
                             std::uint64_t trajectory_id = 0);

Vector m_mollified(const Dataset& ds, double t, const Vector& x,
                   const MollifySpec& spec, std::uint64_t seed);

Vector score_mollified(const Dataset& ds, double t, const Vector& x,
                       const MollifySpec& spec, std::uint64_t seed);

double divergence_mollified(const Dataset& ds, double t, const Vector& x,
                            const MollifySpec& spec, std::uint64_t seed);

// Fused evaluation used by the samplers: mean, score and divergence from one
// pass over the perturbed queries.
struct MollifiedEval {
  Vector m;
  Vector score;
  double divergence;
};
MollifiedEval mollified_eval(const Dataset& ds, double t, const Vector& x,
                             const MollifySpec& spec, std::uint64_t stream_key,
                             KernelWorkspace& ws);

}  // namespace mollescore
