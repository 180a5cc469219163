#pragma once

#include <filesystem>

#include "mollescore/sampler.hpp"
#include "mollescore/score.hpp"

namespace mollescore {

// Cyclic Jacobi rotations for symmetric matrices; off-diagonal Frobenius
// threshold 1e-12 relative to ||A||_F, at most 100 sweeps.
struct JacobiEigen {
  Vector values;   // descending
  Matrix vectors;  // orthonormal columns matching values
};
JacobiEigen jacobi_eigen(const Matrix& sym, int max_sweeps = 100,
                         double tol = 1e-12);

struct PcaReport {
  Vector eigenvalues;  // descending
  Matrix eigenvectors;
  double t = 0;
  Vector x;
  double ess = 0;
  bool low_ess_warning = false;
};

PcaReport local_pca(const Dataset& ds, double t, const Vector& x);
PcaReport local_pca(const LocalCovariance& lc);

// k_hat = 2 (1 - slope) from the OLS fit of log lambda_1 against log t.
struct IntrinsicDimReport {
  double k_hat = 0;
  double slope = 0;
  std::vector<double> t_values;
  std::vector<double> lambda1;
  bool low_ess_warning = false;
};

IntrinsicDimReport intrinsic_dim(const Dataset& ds, const Vector& x,
                                 const std::vector<double>& t_values);

// Plug-in Monte-Carlo estimate of KL(p_{t_n} || q_{t_n}): queries are
// X_0 + sqrt(t_n) xi with X_0 ~ p_*, densities are the target's smoothed
// log density against the probability-flow log density of `field`.
struct KlReport {
  double kl = 0;         // nats; negative values reported as-is
  double std_error = 0;
  int q_total = 0;
  int q_dropped = 0;     // flow escapes
  double t_n = 0;
  std::string score_label;
  bool bias_warning = false;  // > 1% dropped
};

struct KlOptions {
  double r_max = -1;  // <= 0: expansion-aware default 10 sqrt(d) sqrt(T/t_n)
  int threads = 1;
};

KlReport kl_estimate(const TargetSpec& spec, const ScoreField& field,
                     double t_n, double T, double dt, int q,
                     std::uint64_t seed, const KlOptions& opts = {});

// Smallest N' whose empirical-score KL matches the mollified baseline at
// dataset size N; doubling search within [N, 256 N] plus a 3-point
// log-linear interpolation at the crossing.
struct NeffResult {
  double n_eff = 0;
  bool crossed = true;  // false: bracket edge returned
  double kl_mollified = 0;
  std::vector<std::pair<double, double>> probes;  // (N', mean KL)
};

struct NeffOptions {
  int bracket_factor = 256;
  int max_probes = 12;
  KlOptions kl;
};

NeffResult n_eff(const TargetSpec& spec, int n, double t_n,
                 const MollifySpec& mollify, double T, double dt, int q,
                 int replicates, std::uint64_t seed,
                 const NeffOptions& opts = {});

// Dataset-resampled variance and bias of the mollified conditional mean at
// one (t, x), with common random numbers across replicates.
struct BiasVarianceReport {
  double v_hat = 0;
  double b_hat = 0;
  double b_se = 0;  // expected b_hat under zero bias (MC noise level)
  int replicates = 0;
  int mc_samples = 0;
};

BiasVarianceReport bias_variance(const TargetSpec& spec, int n, double t,
                                 double h, const Vector& x, int replicates,
                                 int mc_samples, std::uint64_t seed);

// Fraction of generated points whose nearest/second-nearest training
// distance ratio falls below the threshold. Brute force; ties keep the
// lowest index.
double memorization_ratio(const Matrix& batch, const Dataset& train,
                          double threshold = 1.0 / 3.0);

void write_kl_report_json(const KlReport& r, const std::filesystem::path& p);

}  // namespace mollescore
