#pragma once

#include "mollescore/dataset.hpp"

namespace mollescore {

// Gibbs weights w_i proportional to exp(-||x - x_i||^2 / 2t).
struct SoftmaxWeights {
  Vector log_weights;    // raw -||x - x_i||^2 / 2t
  Vector weights;        // normalized, sums to 1
  double log_normalizer;  // log sum_i exp(log_weights[i])
};

// Fused kernel statistics for a block of query points. All empirical-score
// evaluations funnel through here so scalar and batched callers share one
// arithmetic path. Distances use the cached-norms expansion
// ||x||^2 - 2 x.x_i + ||x_i||^2 clipped at zero.
struct KernelWorkspace {
  Matrix logw;  // N x B scratch
  Vector qsq, colmax, wsum;
};

// Outputs per query column j:
//   m_out(:,j)      weighted mean (d x B)
//   trace_out[j]    trace of the weighted covariance (clipped at 0)
//   log_norm_out[j] log sum_i exp(-dist^2/2t)   (no 1/N, no Gaussian constant)
void kernel_stats(const Dataset& ds, double t, const Matrix& queries /*B x d*/,
                  KernelWorkspace& ws, Matrix* m_out, Vector* trace_out,
                  Vector* log_norm_out);

SoftmaxWeights weights(const Dataset& ds, double t, const Vector& x);

// m^N_t(x) = sum_i w_i x_i, the posterior mean under the empirical measure.
Vector m_emp(const Dataset& ds, double t, const Vector& x);

// s^N_t(x) = -(x - m^N_t(x)) / t
Vector score_emp(const Dataset& ds, double t, const Vector& x);

// sum_i w_i (x_i - m)(x_i - m)^T
Matrix weighted_cov(const Dataset& ds, double t, const Vector& x);

// grad s^N_t(x) = -Id/t + weighted_cov/t^2
Matrix score_jacobian_emp(const Dataset& ds, double t, const Vector& x);

// trace of the Jacobian, computed as exactly that
double score_divergence_emp(const Dataset& ds, double t, const Vector& x);

// log p_t^N(x) = log[(1/N) sum_i G_t(x, x_i)]
double log_kde_density(const Dataset& ds, double t, const Vector& x);

// Plug-in CLT covariance
//   Sigma_hat = [(1/N) sum_i (x_i-m)(x_i-m)^T e^{-d_i^2/t}]
//             / [(1/N) sum_i e^{-d_i^2/2t}]^2
// evaluated with one shared log-sum-exp shift (the numerator kernel is the
// square of the half-bandwidth weight).
struct LocalCovariance {
  Matrix sigma_hat;
  double t = 0;
  Vector x;
  int n_points = 0;
  double ess = 0;            // 1 / sum w_i^2
  bool low_ess_warning = false;  // ess < 5: CLT unreliable here
};

LocalCovariance local_sigma(const Dataset& ds, double t, const Vector& x);

}  // namespace mollescore
