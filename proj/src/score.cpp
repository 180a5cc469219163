#include "mollescore/score.hpp"

#include <cmath>

namespace mollescore {

namespace {

void check_query(const Dataset& ds, double t, const Eigen::Index qdim) {
  if (t <= 0) throw domain_error("empirical score needs t > 0");
  if (qdim != ds.dim())
    throw config_error("query dimension does not match dataset");
  if (ds.sq_norms.size() != ds.n())
    throw config_error("dataset not finalized (missing cached norms)");
}

}  // namespace

namespace {

// fused per-column pass for small ambient dimensions: distances, clip,
// column max and the exp/reduction stage all on one cache-hot buffer
template <int D>
void kernel_stats_fused(const Dataset& ds, double t, const Matrix& queries,
                        KernelWorkspace& ws, Matrix* m_out, Vector* trace_out,
                        Vector* log_norm_out) {
  using ArrayMap = Eigen::Map<const Eigen::ArrayXd>;
  const int n = ds.n();
  const int b = static_cast<int>(queries.rows());
  const double inv2t = 1.0 / (2.0 * t);
  ws.logw.resize(n, 1);
  Eigen::Map<Eigen::ArrayXd> w(ws.logw.data(), n);
  ArrayMap sqn(ds.sq_norms.data(), n);
  const double* col[D];
  for (int k = 0; k < D; ++k) col[k] = ds.points.col(k).data();
  if (trace_out && !m_out)
    throw config_error("trace output requires the mean output");
  if (m_out) m_out->resize(D, b);
  if (trace_out) trace_out->resize(b);
  if (log_norm_out) log_norm_out->resize(b);

  for (int j = 0; j < b; ++j) {
    double q[D];
    double qs = 0;
    for (int k = 0; k < D; ++k) {
      q[k] = queries(j, k);
      qs += q[k] * q[k];
    }
    if constexpr (D == 1) {
      w = sqn - 2.0 * q[0] * ArrayMap(col[0], n) + qs;
    } else if constexpr (D == 2) {
      w = sqn -
          2.0 * (q[0] * ArrayMap(col[0], n) + q[1] * ArrayMap(col[1], n)) +
          qs;
    } else if constexpr (D == 3) {
      w = sqn -
          2.0 * (q[0] * ArrayMap(col[0], n) + q[1] * ArrayMap(col[1], n) +
                 q[2] * ArrayMap(col[2], n)) +
          qs;
    } else {
      w = sqn -
          2.0 * (q[0] * ArrayMap(col[0], n) + q[1] * ArrayMap(col[1], n) +
                 q[2] * ArrayMap(col[2], n) + q[3] * ArrayMap(col[3], n)) +
          qs;
    }
    w = -w.max(0.0) * inv2t;
    double mx = w.maxCoeff();
    w = (w - mx).exp();
    double sum = w.sum();
    if (log_norm_out) (*log_norm_out)[j] = mx + std::log(sum);
    if (m_out) {
      double msq = 0;
      for (int k = 0; k < D; ++k) {
        double mk = (w * ArrayMap(col[k], n)).sum() / sum;
        (*m_out)(k, j) = mk;
        msq += mk * mk;
      }
      if (trace_out) {
        double second = (w * sqn).sum() / sum;
        double tr = second - msq;
        (*trace_out)[j] = tr > 0.0 ? tr : 0.0;
      }
    }
  }
}

}  // namespace

void kernel_stats(const Dataset& ds, double t, const Matrix& queries,
                  KernelWorkspace& ws, Matrix* m_out, Vector* trace_out,
                  Vector* log_norm_out) {
  check_query(ds, t, queries.cols());
  const int n = ds.n();
  const int d = ds.dim();
  const int b = static_cast<int>(queries.rows());
  const double inv2t = 1.0 / (2.0 * t);

  switch (d) {
    case 1:
      return kernel_stats_fused<1>(ds, t, queries, ws, m_out, trace_out,
                                   log_norm_out);
    case 2:
      return kernel_stats_fused<2>(ds, t, queries, ws, m_out, trace_out,
                                   log_norm_out);
    case 3:
      return kernel_stats_fused<3>(ds, t, queries, ws, m_out, trace_out,
                                   log_norm_out);
    case 4:
      return kernel_stats_fused<4>(ds, t, queries, ws, m_out, trace_out,
                                   log_norm_out);
    default:
      break;
  }

  ws.logw.resize(n, b);
  ws.qsq = queries.rowwise().squaredNorm();

  // logw(i,j) = -(||x_i||^2 - 2 <x_i, q_j> + ||q_j||^2) / 2t, clipped at 0.
  // Cross terms accumulate coordinate by coordinate in fixed order.
  ws.logw.noalias() = ds.points.col(0) * queries.col(0).transpose();
  for (int k = 1; k < d; ++k)
    ws.logw.noalias() += ds.points.col(k) * queries.col(k).transpose();
  for (int j = 0; j < b; ++j) {
    double qs = ws.qsq[j];
    ws.logw.col(j) = -(ds.sq_norms.array() - 2.0 * ws.logw.col(j).array() + qs)
                          .max(0.0) *
                     inv2t;
  }

  ws.colmax = ws.logw.colwise().maxCoeff();
  for (int j = 0; j < b; ++j)
    ws.logw.col(j) = (ws.logw.col(j).array() - ws.colmax[j]).exp();

  ws.wsum = ws.logw.colwise().sum();
  if (log_norm_out) {
    log_norm_out->resize(b);
    *log_norm_out = ws.wsum.array().log() + ws.colmax.array();
  }
  for (int j = 0; j < b; ++j) ws.logw.col(j) /= ws.wsum[j];

  if (m_out) {
    m_out->resize(d, b);
    m_out->noalias() = ds.points.transpose() * ws.logw;
  }
  if (trace_out) {
    trace_out->resize(b);
    // sum_i w_i ||x_i||^2 - ||m||^2, clipped at 0 (PSD)
    Vector second = ws.logw.transpose() * ds.sq_norms;
    if (!m_out)
      throw config_error("trace output requires the mean output");
    *trace_out =
        (second.array() - m_out->colwise().squaredNorm().transpose().array())
            .max(0.0);
  }
}

SoftmaxWeights weights(const Dataset& ds, double t, const Vector& x) {
  check_query(ds, t, x.size());
  const int n = ds.n();
  SoftmaxWeights sw;
  sw.log_weights.resize(n);
  const double inv2t = 1.0 / (2.0 * t);
  const double qs = x.squaredNorm();
  Vector cross = ds.points * x;
  sw.log_weights =
      -(ds.sq_norms.array() - 2.0 * cross.array() + qs).max(0.0) * inv2t;
  double mx = sw.log_weights.maxCoeff();
  Vector e = (sw.log_weights.array() - mx).exp();
  double s = e.sum();
  sw.log_normalizer = mx + std::log(s);
  sw.weights = e / s;
  return sw;
}

Vector m_emp(const Dataset& ds, double t, const Vector& x) {
  KernelWorkspace ws;
  Matrix m;
  kernel_stats(ds, t, x.transpose(), ws, &m, nullptr, nullptr);
  return m.col(0);
}

Vector score_emp(const Dataset& ds, double t, const Vector& x) {
  return -(x - m_emp(ds, t, x)) / t;
}

Matrix weighted_cov(const Dataset& ds, double t, const Vector& x) {
  SoftmaxWeights sw = weights(ds, t, x);
  const int d = ds.dim();
  Vector m = ds.points.transpose() * sw.weights;
  Matrix cov = Matrix::Zero(d, d);
  Vector dev(d);
  for (int i = 0; i < ds.n(); ++i) {
    dev = ds.points.row(i).transpose() - m;
    cov.noalias() += sw.weights[i] * dev * dev.transpose();
  }
  return cov;
}

Matrix score_jacobian_emp(const Dataset& ds, double t, const Vector& x) {
  Matrix jac = weighted_cov(ds, t, x) / (t * t);
  jac.diagonal().array() -= 1.0 / t;
  return jac;
}

double score_divergence_emp(const Dataset& ds, double t, const Vector& x) {
  return score_jacobian_emp(ds, t, x).trace();
}

double log_kde_density(const Dataset& ds, double t, const Vector& x) {
  SoftmaxWeights sw = weights(ds, t, x);
  const int d = ds.dim();
  return sw.log_normalizer - std::log(static_cast<double>(ds.n())) -
         0.5 * d * std::log(2.0 * M_PI * t);
}

LocalCovariance local_sigma(const Dataset& ds, double t, const Vector& x) {
  SoftmaxWeights sw = weights(ds, t, x);
  const int n = ds.n();
  const int d = ds.dim();
  const double shift = sw.log_weights.maxCoeff();

  // shared shift: numerator terms are exp(2(l_i - shift)), the denominator
  // is [mean exp(l_i - shift)]^2, so exp(2 shift) cancels.
  Vector e1 = (sw.log_weights.array() - shift).exp();
  Vector e2 = e1.array().square();

  Vector m = ds.points.transpose() * sw.weights;
  Matrix num = Matrix::Zero(d, d);
  Vector dev(d);
  for (int i = 0; i < n; ++i) {
    dev = ds.points.row(i).transpose() - m;
    num.noalias() += e2[i] * dev * dev.transpose();
  }
  num /= static_cast<double>(n);
  double den = e1.mean();

  LocalCovariance lc;
  lc.sigma_hat = num / (den * den);
  lc.t = t;
  lc.x = x;
  lc.n_points = n;
  lc.ess = 1.0 / sw.weights.squaredNorm();
  lc.low_ess_warning = lc.ess < 5.0;
  return lc;
}

}  // namespace mollescore
