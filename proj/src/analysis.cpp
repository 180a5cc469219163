#include "mollescore/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include "json.hpp"

#include "mollescore/rng.hpp"
#include "mollescore/threads.hpp"

namespace mollescore {

// ---------------------------------------------------------------------------
// Jacobi eigensolver

JacobiEigen jacobi_eigen(const Matrix& sym, int max_sweeps, double tol) {
  const int d = static_cast<int>(sym.rows());
  if (sym.cols() != d) throw config_error("jacobi needs a square matrix");
  if (!sym.isApprox(sym.transpose(), 1e-10))
    throw config_error("jacobi needs a symmetric matrix");

  Matrix a = sym;
  Matrix v = Matrix::Identity(d, d);
  const double scale = std::max(1e-300, sym.norm());

  auto off_norm = [&]() {
    double s = 0;
    for (int p = 0; p < d; ++p)
      for (int q = p + 1; q < d; ++q) s += 2.0 * a(p, q) * a(p, q);
    return std::sqrt(s);
  };

  int sweep = 0;
  for (; sweep < max_sweeps && off_norm() > tol * scale; ++sweep) {
    for (int p = 0; p < d - 1; ++p)
      for (int q = p + 1; q < d; ++q) {
        double apq = a(p, q);
        if (apq == 0.0) continue;
        double theta = 0.5 * (a(q, q) - a(p, p)) / apq;
        double t = (theta >= 0 ? 1.0 : -1.0) /
                   (std::abs(theta) + std::sqrt(1.0 + theta * theta));
        double c = 1.0 / std::sqrt(1.0 + t * t);
        double s = t * c;
        for (int i = 0; i < d; ++i) {
          double aip = a(i, p), aiq = a(i, q);
          a(i, p) = c * aip - s * aiq;
          a(i, q) = s * aip + c * aiq;
        }
        for (int i = 0; i < d; ++i) {
          double api = a(p, i), aqi = a(q, i);
          a(p, i) = c * api - s * aqi;
          a(q, i) = s * api + c * aqi;
        }
        for (int i = 0; i < d; ++i) {
          double vip = v(i, p), viq = v(i, q);
          v(i, p) = c * vip - s * viq;
          v(i, q) = s * vip + c * viq;
        }
      }
  }
  if (off_norm() > tol * scale * 10)
    throw numerical_error("jacobi rotations failed to converge");

  std::vector<int> order(d);
  for (int i = 0; i < d; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](int i, int j) { return a(i, i) > a(j, j); });
  JacobiEigen out;
  out.values.resize(d);
  out.vectors.resize(d, d);
  for (int i = 0; i < d; ++i) {
    out.values[i] = a(order[i], order[i]);
    Vector col = v.col(order[i]);
    // deterministic sign: largest-magnitude component positive
    int imax = 0;
    col.cwiseAbs().maxCoeff(&imax);
    if (col[imax] < 0) col = -col;
    out.vectors.col(i) = col;
  }
  return out;
}

PcaReport local_pca(const LocalCovariance& lc) {
  JacobiEigen je = jacobi_eigen(lc.sigma_hat);
  PcaReport r;
  r.eigenvalues = je.values;
  r.eigenvectors = je.vectors;
  r.t = lc.t;
  r.x = lc.x;
  r.ess = lc.ess;
  r.low_ess_warning = lc.low_ess_warning;
  return r;
}

PcaReport local_pca(const Dataset& ds, double t, const Vector& x) {
  return local_pca(local_sigma(ds, t, x));
}

IntrinsicDimReport intrinsic_dim(const Dataset& ds, const Vector& x,
                                 const std::vector<double>& t_values) {
  if (t_values.size() < 4)
    throw config_error("intrinsic_dim needs at least 4 values of t");
  auto [lo, hi] = std::minmax_element(t_values.begin(), t_values.end());
  if (std::log10(*hi / *lo) < 1.5)
    throw config_error("intrinsic_dim needs t spanning >= 1.5 decades");

  IntrinsicDimReport rep;
  rep.t_values = t_values;
  for (double t : t_values) {
    PcaReport pca = local_pca(ds, t, x);
    rep.lambda1.push_back(pca.eigenvalues[0]);
    rep.low_ess_warning = rep.low_ess_warning || pca.low_ess_warning;
  }
  // OLS slope of log lambda_1 vs log t
  const int m = static_cast<int>(t_values.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < m; ++i) {
    double lx = std::log(t_values[i]);
    double ly = std::log(rep.lambda1[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  rep.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  rep.k_hat = 2.0 * (1.0 - rep.slope);
  return rep;
}

// ---------------------------------------------------------------------------
// KL estimation

KlReport kl_estimate(const TargetSpec& spec, const ScoreField& field,
                     double t_n, double T, double dt, int q,
                     std::uint64_t seed, const KlOptions& opts) {
  if (q < 2) throw config_error("kl_estimate needs Q >= 2");
  if (!spec.has_smoothed_log_density())
    throw capability_error("target lacks smoothed_log_density");
  const int d = spec.ambient_dim();
  if (field.dim() != d)
    throw config_error("field dimension does not match target");

  Dataset x0 = sample_target(spec, q, derive_stream(seed, "kl/x0"));
  RngStream noise(derive_stream(seed, "kl/noise"));
  Matrix xs = x0.points;
  const double st = std::sqrt(t_n);
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < d; ++j) xs(i, j) += st * noise.normal();

  double r_max = opts.r_max;
  if (r_max <= 0) r_max = 10.0 * std::sqrt(d) * std::sqrt(T / t_n);

  std::vector<FlowResult> flows = flow_log_density_batch(
      field, t_n, T, dt, xs, r_max, opts.threads);

  double mean = 0, m2 = 0;
  int kept = 0;
  for (int i = 0; i < q; ++i) {
    if (flows[i].escaped) continue;
    double term = smoothed_log_density(spec, t_n, xs.row(i).transpose()) -
                  flows[i].log_density;
    ++kept;
    double delta = term - mean;
    mean += delta / kept;
    m2 += delta * (term - mean);
  }
  if (kept < 2) throw numerical_error("kl_estimate lost almost all samples");

  KlReport rep;
  rep.kl = mean;
  rep.std_error = std::sqrt(m2 / (kept - 1) / kept);
  rep.q_total = q;
  rep.q_dropped = q - kept;
  rep.t_n = t_n;
  rep.score_label = field.label();
  rep.bias_warning = rep.q_dropped > 0.01 * q;
  if (rep.bias_warning)
    log_info(strf("kl_estimate dropped %d/%d flow samples; estimate biased",
                  rep.q_dropped, q));
  return rep;
}

// ---------------------------------------------------------------------------
// Effective dataset size

namespace {

double mean_kl_empirical(const TargetSpec& spec, int n_prime, double t_n,
                         double T, double dt, int q, int replicates,
                         std::uint64_t seed, const KlOptions& kl) {
  double acc = 0;
  for (int r = 0; r < replicates; ++r) {
    Dataset ds = sample_target(
        spec, n_prime, derive_stream(derive_stream(seed, "neff/emp"), r,
                                     static_cast<std::uint64_t>(n_prime)));
    EmpiricalField field(std::move(ds));
    KlReport rep = kl_estimate(spec, field, t_n, T, dt, q,
                               derive_stream(derive_stream(seed, "neff/klq"), static_cast<std::uint64_t>(r)), kl);
    acc += rep.kl;
  }
  return acc / replicates;
}

}  // namespace

NeffResult n_eff(const TargetSpec& spec, int n, double t_n,
                 const MollifySpec& mollify, double T, double dt, int q,
                 int replicates, std::uint64_t seed, const NeffOptions& opts) {
  if (replicates < 1) throw config_error("n_eff needs replicates >= 1");
  NeffResult out;

  double kl_moll = 0;
  for (int r = 0; r < replicates; ++r) {
    Dataset ds = sample_target(spec, n,
                               derive_stream(derive_stream(seed, "neff/moll"),
                                             static_cast<std::uint64_t>(r)));
    MollifiedField field(std::move(ds), mollify,
                         derive_stream(derive_stream(seed, "neff/mollnoise"), static_cast<std::uint64_t>(r)));
    KlReport rep = kl_estimate(spec, field, t_n, T, dt, q,
                               derive_stream(derive_stream(seed, "neff/klq"), static_cast<std::uint64_t>(r)), opts.kl);
    kl_moll += rep.kl;
  }
  kl_moll /= replicates;
  out.kl_mollified = kl_moll;

  auto probe = [&](int n_prime) {
    double v = mean_kl_empirical(spec, n_prime, t_n, T, dt, q, replicates,
                                 seed, opts.kl);
    out.probes.emplace_back(n_prime, v);
    log_info(strf("n_eff probe N'=%d: mean KL %.4f (target %.4f)", n_prime, v,
                  kl_moll));
    return v;
  };

  const int n_cap = n * opts.bracket_factor;
  int lo = n;
  double kl_lo = probe(n);
  if (kl_lo <= kl_moll) {
    // mollification is no better than the raw empirical score here
    out.n_eff = n;
    return out;
  }
  int hi = lo;
  double kl_hi = kl_lo;
  int probes_used = 1;
  while (kl_hi > kl_moll && hi < n_cap && probes_used < opts.max_probes) {
    lo = hi;
    kl_lo = kl_hi;
    hi = std::min(n_cap, hi * 2);
    kl_hi = probe(hi);
    ++probes_used;
  }
  if (kl_hi > kl_moll) {
    out.crossed = false;
    out.n_eff = hi;
    log_info("n_eff: no crossing inside the bracket; returning the edge");
    return out;
  }

  // one log-bisection refinement when the budget allows
  if (probes_used < opts.max_probes && hi > lo + 1) {
    int mid = static_cast<int>(std::lround(std::sqrt(double(lo) * hi)));
    if (mid > lo && mid < hi) {
      double kl_mid = probe(mid);
      if (kl_mid > kl_moll) {
        lo = mid;
        kl_lo = kl_mid;
      } else {
        hi = mid;
        kl_hi = kl_mid;
      }
    }
  }

  // log-linear interpolation across the crossing
  double llo = std::log(double(lo)), lhi = std::log(double(hi));
  double frac = (kl_lo - kl_moll) / std::max(1e-300, kl_lo - kl_hi);
  frac = std::clamp(frac, 0.0, 1.0);
  out.n_eff = std::exp(llo + frac * (lhi - llo));
  return out;
}

// ---------------------------------------------------------------------------
// Bias-variance

BiasVarianceReport bias_variance(const TargetSpec& spec, int n, double t,
                                 double h, const Vector& x, int replicates,
                                 int mc_samples, std::uint64_t seed) {
  if (!spec.has_oracle_m())
    throw capability_error("bias_variance needs an oracle m");
  if (replicates < 2) throw config_error("bias_variance needs replicates >= 2");
  if (mc_samples < 2 || mc_samples % 2 != 0)
    throw config_error("bias_variance needs an even mc_samples >= 2");
  const int d = spec.ambient_dim();
  const double sh = std::sqrt(h);

  // frozen antithetic z-stream shared by the oracle and every replicate
  Matrix qs(mc_samples, d);
  {
    RngStream rng(derive_stream(seed, "biasvar/z"));
    Vector z(d);
    for (int p = 0; p < mc_samples / 2; ++p) {
      for (int k = 0; k < d; ++k) z[k] = rng.normal();
      qs.row(2 * p) = (x + sh * z).transpose();
      qs.row(2 * p + 1) = (x - sh * z).transpose();
    }
  }

  // mollified oracle mean and its pairwise MC spread
  Vector m_oracle = Vector::Zero(d);
  Matrix pair_means(mc_samples / 2, d);
  for (int p = 0; p < mc_samples / 2; ++p) {
    Vector a = oracle_m(spec, t, qs.row(2 * p).transpose());
    Vector b = oracle_m(spec, t, qs.row(2 * p + 1).transpose());
    pair_means.row(p) = 0.5 * (a + b).transpose();
    m_oracle += (pair_means.row(p).transpose() - m_oracle) / (p + 1);
  }
  const int npairs = mc_samples / 2;
  double pair_var_trace = 0;  // tr Cov(pair means)
  for (int p = 0; p < npairs; ++p)
    pair_var_trace +=
        (pair_means.row(p).transpose() - m_oracle).squaredNorm();
  pair_var_trace /= std::max(1, npairs - 1);

  BiasVarianceReport rep;
  rep.replicates = replicates;
  rep.mc_samples = mc_samples;
  rep.b_hat = (m_oracle - oracle_m(spec, t, x)).squaredNorm();
  rep.b_se = pair_var_trace / npairs;  // E||MC noise||^2 under zero bias

  KernelWorkspace ws;
  double v = 0;
  for (int r = 0; r < replicates; ++r) {
    Dataset ds = sample_target(
        spec, n, derive_stream(derive_stream(seed, "biasvar/data"),
                               static_cast<std::uint64_t>(r)));
    Matrix m;
    kernel_stats(ds, t, qs, ws, &m, nullptr, nullptr);
    Vector m_rep = Vector::Zero(d);
    for (int j = 0; j < mc_samples; ++j)
      m_rep += (m.col(j) - m_rep) / (j + 1);
    v += ((m_rep - m_oracle).squaredNorm() - v) / (r + 1);
  }
  rep.v_hat = v;
  return rep;
}

// ---------------------------------------------------------------------------
// Memorization

double memorization_ratio(const Matrix& batch, const Dataset& train,
                          double threshold) {
  if (train.n() < 2)
    throw domain_error("memorization_ratio needs >= 2 training points");
  if (batch.cols() != train.dim())
    throw config_error("batch dimension does not match training set");
  const int nb = static_cast<int>(batch.rows());
  if (nb == 0) throw domain_error("memorization_ratio needs >= 1 sample");
  int memorized = 0;
  for (int i = 0; i < nb; ++i) {
    double d1 = std::numeric_limits<double>::infinity();
    double d2 = d1;
    for (int j = 0; j < train.n(); ++j) {
      double dist =
          (train.points.row(j) - batch.row(i)).squaredNorm();
      if (dist < d1) {
        d2 = d1;
        d1 = dist;
      } else if (dist < d2) {
        d2 = dist;
      }
    }
    d1 = std::sqrt(d1);
    d2 = std::sqrt(d2);
    double ratio = d2 > 0 ? d1 / d2 : 0.0;
    if (ratio < threshold) ++memorized;
  }
  return static_cast<double>(memorized) / nb;
}

void write_kl_report_json(const KlReport& r, const std::filesystem::path& p) {
  nlohmann::json j;
  j["kl"] = r.kl;
  j["std_error"] = r.std_error;
  j["q_total"] = r.q_total;
  j["q_dropped"] = r.q_dropped;
  j["t_n"] = r.t_n;
  j["score_label"] = r.score_label;
  j["bias_warning"] = r.bias_warning;
  std::ofstream out(p);
  if (!out) throw io_error("cannot write " + p.string());
  out << j.dump(2) << "\n";
}

}  // namespace mollescore
