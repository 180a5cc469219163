#include "mollescore/sampler.hpp"

#include <cmath>
#include <fstream>
#include "json.hpp"

#include "mollescore/csv.hpp"
#include "mollescore/rng.hpp"
#include "mollescore/threads.hpp"

namespace mollescore {

void SdeConfig::validate() const {
  if (!(t_n > 0) || !(T > t_n))
    throw config_error("SdeConfig needs 0 < t_n < T");
  if (n_samples < 1) throw config_error("SdeConfig needs n_samples >= 1");
  if (d < 1) throw config_error("SdeConfig needs d >= 1");
  if (geometric) {
    if (!(rho > 1.0)) throw config_error("geometric ladder needs rho > 1");
  } else if (!(dt > 0)) {
    throw config_error("SdeConfig needs dt > 0");
  }
}

std::vector<double> time_grid(const SdeConfig& cfg) {
  cfg.validate();
  std::vector<double> ts;
  if (cfg.geometric) {
    // ascending ladder t_n * rho^j capped at T, then reversed
    for (double t = cfg.t_n; t < cfg.T; t *= cfg.rho) ts.push_back(t);
    ts.push_back(cfg.T);
    std::reverse(ts.begin(), ts.end());
  } else {
    const double span = cfg.T - cfg.t_n;
    const int n_full = static_cast<int>(std::floor(span / cfg.dt + 1e-9));
    ts.reserve(n_full + 2);
    for (int j = 0; j <= n_full; ++j) ts.push_back(cfg.T - j * cfg.dt);
    if (ts.back() > cfg.t_n + 1e-12 * cfg.dt) ts.push_back(cfg.t_n);
    ts.back() = cfg.t_n;
  }
  return ts;
}

SampleBatch reverse_sde(const ScoreField& field, const SdeConfig& cfg,
                        int threads) {
  cfg.validate();
  if (field.dim() != cfg.d)
    throw config_error("field dimension does not match SdeConfig.d");
  const std::vector<double> ts = time_grid(cfg);
  const int n = cfg.n_samples;
  const int d = cfg.d;
  const std::uint64_t run_key = derive_stream(cfg.seed, "sde");

  Matrix y(n, d);
  std::vector<char> dead(n, 0);
  const double sqrtT = std::sqrt(cfg.T);

  const int chunk = 512;
  const int n_blocks = (n + chunk - 1) / chunk;

  // initial condition, step 0 of each trajectory stream
  parallel_for(n_blocks, threads, [&](int blk) {
    std::vector<double> z(d);
    for (int i = blk * chunk; i < std::min(n, (blk + 1) * chunk); ++i) {
      step_normals(derive_stream(run_key, static_cast<std::uint64_t>(i)), 0, d,
                   z.data());
      for (int k = 0; k < d; ++k) y(i, k) = sqrtT * z[k];
    }
  });

  std::atomic<int> rejected{0};
  parallel_for(n_blocks, threads, [&](int blk) {
    const int lo = blk * chunk, hi = std::min(n, (blk + 1) * chunk);
    const int nb = hi - lo;
    Matrix block = y.middleRows(lo, nb);
    Matrix scores;
    std::vector<double> z(d);
    std::vector<int> ids(nb);
    for (int i = 0; i < nb; ++i) ids[i] = lo + i;
    std::vector<std::uint64_t> keys(nb);
    for (int i = 0; i < nb; ++i)
      keys[i] = derive_stream(run_key, static_cast<std::uint64_t>(lo + i));

    for (size_t j = 0; j + 1 < ts.size(); ++j) {
      const double t = ts[j];
      const double dtau = ts[j] - ts[j + 1];
      const double sq = std::sqrt(dtau);
      EvalContext ctx;
      ctx.step_index = j;
      ctx.trajectory_ids = ids.data();
      field.eval_batch(t, block, &scores, nullptr, ctx);
      for (int i = 0; i < nb; ++i) {
        if (dead[lo + i]) continue;
        step_normals(keys[i], j + 1, d, z.data());
        for (int k = 0; k < d; ++k)
          block(i, k) += scores(i, k) * dtau + sq * z[k];
        if (!block.row(i).allFinite()) {
          dead[lo + i] = 1;
          block.row(i).setZero();
          rejected.fetch_add(1);
        }
      }
    }
    y.middleRows(lo, nb) = block;
  });

  SampleBatch out;
  out.config = cfg;
  out.score_label = field.label();
  out.rejected = rejected.load();
  out.points.resize(n - out.rejected, d);
  int r = 0;
  for (int i = 0; i < n; ++i)
    if (!dead[i]) out.points.row(r++) = y.row(i);
  if (out.rejected > 0)
    log_info(strf("reverse_sde dropped %d/%d trajectories (non-finite)",
                  out.rejected, n));
  return out;
}

// ---------------------------------------------------------------------------

namespace {

// ascending times t_n -> T with uniform steps of at most dt
std::vector<double> flow_grid(double t_n, double T, double dt) {
  if (!(t_n > 0) || !(T > t_n) || !(dt > 0))
    throw config_error("flow needs 0 < t_n < T and dt > 0");
  std::vector<double> ts;
  const double span = T - t_n;
  const int n_full = static_cast<int>(std::floor(span / dt + 1e-9));
  ts.reserve(n_full + 2);
  for (int j = 0; j <= n_full; ++j) ts.push_back(t_n + j * dt);
  if (ts.back() < T - 1e-12 * dt) ts.push_back(T);
  ts.back() = T;
  return ts;
}

}  // namespace

std::vector<FlowResult> flow_log_density_batch(const ScoreField& field,
                                               double t_n, double T, double dt,
                                               const Matrix& xs, double r_max,
                                               int threads) {
  const int q = static_cast<int>(xs.rows());
  const int d = static_cast<int>(xs.cols());
  if (field.dim() != d)
    throw config_error("field dimension does not match flow points");
  if (r_max <= 0) r_max = default_r_max(T, d);
  const std::vector<double> ts = flow_grid(t_n, T, dt);
  std::vector<FlowResult> results(q);

  const int chunk = 256;
  const int n_blocks = (q + chunk - 1) / chunk;
  const double r2 = r_max * r_max;

  parallel_for(n_blocks, threads, [&](int blk) {
    const int lo = blk * chunk, hi = std::min(q, (blk + 1) * chunk);
    const int nb = hi - lo;
    Matrix x = xs.middleRows(lo, nb);
    Vector acc = Vector::Zero(nb);  // (1/2) int div dt
    std::vector<char> out_of_range(nb, 0);
    Matrix s1, s2, xp;
    Vector div1, div2;
    std::vector<int> ids(nb);
    for (int i = 0; i < nb; ++i) ids[i] = lo + i;

    for (size_t j = 0; j + 1 < ts.size(); ++j) {
      const double t0 = ts[j], t1 = ts[j + 1];
      const double step = t1 - t0;
      EvalContext c1{2 * j, ids.data()};
      field.eval_batch(t0, x, &s1, &div1, c1);
      xp = x - (0.5 * step) * s1;
      EvalContext c2{2 * j + 1, ids.data()};
      field.eval_batch(t1, xp, &s2, &div2, c2);
      x -= (0.25 * step) * (s1 + s2);
      acc += (0.25 * step) * (div1 + div2);
      for (int i = 0; i < nb; ++i) {
        if (out_of_range[i]) continue;
        double n2 = x.row(i).squaredNorm();
        if (!(n2 <= r2) || !std::isfinite(acc[i])) {
          out_of_range[i] = 1;
          x.row(i).setZero();
        }
      }
    }
    for (int i = 0; i < nb; ++i) {
      FlowResult& r = results[lo + i];
      if (out_of_range[i]) {
        r.escaped = true;
        r.log_density = -std::numeric_limits<double>::infinity();
      } else {
        double lqT = -0.5 * d * std::log(2.0 * M_PI * T) -
                     x.row(i).squaredNorm() / (2.0 * T);
        r.log_density = lqT - acc[i];
      }
    }
  });
  return results;
}

FlowResult flow_log_density(const ScoreField& field, double t_n, double T,
                            double dt, const Vector& x, double r_max) {
  auto res =
      flow_log_density_batch(field, t_n, T, dt, x.transpose(), r_max, 1);
  if (res[0].escaped)
    throw numerical_error(
        "flow trajectory escaped the evaluation radius; density invalid");
  return res[0];
}

// ---------------------------------------------------------------------------

void save_batch(const SampleBatch& batch, const std::filesystem::path& csv,
                const std::filesystem::path& meta_json) {
  {
    CsvWriter w(csv);
    const int d = static_cast<int>(batch.points.cols());
    std::vector<std::string> names(d);
    for (int j = 0; j < d; ++j) names[j] = "x" + std::to_string(j);
    w.header(names);
    std::vector<double> row(d);
    for (int i = 0; i < batch.points.rows(); ++i) {
      for (int j = 0; j < d; ++j) row[j] = batch.points(i, j);
      w.row(row);
    }
  }
  nlohmann::json meta;
  meta["score_label"] = batch.score_label;
  meta["rejected"] = batch.rejected;
  meta["config"] = {{"T", batch.config.T},
                    {"dt", batch.config.dt},
                    {"t_n", batch.config.t_n},
                    {"n_samples", batch.config.n_samples},
                    {"seed", batch.config.seed},
                    {"d", batch.config.d},
                    {"geometric", batch.config.geometric},
                    {"rho", batch.config.rho}};
  std::ofstream out(meta_json);
  if (!out) throw io_error("cannot write " + meta_json.string());
  out << meta.dump(2) << "\n";
}

}  // namespace mollescore
