#include "mollescore/scorefield.hpp"

#include <cmath>

#include "mollescore/rng.hpp"

namespace mollescore {

Vector ScoreField::score(double t, const Vector& x) const {
  Matrix s;
  eval_batch(t, x.transpose(), &s, nullptr, EvalContext{});
  return s.col(0);
}

double ScoreField::divergence(double t, const Vector& x) const {
  Vector div;
  eval_batch(t, x.transpose(), nullptr, &div, EvalContext{});
  return div[0];
}

// ---------------------------------------------------------------------------

EmpiricalField::EmpiricalField(Dataset ds) : ds_(std::move(ds)) {
  if (ds_.sq_norms.size() != ds_.n()) ds_.finalize();
}

std::string EmpiricalField::label() const {
  return strf("empirical(N=%d)", ds_.n());
}

void EmpiricalField::eval_batch(double t, const Matrix& queries,
                                Matrix* score_out, Vector* div_out,
                                const EvalContext&) const {
  const int b = static_cast<int>(queries.rows());
  const int d = ds_.dim();
  thread_local KernelWorkspace ws;
  Matrix m;
  Vector tr;
  kernel_stats(ds_, t, queries, ws, &m, div_out ? &tr : nullptr, nullptr);
  if (score_out) {
    score_out->resize(b, d);
    *score_out = (m.transpose() - queries) / t;
  }
  if (div_out) {
    div_out->resize(b);
    *div_out = (tr.array() / (t * t)) - d / t;
  }
}

// ---------------------------------------------------------------------------

MollifiedField::MollifiedField(Dataset ds, MollifySpec spec, std::uint64_t seed)
    : ds_(std::move(ds)), spec_(spec), seed_(seed) {
  spec_.validate();
  if (ds_.sq_norms.size() != ds_.n()) ds_.finalize();
}

std::string MollifiedField::label() const {
  std::string mode =
      spec_.mode == MollifySpec::Mode::monte_carlo ? "mc" : "time_shift";
  if (spec_.scheduled)
    return strf("mollified(h=%gt^%g,%s)", spec_.c, spec_.beta, mode.c_str());
  return strf("mollified(h=%g,%s)", spec_.h, mode.c_str());
}

void MollifiedField::eval_batch(double t, const Matrix& queries,
                                Matrix* score_out, Vector* div_out,
                                const EvalContext& ctx) const {
  if (t <= 0) throw domain_error("mollified field needs t > 0");
  const int b = static_cast<int>(queries.rows());
  const int d = ds_.dim();
  const double h = resolve_bandwidth(spec_, t);
  thread_local KernelWorkspace ws;

  if (score_out) score_out->resize(b, d);
  if (div_out) div_out->resize(b);

  if (spec_.mode == MollifySpec::Mode::time_shift) {
    Matrix m;
    Vector tr;
    kernel_stats(ds_, t + h, queries, ws, &m, div_out ? &tr : nullptr,
                 nullptr);
    if (score_out) *score_out = (m.transpose() - queries) / t;
    if (div_out) *div_out = (tr.array() / (t * (t + h))) - d / t;
    return;
  }

  const int mc = spec_.mc_samples;
  const double sh = std::sqrt(h);
  // chunk rows so the (rows*M) x N scratch stays cache-sized
  const int chunk = std::max(1, 8192 / mc);
  Matrix pq, m;
  Vector tr;
  Vector z(d);
  for (int start = 0; start < b; start += chunk) {
    const int nb = std::min(chunk, b - start);
    pq.resize(nb * mc, d);
    for (int r = 0; r < nb; ++r) {
      const int row = start + r;
      const std::uint64_t traj =
          ctx.trajectory_ids ? ctx.trajectory_ids[row] : row;
      RngStream rng(mollify_stream(seed_, ctx.step_index, traj));
      if (spec_.antithetic) {
        for (int p = 0; p < mc / 2; ++p) {
          for (int k = 0; k < d; ++k) z[k] = rng.normal();
          pq.row(r * mc + 2 * p) = queries.row(row) + sh * z.transpose();
          pq.row(r * mc + 2 * p + 1) = queries.row(row) - sh * z.transpose();
        }
      } else {
        for (int j = 0; j < mc; ++j) {
          for (int k = 0; k < d; ++k) z[k] = rng.normal();
          pq.row(r * mc + j) = queries.row(row) + sh * z.transpose();
        }
      }
    }
    kernel_stats(ds_, t, pq, ws, &m, div_out ? &tr : nullptr, nullptr);
    for (int r = 0; r < nb; ++r) {
      const int row = start + r;
      Vector mm = Vector::Zero(d);
      double dv = 0;
      for (int j = 0; j < mc; ++j) {
        const int col = r * mc + j;
        mm += (m.col(col) - mm) / (j + 1);
        if (div_out)
          dv += ((-d / t + tr[col] / (t * t)) - dv) / (j + 1);
      }
      if (score_out)
        score_out->row(row) = (mm - queries.row(row).transpose()) / t;
      if (div_out) (*div_out)[row] = dv;
    }
  }
}

// ---------------------------------------------------------------------------

AnalyticField::AnalyticField(TargetSpec spec) : spec_(std::move(spec)) {
  if (!spec_.has_true_score())
    throw capability_error("no closed-form score for " + spec_.label());
}

std::string AnalyticField::label() const {
  return "analytic(" + spec_.label() + ")";
}

void AnalyticField::eval_batch(double t, const Matrix& queries,
                               Matrix* score_out, Vector* div_out,
                               const EvalContext&) const {
  const int b = static_cast<int>(queries.rows());
  if (score_out) score_out->resize(b, dim());
  if (div_out) div_out->resize(b);
  for (int i = 0; i < b; ++i) {
    Vector x = queries.row(i).transpose();
    if (score_out) score_out->row(i) = true_score(spec_, t, x).transpose();
    if (div_out) (*div_out)[i] = true_score_divergence(spec_, t, x);
  }
}

// ---------------------------------------------------------------------------

SpectralScoreField::SpectralScoreField(SpectralCoeffs coeffs, double h)
    : coeffs_(std::move(coeffs)), h_(h) {
  if (h_ < 0) throw config_error("spectral field needs h >= 0");
}

std::string SpectralScoreField::label() const {
  return strf("spectral(kmax=%d,h=%g)", coeffs_.kmax, h_);
}

int SpectralScoreField::dim() const { return coeffs_.d; }

void SpectralScoreField::eval_batch(double t, const Matrix& queries,
                                    Matrix* score_out, Vector* div_out,
                                    const EvalContext&) const {
  const int b = static_cast<int>(queries.rows());
  if (score_out) score_out->resize(b, dim());
  if (div_out) div_out->resize(b);
  for (int i = 0; i < b; ++i) {
    Vector x = queries.row(i).transpose();
    if (score_out)
      score_out->row(i) = spectral_score(coeffs_, t, x, h_).transpose();
    if (div_out) (*div_out)[i] = spectral_score_divergence(coeffs_, t, x, h_);
  }
}

}  // namespace mollescore
