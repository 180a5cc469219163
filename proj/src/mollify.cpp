#include "mollescore/mollify.hpp"

#include <cmath>

#include "mollescore/rng.hpp"

namespace mollescore {

MollifySpec MollifySpec::fixed(double h, int mc_samples, Mode mode) {
  MollifySpec s;
  s.scheduled = false;
  s.h = h;
  s.mc_samples = mc_samples;
  s.mode = mode;
  s.validate();
  return s;
}

MollifySpec MollifySpec::schedule(double c, double beta, int mc_samples,
                                  Mode mode) {
  MollifySpec s;
  s.scheduled = true;
  s.c = c;
  s.beta = beta;
  s.mc_samples = mc_samples;
  s.mode = mode;
  s.validate();
  return s;
}

void MollifySpec::validate() const {
  if (scheduled) {
    if (c <= 0) throw config_error("bandwidth schedule needs c > 0");
    if (beta <= 0 || beta >= 1)
      throw config_error("bandwidth schedule needs beta in (0,1)");
  } else if (h <= 0) {
    throw config_error("fixed bandwidth must be > 0");
  }
  if (mc_samples < 1) throw config_error("mc_samples must be >= 1");
  if (antithetic && mc_samples % 2 != 0)
    throw config_error("antithetic sampling needs an even mc_samples");
}

double resolve_bandwidth(const MollifySpec& spec, double t) {
  if (!spec.scheduled) return spec.h;
  if (t <= 0) throw domain_error("scheduled bandwidth needs t > 0");
  return spec.c * std::pow(t, spec.beta);
}

std::uint64_t mollify_stream(std::uint64_t seed, std::uint64_t step_index,
                             std::uint64_t trajectory_id) {
  return derive_stream(derive_stream(seed, "mollify"), step_index,
                       trajectory_id);
}

namespace {

// Perturbation block x + sqrt(h) z_j, antithetic pairs when enabled.
Matrix perturbed_queries(const Vector& x, double h, const MollifySpec& spec,
                         std::uint64_t stream_key) {
  const int d = static_cast<int>(x.size());
  const int m = spec.mc_samples;
  const double sh = std::sqrt(h);
  Matrix q(m, d);
  RngStream rng(stream_key);
  if (spec.antithetic) {
    Vector z(d);
    for (int p = 0; p < m / 2; ++p) {
      for (int k = 0; k < d; ++k) z[k] = rng.normal();
      q.row(2 * p) = (x + sh * z).transpose();
      q.row(2 * p + 1) = (x - sh * z).transpose();
    }
  } else {
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < d; ++k) q(j, k) = x[k] + sh * rng.normal();
  }
  return q;
}

// Running means keep constant sequences exact (single-atom datasets).
struct RunningMean {
  Vector m;
  double div = 0;
  int count = 0;
  void add(const Eigen::Ref<const Vector>& mi, double di) {
    ++count;
    if (count == 1) {
      m = mi;
      div = di;
    } else {
      m += (mi - m) / count;
      div += (di - div) / count;
    }
  }
};

}  // namespace

MollifiedEval mollified_eval(const Dataset& ds, double t, const Vector& x,
                             const MollifySpec& spec, std::uint64_t stream_key,
                             KernelWorkspace& ws) {
  spec.validate();
  if (t <= 0) throw domain_error("mollified score needs t > 0");
  const double h = resolve_bandwidth(spec, t);
  const int d = ds.dim();
  MollifiedEval out;

  if (spec.mode == MollifySpec::Mode::time_shift) {
    Matrix m;
    Vector tr;
    kernel_stats(ds, t + h, x.transpose(), ws, &m, &tr, nullptr);
    out.m = m.col(0);
    // d/dx [-(x - m_{t+h}(x))/t] with grad m_{t+h} = Cov_{t+h}/(t+h)
    out.divergence = -d / t + tr[0] / (t * (t + h));
  } else {
    Matrix q = perturbed_queries(x, h, spec, stream_key);
    Matrix m;
    Vector tr;
    kernel_stats(ds, t, q, ws, &m, &tr, nullptr);
    RunningMean rm;
    for (int j = 0; j < q.rows(); ++j)
      rm.add(m.col(j), -d / t + tr[j] / (t * t));
    out.m = rm.m;
    out.divergence = rm.div;
  }
  out.score = -(x - out.m) / t;
  return out;
}

Vector m_mollified(const Dataset& ds, double t, const Vector& x,
                   const MollifySpec& spec, std::uint64_t seed) {
  KernelWorkspace ws;
  return mollified_eval(ds, t, x, spec, mollify_stream(seed), ws).m;
}

Vector score_mollified(const Dataset& ds, double t, const Vector& x,
                       const MollifySpec& spec, std::uint64_t seed) {
  KernelWorkspace ws;
  return mollified_eval(ds, t, x, spec, mollify_stream(seed), ws).score;
}

double divergence_mollified(const Dataset& ds, double t, const Vector& x,
                            const MollifySpec& spec, std::uint64_t seed) {
  KernelWorkspace ws;
  return mollified_eval(ds, t, x, spec, mollify_stream(seed), ws).divergence;
}

}  // namespace mollescore
