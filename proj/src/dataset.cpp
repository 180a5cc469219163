#include "mollescore/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <mutex>
#include "json.hpp"

#include "mollescore/csv.hpp"
#include "mollescore/rng.hpp"

namespace mollescore {

using nlohmann::json;

void Dataset::finalize() {
  if (points.rows() < 1 || points.cols() < 1)
    throw config_error("dataset needs N >= 1, d >= 1");
  if (!points.allFinite())
    throw numerical_error("dataset '" + name + "' has non-finite coordinates");
  if (intrinsic_dim && *intrinsic_dim > dim())
    throw config_error("intrinsic_dim exceeds ambient dimension");
  sq_norms = points.rowwise().squaredNorm();
}

Dataset make_dataset(Matrix points, std::string name) {
  Dataset ds;
  ds.points = std::move(points);
  ds.name = std::move(name);
  ds.finalize();
  return ds;
}

// ---------------------------------------------------------------------------
// TargetSpec

TargetSpec TargetSpec::gaussian(int d) {
  TargetSpec s;
  s.kind = Kind::gaussian_iso;
  s.d = d;
  s.validate();
  return s;
}

TargetSpec TargetSpec::swiss_roll() {
  TargetSpec s;
  s.kind = Kind::swiss_roll_2d;
  s.d = 2;
  return s;
}

TargetSpec TargetSpec::sphere(int d, double radius) {
  TargetSpec s;
  s.kind = Kind::hypersphere;
  s.d = d;
  s.radius = radius;
  s.validate();
  return s;
}

TargetSpec TargetSpec::two_points(const Vector& a, const Vector& b) {
  TargetSpec s;
  s.kind = Kind::two_point;
  s.x1 = a;
  s.x2 = b;
  s.d = static_cast<int>(a.size());
  s.validate();
  return s;
}

TargetSpec TargetSpec::two_points_1d(double a, double b) {
  Vector va(1), vb(1);
  va << a;
  vb << b;
  return two_points(va, vb);
}

TargetSpec TargetSpec::subspace(int k, int d, double scale) {
  TargetSpec s;
  s.kind = Kind::linear_subspace;
  s.k = k;
  s.d = d;
  s.subspace_scale = scale;
  s.validate();
  return s;
}

void TargetSpec::validate() const {
  if (d < 1) throw config_error("target dimension must be >= 1");
  switch (kind) {
    case Kind::hypersphere:
      if (d < 2) throw config_error("hypersphere needs d >= 2");
      if (radius <= 0) throw config_error("hypersphere radius must be > 0");
      break;
    case Kind::two_point:
      if (x1.size() != x2.size() || x1.size() == 0)
        throw config_error("two_point atoms must share a dimension");
      break;
    case Kind::linear_subspace:
      if (k < 1 || k > d)
        throw config_error("linear_subspace needs 1 <= k <= d");
      if (subspace_scale <= 0)
        throw config_error("linear_subspace scale must be > 0");
      break;
    default:
      break;
  }
}

int TargetSpec::ambient_dim() const {
  if (kind == Kind::two_point) return static_cast<int>(x1.size());
  return d;
}

std::optional<int> TargetSpec::known_intrinsic_dim() const {
  switch (kind) {
    case Kind::gaussian_iso:
      return d;
    case Kind::swiss_roll_2d:
      return 1;
    case Kind::hypersphere:
      return d - 1;
    case Kind::two_point:
      return 0;
    case Kind::linear_subspace:
      return k;
  }
  return std::nullopt;
}

bool TargetSpec::has_true_score() const {
  return kind == Kind::gaussian_iso || kind == Kind::two_point ||
         kind == Kind::linear_subspace;
}

bool TargetSpec::singular() const {
  switch (kind) {
    case Kind::gaussian_iso:
      return false;
    case Kind::linear_subspace:
      return k < d;
    default:
      return true;
  }
}

std::string TargetSpec::label() const {
  switch (kind) {
    case Kind::gaussian_iso:
      return strf("gaussian_iso(d=%d)", d);
    case Kind::swiss_roll_2d:
      return "swiss_roll_2d";
    case Kind::hypersphere:
      return strf("hypersphere(d=%d,r=%g)", d, radius);
    case Kind::two_point:
      return "two_point";
    case Kind::linear_subspace:
      return strf("linear_subspace(k=%d,d=%d)", k, d);
  }
  return "target";
}

// ---------------------------------------------------------------------------
// Sampling

Dataset sample_target(const TargetSpec& spec, int n, std::uint64_t seed) {
  spec.validate();
  if (n < 1) throw config_error("sample_target needs n >= 1");
  const int d = spec.ambient_dim();
  RngStream rng(derive_stream(seed, "sample/" + spec.label()));
  Matrix pts(n, d);
  switch (spec.kind) {
    case TargetSpec::Kind::gaussian_iso:
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) pts(i, j) = rng.normal();
      break;
    case TargetSpec::Kind::swiss_roll_2d:
      for (int i = 0; i < n; ++i) {
        double theta = M_PI + 3.0 * M_PI * rng.unit_co();
        pts(i, 0) = theta * std::cos(theta);
        pts(i, 1) = theta * std::sin(theta);
      }
      break;
    case TargetSpec::Kind::hypersphere:
      for (int i = 0; i < n; ++i) {
        Vector z(d);
        double nrm = 0;
        do {
          for (int j = 0; j < d; ++j) z[j] = rng.normal();
          nrm = z.norm();
        } while (nrm < 1e-12);
        pts.row(i) = (spec.radius / nrm) * z.transpose();
      }
      break;
    case TargetSpec::Kind::two_point:
      for (int i = 0; i < n; ++i)
        pts.row(i) =
            (rng.unit_co() < 0.5 ? spec.x1 : spec.x2).transpose();
      break;
    case TargetSpec::Kind::linear_subspace:
      pts.setZero();
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < spec.k; ++j)
          pts(i, j) = spec.subspace_scale * rng.normal();
      break;
  }
  Dataset ds = make_dataset(std::move(pts), spec.label());
  if (auto k = spec.known_intrinsic_dim()) ds.intrinsic_dim = *k;
  ds.generator_params["seed"] = std::to_string(seed);
  ds.generator_params["n"] = std::to_string(n);
  return ds;
}

// ---------------------------------------------------------------------------
// Quadrature helpers

namespace {

double log_gaussian(double sq_dist, double t, int d) {
  return -0.5 * d * std::log(2.0 * M_PI * t) - sq_dist / (2.0 * t);
}

struct QuadNodes {
  std::vector<double> theta;
  std::vector<double> weight;  // plain quadrature weights (d theta)
};

// Midpoint nodes on [pi, 4pi]; cells whose center lies within 5 sqrt(t) of
// the nearest curve point to x (measured along the curve) are split in two.
QuadNodes swiss_roll_nodes(const TargetSpec& spec, double t, const Vector* x) {
  const double lo = M_PI, hi = 4.0 * M_PI;
  const int n = std::max(64, spec.theta_nodes);
  const double step = (hi - lo) / n;
  QuadNodes q;
  q.theta.reserve(n + n / 4);
  q.weight.reserve(n + n / 4);

  double theta_star = 0.0, window = 0.0;
  if (x && t > 0) {
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      double th = lo + (i + 0.5) * step;
      double dx = (*x)[0] - th * std::cos(th);
      double dy = (*x)[1] - th * std::sin(th);
      double sq = dx * dx + dy * dy;
      if (sq < best) {
        best = sq;
        theta_star = th;
      }
    }
    double speed = std::sqrt(1.0 + theta_star * theta_star);
    window = 5.0 * std::sqrt(t) / speed;
  }

  for (int i = 0; i < n; ++i) {
    double center = lo + (i + 0.5) * step;
    if (window > 0 && std::abs(center - theta_star) <= window) {
      q.theta.push_back(center - 0.25 * step);
      q.weight.push_back(0.5 * step);
      q.theta.push_back(center + 0.25 * step);
      q.weight.push_back(0.5 * step);
    } else {
      q.theta.push_back(center);
      q.weight.push_back(step);
    }
  }
  return q;
}

struct GaussLegendre {
  std::vector<double> x;  // nodes on [-1, 1]
  std::vector<double> w;
};

// Newton iteration on P_n; cached per order.
const GaussLegendre& gauss_legendre(int n) {
  static std::mutex mu;
  static std::map<int, GaussLegendre> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  GaussLegendre gl;
  gl.x.resize(n);
  gl.w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    gl.x[i] = -z;
    gl.x[n - 1 - i] = z;
    double w = 2.0 / ((1.0 - z * z) * pp * pp);
    gl.w[i] = w;
    gl.w[n - 1 - i] = w;
  }
  auto [pos, inserted] = cache.emplace(n, std::move(gl));
  (void)inserted;
  return pos->second;
}

struct SphereAngular {
  std::vector<double> cos_phi;
  std::vector<double> log_rho;  // log of (sin phi)^{d-2} * quadrature weight
};

SphereAngular sphere_angular(const TargetSpec& spec) {
  SphereAngular a;
  const int n = std::max(16, spec.angular_nodes);
  const int d = spec.d;
  if (spec.angular_monte_carlo) {
    // rejection sampling from the density proportional to (sin phi)^{d-2}
    RngStream rng(derive_stream(0x5EEDu, "sphere-angular"));
    a.cos_phi.reserve(n);
    a.log_rho.assign(n, 0.0);
    while (static_cast<int>(a.cos_phi.size()) < n) {
      double phi = M_PI * rng.unit_co();
      double accept = std::pow(std::sin(phi), d - 2);
      if (rng.unit_co() < accept) a.cos_phi.push_back(std::cos(phi));
    }
  } else {
    const GaussLegendre& gl = gauss_legendre(n);
    a.cos_phi.resize(n);
    a.log_rho.resize(n);
    for (int i = 0; i < n; ++i) {
      double phi = 0.5 * M_PI * (gl.x[i] + 1.0);  // map [-1,1] -> [0,pi]
      a.cos_phi[i] = std::cos(phi);
      a.log_rho[i] = std::log(gl.w[i]) + (d - 2) * std::log(std::sin(phi));
    }
  }
  return a;
}

double lse(const std::vector<double>& v) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double x : v) mx = std::max(mx, x);
  if (!std::isfinite(mx)) return mx;
  double s = 0;
  for (double x : v) s += std::exp(x - mx);
  return mx + std::log(s);
}

void check_point_dim(const TargetSpec& spec, const Vector& x) {
  if (x.size() != spec.ambient_dim())
    throw config_error("point dimension does not match target");
}

}  // namespace

// ---------------------------------------------------------------------------
// oracle_m

Vector oracle_m(const TargetSpec& spec, double t, const Vector& x) {
  spec.validate();
  check_point_dim(spec, x);
  if (t <= 0) throw domain_error("oracle_m needs t > 0");
  switch (spec.kind) {
    case TargetSpec::Kind::gaussian_iso:
      return x / (1.0 + t);
    case TargetSpec::Kind::two_point: {
      double la = -(x - spec.x1).squaredNorm() / (2.0 * t);
      double lb = -(x - spec.x2).squaredNorm() / (2.0 * t);
      double m = std::max(la, lb);
      double wa = std::exp(la - m), wb = std::exp(lb - m);
      return (wa * spec.x1 + wb * spec.x2) / (wa + wb);
    }
    case TargetSpec::Kind::linear_subspace: {
      Vector m = Vector::Zero(spec.d);
      double s2 = spec.subspace_scale * spec.subspace_scale;
      m.head(spec.k) = (s2 / (s2 + t)) * x.head(spec.k);
      return m;
    }
    case TargetSpec::Kind::swiss_roll_2d: {
      QuadNodes q = swiss_roll_nodes(spec, t, &x);
      const size_t n = q.theta.size();
      double mx = -std::numeric_limits<double>::infinity();
      std::vector<double> lw(n);
      for (size_t i = 0; i < n; ++i) {
        double th = q.theta[i];
        double cx = th * std::cos(th), cy = th * std::sin(th);
        double sq = (x[0] - cx) * (x[0] - cx) + (x[1] - cy) * (x[1] - cy);
        lw[i] = std::log(q.weight[i]) - sq / (2.0 * t);
        mx = std::max(mx, lw[i]);
      }
      double sw = 0, sx = 0, sy = 0;
      for (size_t i = 0; i < n; ++i) {
        double th = q.theta[i];
        double w = std::exp(lw[i] - mx);
        sw += w;
        sx += w * th * std::cos(th);
        sy += w * th * std::sin(th);
      }
      Vector m(2);
      m << sx / sw, sy / sw;
      return m;
    }
    case TargetSpec::Kind::hypersphere: {
      double r = x.norm();
      if (r < 1e-300) return Vector::Zero(spec.d);
      SphereAngular a = sphere_angular(spec);
      double mx = -std::numeric_limits<double>::infinity();
      std::vector<double> lw(a.cos_phi.size());
      for (size_t i = 0; i < lw.size(); ++i) {
        lw[i] = a.log_rho[i] + r * spec.radius * a.cos_phi[i] / t;
        mx = std::max(mx, lw[i]);
      }
      double sw = 0, sc = 0;
      for (size_t i = 0; i < lw.size(); ++i) {
        double w = std::exp(lw[i] - mx);
        sw += w;
        sc += w * a.cos_phi[i];
      }
      return (spec.radius * sc / sw / r) * x;
    }
  }
  throw capability_error("oracle_m unsupported for this target");
}

// ---------------------------------------------------------------------------
// smoothed_log_density

double smoothed_log_density(const TargetSpec& spec, double t,
                            const Vector& x) {
  spec.validate();
  check_point_dim(spec, x);
  if (t < 0) throw domain_error("smoothed_log_density needs t >= 0");
  if (t == 0 && spec.singular())
    return -std::numeric_limits<double>::infinity();
  const int d = spec.ambient_dim();
  switch (spec.kind) {
    case TargetSpec::Kind::gaussian_iso:
      return log_gaussian(x.squaredNorm(), 1.0 + t, d);
    case TargetSpec::Kind::linear_subspace: {
      double s2 = spec.subspace_scale * spec.subspace_scale;
      double v = log_gaussian(x.head(spec.k).squaredNorm(), s2 + t, spec.k);
      if (spec.k < spec.d)
        v += log_gaussian(x.tail(spec.d - spec.k).squaredNorm(), t,
                          spec.d - spec.k);
      return v;
    }
    case TargetSpec::Kind::two_point: {
      double la = log_gaussian((x - spec.x1).squaredNorm(), t, d);
      double lb = log_gaussian((x - spec.x2).squaredNorm(), t, d);
      double m = std::max(la, lb);
      return std::log(0.5) + m +
             std::log(std::exp(la - m) + std::exp(lb - m));
    }
    case TargetSpec::Kind::swiss_roll_2d: {
      QuadNodes q = swiss_roll_nodes(spec, t, &x);
      std::vector<double> lw(q.theta.size());
      for (size_t i = 0; i < lw.size(); ++i) {
        double th = q.theta[i];
        double cx = th * std::cos(th), cy = th * std::sin(th);
        double sq = (x[0] - cx) * (x[0] - cx) + (x[1] - cy) * (x[1] - cy);
        lw[i] = std::log(q.weight[i]) + log_gaussian(sq, t, 2);
      }
      return lse(lw) - std::log(3.0 * M_PI);
    }
    case TargetSpec::Kind::hypersphere: {
      double r = x.norm();
      double R = spec.radius;
      SphereAngular a = sphere_angular(spec);
      std::vector<double> num(a.cos_phi.size());
      for (size_t i = 0; i < num.size(); ++i)
        num[i] = a.log_rho[i] + r * R * a.cos_phi[i] / t;
      double log_mean = lse(num) - lse(a.log_rho);
      return -0.5 * d * std::log(2.0 * M_PI * t) -
             (r * r + R * R) / (2.0 * t) + log_mean;
    }
  }
  throw capability_error("smoothed_log_density unsupported for this target");
}

// ---------------------------------------------------------------------------
// true score

Vector true_score(const TargetSpec& spec, double t, const Vector& x) {
  spec.validate();
  check_point_dim(spec, x);
  if (t <= 0) throw domain_error("true_score needs t > 0");
  switch (spec.kind) {
    case TargetSpec::Kind::gaussian_iso:
      return -x / (1.0 + t);
    case TargetSpec::Kind::linear_subspace: {
      double s2 = spec.subspace_scale * spec.subspace_scale;
      Vector s(spec.d);
      s.head(spec.k) = -x.head(spec.k) / (s2 + t);
      s.tail(spec.d - spec.k) = -x.tail(spec.d - spec.k) / t;
      return s;
    }
    case TargetSpec::Kind::two_point:
      return -(x - oracle_m(spec, t, x)) / t;
    default:
      throw capability_error("no closed-form score for " + spec.label());
  }
}

double true_score_divergence(const TargetSpec& spec, double t,
                             const Vector& x) {
  spec.validate();
  check_point_dim(spec, x);
  if (t <= 0) throw domain_error("true_score_divergence needs t > 0");
  switch (spec.kind) {
    case TargetSpec::Kind::gaussian_iso:
      return -spec.d / (1.0 + t);
    case TargetSpec::Kind::linear_subspace: {
      double s2 = spec.subspace_scale * spec.subspace_scale;
      return -spec.k / (s2 + t) - (spec.d - spec.k) / t;
    }
    case TargetSpec::Kind::two_point: {
      // grad m = w1 w2 (x1-x2)(x1-x2)^T / t
      double la = -(x - spec.x1).squaredNorm() / (2.0 * t);
      double lb = -(x - spec.x2).squaredNorm() / (2.0 * t);
      double m = std::max(la, lb);
      double wa = std::exp(la - m), wb = std::exp(lb - m);
      double w1 = wa / (wa + wb), w2 = wb / (wa + wb);
      double tr = w1 * w2 * (spec.x1 - spec.x2).squaredNorm() / t;
      return (tr - spec.ambient_dim()) / t;
    }
    default:
      throw capability_error("no closed-form divergence for " + spec.label());
  }
}

// ---------------------------------------------------------------------------
// IDX ingestion

namespace {

std::uint32_t read_be_u32(std::ifstream& in, const std::filesystem::path& p,
                          std::int64_t offset) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in)
    throw parse_error("truncated idx file " + p.string() + " at byte " +
                      std::to_string(offset));
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
         (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

std::vector<std::uint8_t> read_idx_labels(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open labels: " + path.string());
  std::uint32_t magic = read_be_u32(in, path, 0);
  if (magic != 0x00000801u)
    throw parse_error(strf("bad label magic 0x%08x at byte 0 in ", magic) +
                      path.string());
  std::uint32_t n = read_be_u32(in, path, 4);
  std::vector<std::uint8_t> labels(n);
  in.read(reinterpret_cast<char*>(labels.data()), n);
  if (!in)
    throw parse_error("truncated idx labels " + path.string() + " at byte " +
                      std::to_string(8 + in.gcount()));
  return labels;
}

}  // namespace

Dataset load_idx(const std::filesystem::path& images_path,
                 std::optional<int> filter_label, std::optional<int> limit,
                 bool normalize,
                 std::optional<std::filesystem::path> labels_path) {
  std::ifstream in(images_path, std::ios::binary);
  if (!in) throw io_error("cannot open: " + images_path.string());
  std::uint32_t magic = read_be_u32(in, images_path, 0);
  if (magic != 0x00000803u)
    throw parse_error(strf("bad image magic 0x%08x at byte 0 in ", magic) +
                      images_path.string());
  std::uint32_t n = read_be_u32(in, images_path, 4);
  std::uint32_t rows = read_be_u32(in, images_path, 8);
  std::uint32_t cols = read_be_u32(in, images_path, 12);
  const std::int64_t dim = std::int64_t(rows) * cols;
  if (n == 0 || dim == 0)
    throw parse_error("idx header declares empty data in " +
                      images_path.string());

  std::vector<std::uint8_t> labels;
  if (filter_label) {
    std::filesystem::path lp;
    if (labels_path) {
      lp = *labels_path;
    } else {
      std::string s = images_path.string();
      auto replace = [&s](const std::string& from, const std::string& to) {
        auto pos = s.find(from);
        if (pos != std::string::npos) s.replace(pos, from.size(), to);
      };
      replace("images", "labels");
      replace("idx3", "idx1");
      lp = s;
      if (lp == images_path)
        throw config_error("cannot derive labels path from " +
                           images_path.string());
    }
    labels = read_idx_labels(lp);
    if (labels.size() != n)
      throw parse_error(strf("label count %zu != image count %u mismatch",
                             labels.size(), n));
  }

  std::vector<std::vector<std::uint8_t>> kept;
  std::vector<std::uint8_t> buf(dim);
  for (std::uint32_t i = 0; i < n; ++i) {
    in.read(reinterpret_cast<char*>(buf.data()), dim);
    if (!in)
      throw parse_error("truncated idx image data in " + images_path.string() +
                        " at byte " +
                        std::to_string(16 + std::int64_t(i) * dim));
    if (filter_label && labels[i] != *filter_label) continue;
    kept.push_back(buf);
    if (limit && static_cast<int>(kept.size()) >= *limit) break;
  }
  if (kept.empty()) throw config_error("idx load produced an empty dataset");

  Matrix pts(kept.size(), dim);
  const double scale = normalize ? 1.0 / 255.0 : 1.0;
  for (size_t i = 0; i < kept.size(); ++i)
    for (std::int64_t j = 0; j < dim; ++j) pts(i, j) = scale * kept[i][j];
  Dataset ds = make_dataset(std::move(pts), images_path.filename().string());
  ds.generator_params["source"] = images_path.string();
  ds.generator_params["normalize"] = normalize ? "1" : "0";
  if (filter_label)
    ds.generator_params["filter_label"] = std::to_string(*filter_label);
  return ds;
}

// ---------------------------------------------------------------------------
// Persistence

static std::filesystem::path manifest_path(const std::filesystem::path& p) {
  std::filesystem::path m = p;
  m.replace_extension(".manifest.json");
  return m;
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
  {
    CsvWriter w(path);
    std::vector<std::string> names(ds.dim());
    for (int j = 0; j < ds.dim(); ++j) names[j] = "x" + std::to_string(j);
    w.header(names);
    std::vector<double> row(ds.dim());
    for (int i = 0; i < ds.n(); ++i) {
      for (int j = 0; j < ds.dim(); ++j) row[j] = ds.points(i, j);
      w.row(row);
    }
  }
  json meta;
  meta["name"] = ds.name;
  meta["generator_params"] = ds.generator_params;
  if (ds.intrinsic_dim)
    meta["intrinsic_dim"] = *ds.intrinsic_dim;
  else
    meta["intrinsic_dim"] = nullptr;
  auto it = ds.generator_params.find("seed");
  if (it != ds.generator_params.end())
    meta["seed"] = std::stoull(it->second);
  else
    meta["seed"] = nullptr;
  std::ofstream out(manifest_path(path));
  if (!out) throw io_error("cannot write " + manifest_path(path).string());
  out << meta.dump(2) << "\n";
}

Dataset load_dataset(const std::filesystem::path& path) {
  CsvTable table = read_csv(path);
  if (table.rows.empty()) throw parse_error("no data rows in " + path.string());
  const int d = static_cast<int>(table.header.size());
  Matrix pts(table.rows.size(), d);
  for (size_t i = 0; i < table.rows.size(); ++i)
    for (int j = 0; j < d; ++j) pts(i, j) = table.rows[i][j];
  Dataset ds = make_dataset(std::move(pts), path.stem().string());

  auto mp = manifest_path(path);
  if (!std::filesystem::exists(mp)) {
    ds.missing_manifest = true;
    log_info("no manifest beside " + path.string() +
             "; metadata left empty");
    return ds;
  }
  std::ifstream in(mp);
  json meta = json::parse(in, nullptr, true);
  ds.name = meta.value("name", ds.name);
  if (meta.contains("generator_params"))
    for (auto& [k, v] : meta["generator_params"].items())
      ds.generator_params[k] = v.get<std::string>();
  if (meta.contains("intrinsic_dim") && !meta["intrinsic_dim"].is_null())
    ds.intrinsic_dim = meta["intrinsic_dim"].get<int>();
  return ds;
}

}  // namespace mollescore
