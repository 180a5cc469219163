#include "mollescore/spectral.hpp"

#include <array>
#include <cmath>

#include "mollescore/csv.hpp"

namespace mollescore {

namespace {

// mode j has frequency omega_j = j pi / 2 on [-1,1]; heat damping for the
// (1/2) Laplacian semigroup is exp(-omega^2 t / 2) = exp(-j^2 pi^2 t / 8)
constexpr double kDampCoef = M_PI * M_PI / 8.0;

void check_cube(const Matrix& pts) {
  if ((pts.array().abs() > 1.0).any())
    throw domain_error("spectral basis needs points inside [-1,1]^d");
}

struct MultiIndex {
  int d, cap;  // indices run over 0..cap per axis
  std::array<int, 3> k{0, 0, 0};
  bool done = false;
  void advance() {
    for (int j = d - 1; j >= 0; --j) {
      if (++k[j] <= cap) return;
      k[j] = 0;
    }
    done = true;
  }
};

double sq_norm_idx(const std::array<int, 3>& k, int d) {
  double s = 0;
  for (int j = 0; j < d; ++j) s += double(k[j]) * k[j];
  return s;
}

double cnorm(const std::array<int, 3>& k, int d) {
  double c = 1.0;
  for (int j = 0; j < d; ++j)
    if (k[j] == 0) c *= 0.5;
  return c;
}

// per-axis mode values nu_j(x) = cos(j pi (x+1)/2) and derivatives
struct ModeTables {
  Matrix v, dv, ddv;  // (jmax+1) x d
  ModeTables(const Vector& x, int jmax) {
    const int d = static_cast<int>(x.size());
    v.resize(jmax + 1, d);
    dv.resize(jmax + 1, d);
    ddv.resize(jmax + 1, d);
    for (int a = 0; a < d; ++a)
      for (int j = 0; j <= jmax; ++j) {
        double w = 0.5 * M_PI * j;
        double phase = w * (x[a] + 1.0);
        v(j, a) = std::cos(phase);
        dv(j, a) = -w * std::sin(phase);
        ddv(j, a) = -w * w * v(j, a);
      }
  }
};

void check_point(const SpectralCoeffs& sc, const Vector& x) {
  if (x.size() != sc.d)
    throw config_error("point dimension does not match spectral coefficients");
  if ((x.array().abs() >= 1.0).any())
    throw domain_error("spectral evaluation needs x in the open cube");
}

enum class Deriv { none, grad, lap };

// shared series accumulator over the full mode tensor
template <Deriv D>
void accumulate(const SpectralCoeffs& sc, double t, const Vector& x,
                double* scalar_out, Vector* vec_out) {
  ModeTables tb(x, 2 * sc.kmax);
  MultiIndex mi{sc.d, 2 * sc.kmax};
  Eigen::Index flat = 0;
  double acc = 0;
  if (vec_out) vec_out->setZero(sc.d);
  for (; !mi.done; mi.advance(), ++flat) {
    double damp = std::exp(-kDampCoef * sq_norm_idx(mi.k, sc.d) * t);
    if (damp == 0.0) continue;
    double w = cnorm(mi.k, sc.d) * damp * sc.modal[flat];
    if (w == 0.0) continue;
    if constexpr (D == Deriv::none) {
      double f = 1.0;
      for (int a = 0; a < sc.d; ++a) f *= tb.v(mi.k[a], a);
      acc += w * f;
    } else {
      for (int m = 0; m < sc.d; ++m) {
        double term = D == Deriv::grad ? tb.dv(mi.k[m], m)
                                       : tb.ddv(mi.k[m], m);
        for (int a = 0; a < sc.d; ++a)
          if (a != m) term *= tb.v(mi.k[a], a);
        (*vec_out)[m] += w * term;
      }
    }
  }
  if (scalar_out) *scalar_out = acc;
}

}  // namespace

Eigen::Index SpectralCoeffs::flat_size() const {
  Eigen::Index n = 1;
  for (int j = 0; j < d; ++j) n *= (kmax + 1);
  return n;
}

Eigen::Index SpectralCoeffs::modal_size() const {
  Eigen::Index n = 1;
  for (int j = 0; j < d; ++j) n *= (2 * kmax + 1);
  return n;
}

int default_kmax(double t) {
  if (t <= 0) throw domain_error("default_kmax needs t > 0");
  return std::min(256, static_cast<int>(std::ceil(4.0 / std::sqrt(t))));
}

SpectralCoeffs fit_coeffs(const Dataset& ds, int kmax) {
  if (ds.dim() > 3) throw config_error("spectral basis limited to d <= 3");
  if (kmax < 0) throw config_error("kmax must be >= 0");
  check_cube(ds.points);
  SpectralCoeffs sc;
  sc.d = ds.dim();
  sc.kmax = kmax;
  sc.source = "empirical(" + ds.name + ")";
  sc.coeffs = Vector::Zero(sc.flat_size());
  sc.modal = Vector::Zero(sc.modal_size());
  const int n = ds.n();
  for (int i = 0; i < n; ++i) {
    Vector x = ds.points.row(i).transpose();
    ModeTables tb(x, 2 * kmax);
    // cosine-family tensor <p0, f_k>, f_k = prod cos(pi k x)
    Matrix ck(kmax + 1, sc.d);
    for (int a = 0; a < sc.d; ++a)
      for (int k = 0; k <= kmax; ++k)
        ck(k, a) = std::cos(M_PI * k * x[a]);
    {
      MultiIndex mi{sc.d, kmax};
      Eigen::Index flat = 0;
      for (; !mi.done; mi.advance(), ++flat) {
        double f = 1.0;
        for (int a = 0; a < sc.d; ++a) f *= ck(mi.k[a], a);
        sc.coeffs[flat] += f;
      }
    }
    {
      MultiIndex mi{sc.d, 2 * kmax};
      Eigen::Index flat = 0;
      for (; !mi.done; mi.advance(), ++flat) {
        double f = 1.0;
        for (int a = 0; a < sc.d; ++a) f *= tb.v(mi.k[a], a);
        sc.modal[flat] += f;
      }
    }
  }
  sc.coeffs /= static_cast<double>(n);
  sc.modal /= static_cast<double>(n);
  return sc;
}

SpectralCoeffs fit_coeffs_analytic(
    const std::function<double(const Vector&)>& density, int d, int kmax,
    int quad_nodes) {
  if (d > 2)
    throw config_error("analytic spectral fit limited to d <= 2 grids");
  SpectralCoeffs sc;
  sc.d = d;
  sc.kmax = kmax;
  sc.source = "analytic";
  sc.coeffs = Vector::Zero(sc.flat_size());
  sc.modal = Vector::Zero(sc.modal_size());
  const double step = 2.0 / quad_nodes;
  Vector x(d);
  std::array<int, 2> idx{0, 0};
  const int n1 = d == 2 ? quad_nodes : 1;
  for (idx[0] = 0; idx[0] < quad_nodes; ++idx[0]) {
    x[0] = -1.0 + (idx[0] + 0.5) * step;
    for (idx[1] = 0; idx[1] < n1; ++idx[1]) {
      if (d == 2) x[1] = -1.0 + (idx[1] + 0.5) * step;
      double p = density(x) * std::pow(step, d);
      ModeTables tb(x, 2 * kmax);
      {
        MultiIndex mi{d, kmax};
        Eigen::Index flat = 0;
        for (; !mi.done; mi.advance(), ++flat) {
          double f = 1.0;
          for (int a = 0; a < d; ++a) f *= std::cos(M_PI * mi.k[a] * x[a]);
          sc.coeffs[flat] += p * f;
        }
      }
      {
        MultiIndex mi{d, 2 * kmax};
        Eigen::Index flat = 0;
        for (; !mi.done; mi.advance(), ++flat) {
          double f = 1.0;
          for (int a = 0; a < d; ++a) f *= tb.v(mi.k[a], a);
          sc.modal[flat] += p * f;
        }
      }
    }
  }
  return sc;
}

double spectral_density(const SpectralCoeffs& sc, double t, const Vector& x) {
  check_point(sc, x);
  if (t < 0) throw domain_error("spectral density needs t >= 0");
  double p = 0;
  accumulate<Deriv::none>(sc, t, x, &p, nullptr);
  return p;
}

Vector spectral_density_gradient(const SpectralCoeffs& sc, double t,
                                 const Vector& x) {
  check_point(sc, x);
  Vector g(sc.d);
  accumulate<Deriv::grad>(sc, t, x, nullptr, &g);
  return g;
}

Vector spectral_density_laplacian_terms(const SpectralCoeffs& sc, double t,
                                        const Vector& x) {
  check_point(sc, x);
  Vector l(sc.d);
  accumulate<Deriv::lap>(sc, t, x, nullptr, &l);
  return l;
}

Vector spectral_score(const SpectralCoeffs& sc, double t, const Vector& x,
                      double h, double density_floor) {
  if (t <= 0) throw domain_error("spectral score needs t > 0");
  if (h < 0) throw domain_error("spectral score needs h >= 0");
  double p = spectral_density(sc, t, x);
  if (!(p > density_floor))
    throw numerical_error(
        strf("spectral density %.3e below floor %.1e; score undefined", p,
             density_floor));
  return spectral_density_gradient(sc, t + h, x) / p;
}

double spectral_score_divergence(const SpectralCoeffs& sc, double t,
                                 const Vector& x, double h,
                                 double density_floor) {
  if (t <= 0) throw domain_error("spectral divergence needs t > 0");
  double p = spectral_density(sc, t, x);
  if (!(p > density_floor))
    throw numerical_error("spectral density below floor; divergence undefined");
  Vector grad_th = spectral_density_gradient(sc, t + h, x);
  Vector grad_t = spectral_density_gradient(sc, t, x);
  Vector lap_th = spectral_density_laplacian_terms(sc, t + h, x);
  // div (grad p_{t+h} / p_t) = lap p_{t+h}/p_t - grad p_{t+h}.grad p_t / p_t^2
  return lap_th.sum() / p - grad_th.dot(grad_t) / (p * p);
}

Dataset rescale_to_cube(const Dataset& ds, double half, AffineRescale* rec) {
  if (half <= 0 || half > 1) throw config_error("cube half-width in (0,1]");
  Vector lo = ds.points.colwise().minCoeff();
  Vector hi = ds.points.colwise().maxCoeff();
  Vector center = 0.5 * (lo + hi);
  double extent = (hi - lo).maxCoeff();
  double scale = extent > 0 ? 2.0 * half / extent : 1.0;
  Dataset out = ds;
  out.points = scale * (ds.points.rowwise() - center.transpose());
  out.name = ds.name + "/rescaled";
  out.finalize();
  if (rec) {
    rec->scale = scale;
    rec->shift = center;
  }
  return out;
}

void write_coeffs_csv(const SpectralCoeffs& sc,
                      const std::filesystem::path& path) {
  CsvWriter w(path);
  std::vector<std::string> names;
  for (int j = 0; j < sc.d; ++j) names.push_back("k" + std::to_string(j));
  names.push_back("coeff");
  w.header(names);
  MultiIndex mi{sc.d, sc.kmax};
  Eigen::Index flat = 0;
  for (; !mi.done; mi.advance(), ++flat) {
    std::vector<double> row;
    for (int j = 0; j < sc.d; ++j) row.push_back(mi.k[j]);
    row.push_back(sc.coeffs[flat]);
    w.row(row);
  }
}

}  // namespace mollescore
