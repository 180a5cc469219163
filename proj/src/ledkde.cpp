#include "mollescore/ledkde.hpp"

#include <cmath>
#include <fstream>

#include "mollescore/csv.hpp"

namespace mollescore {

Grid Grid::make1d(double lo_, double hi_, int res_) {
  Grid g;
  g.dims = 1;
  g.lo = {lo_, 0};
  g.hi = {hi_, 1};
  g.res = {res_, 1};
  g.validate();
  return g;
}

Grid Grid::make2d(double lo0, double hi0, int res0, double lo1, double hi1,
                  int res1) {
  Grid g;
  g.dims = 2;
  g.lo = {lo0, lo1};
  g.hi = {hi0, hi1};
  g.res = {res0, res1};
  g.validate();
  return g;
}

void Grid::validate() const {
  if (dims < 1 || dims > 2) throw config_error("grid dims must be 1 or 2");
  for (int a = 0; a < dims; ++a) {
    if (!(lo[a] < hi[a])) throw config_error("grid needs lo < hi per axis");
    if (res[a] < 8) throw config_error("grid needs resolution >= 8 per axis");
  }
}

double Grid::cell_volume() const {
  double v = step(0);
  if (dims == 2) v *= step(1);
  return v;
}

GridKernel GridKernel::gaussian(double var) {
  GridKernel k;
  k.kind = Kind::gaussian;
  k.var = var;
  k.validate();
  return k;
}

GridKernel GridKernel::ball(double radius) {
  GridKernel k;
  k.kind = Kind::ball;
  k.radius = radius;
  k.validate();
  return k;
}

void GridKernel::validate() const {
  if (kind == Kind::gaussian && !(var > 0))
    throw config_error("gaussian grid kernel needs var > 0");
  if (kind == Kind::ball && !(radius > 0))
    throw config_error("ball grid kernel needs radius > 0");
}

// ---------------------------------------------------------------------------

DensityField kde(const Dataset& ds, const GridKernel& kernel,
                 const Grid& grid) {
  grid.validate();
  kernel.validate();
  if (ds.dim() != grid.dims)
    throw config_error("dataset dimension does not match grid");
  DensityField f;
  f.grid = grid;
  f.values = Vector::Zero(grid.cells());
  const int n = ds.n();

  if (kernel.kind == GridKernel::Kind::gaussian) {
    const double norm =
        1.0 / std::pow(2.0 * M_PI * kernel.var, 0.5 * grid.dims);
    const double inv2v = 1.0 / (2.0 * kernel.var);
    if (grid.dims == 1) {
      for (int i0 = 0; i0 < grid.res[0]; ++i0) {
        double c = grid.center(0, i0);
        double acc = 0;
        for (int i = 0; i < n; ++i) {
          double dx = c - ds.points(i, 0);
          acc += std::exp(-dx * dx * inv2v);
        }
        f.at(i0) = norm * acc / n;
      }
    } else {
      Vector cx(grid.res[0]), cy(grid.res[1]);
      for (int i0 = 0; i0 < grid.res[0]; ++i0) cx[i0] = grid.center(0, i0);
      for (int i1 = 0; i1 < grid.res[1]; ++i1) cy[i1] = grid.center(1, i1);
      Matrix ex(grid.res[0], n), ey(grid.res[1], n);
      for (int i = 0; i < n; ++i) {
        ex.col(i) = (-(cx.array() - ds.points(i, 0)).square() * inv2v).exp();
        ey.col(i) = (-(cy.array() - ds.points(i, 1)).square() * inv2v).exp();
      }
      for (int i0 = 0; i0 < grid.res[0]; ++i0)
        for (int i1 = 0; i1 < grid.res[1]; ++i1) {
          double acc = 0;
          for (int i = 0; i < n; ++i) acc += ex(i0, i) * ey(i1, i);
          f.at(i0, i1) = norm * acc / n;
        }
    }
  } else {
    const double r2 = kernel.radius * kernel.radius;
    const double vol = grid.dims == 1 ? 2.0 * kernel.radius
                                      : M_PI * kernel.radius * kernel.radius;
    for (int i0 = 0; i0 < grid.res[0]; ++i0)
      for (int i1 = 0; i1 < (grid.dims == 2 ? grid.res[1] : 1); ++i1) {
        double c0 = grid.center(0, i0);
        double c1 = grid.dims == 2 ? grid.center(1, i1) : 0;
        int count = 0;
        for (int i = 0; i < n; ++i) {
          double dx = c0 - ds.points(i, 0);
          double dy = grid.dims == 2 ? c1 - ds.points(i, 1) : 0;
          if (dx * dx + dy * dy <= r2) ++count;
        }
        f.at(i0, i1) = count / (vol * n);
      }
  }
  return f;
}

// ---------------------------------------------------------------------------

namespace {

// truncated discrete gaussian, renormalized to sum 1
Vector gaussian_stencil(double var, double step, int max_halfwidth) {
  int hw = static_cast<int>(std::ceil(6.0 * std::sqrt(var) / step));
  if (hw >= max_halfwidth)
    throw config_error("grid too small for the gaussian stencil");
  Vector w(2 * hw + 1);
  for (int j = -hw; j <= hw; ++j)
    w[j + hw] = std::exp(-(j * step) * (j * step) / (2.0 * var));
  w /= w.sum();
  return w;
}

// separable 1D convolution along one axis of a (res0 x res1) row-major field
void convolve_axis(const Grid& grid, const Vector& in, const Vector& stencil,
                   int axis, double pad_value, Vector& out) {
  const int hw = (static_cast<int>(stencil.size()) - 1) / 2;
  const int r0 = grid.res[0], r1 = grid.dims == 2 ? grid.res[1] : 1;
  out.resize(in.size());
  if (axis == 0) {
    for (int i0 = 0; i0 < r0; ++i0)
      for (int i1 = 0; i1 < r1; ++i1) {
        double acc = 0;
        for (int j = -hw; j <= hw; ++j) {
          int p = i0 + j;
          double v = (p < 0 || p >= r0) ? pad_value
                                        : in[grid.flat(p, i1)];
          acc += stencil[j + hw] * v;
        }
        out[grid.flat(i0, i1)] = acc;
      }
  } else {
    for (int i0 = 0; i0 < r0; ++i0)
      for (int i1 = 0; i1 < r1; ++i1) {
        double acc = 0;
        for (int j = -hw; j <= hw; ++j) {
          int p = i1 + j;
          double v = (p < 0 || p >= r1) ? pad_value
                                        : in[grid.flat(i0, p)];
          acc += stencil[j + hw] * v;
        }
        out[grid.flat(i0, i1)] = acc;
      }
  }
}

// direct 2D/1D ball-average stencil
void convolve_ball(const Grid& grid, const Vector& in, double radius,
                   double pad_value, Vector& out) {
  const int r0 = grid.res[0], r1 = grid.dims == 2 ? grid.res[1] : 1;
  const int hw0 = static_cast<int>(std::floor(radius / grid.step(0)));
  const int hw1 =
      grid.dims == 2 ? static_cast<int>(std::floor(radius / grid.step(1))) : 0;
  if (radius < grid.step(0) || (grid.dims == 2 && radius < grid.step(1)))
    throw config_error("ball kernel radius below one cell width");
  if (hw0 >= r0 || (grid.dims == 2 && hw1 >= r1))
    throw config_error("grid too small for the ball stencil");
  std::vector<std::pair<int, int>> offsets;
  const double r2 = radius * radius;
  for (int a = -hw0; a <= hw0; ++a)
    for (int b = -hw1; b <= hw1; ++b) {
      double dx = a * grid.step(0);
      double dy = grid.dims == 2 ? b * grid.step(1) : 0;
      if (dx * dx + dy * dy <= r2) offsets.emplace_back(a, b);
    }
  const double w = 1.0 / offsets.size();
  out.resize(in.size());
  for (int i0 = 0; i0 < r0; ++i0)
    for (int i1 = 0; i1 < r1; ++i1) {
      double acc = 0;
      for (auto [a, b] : offsets) {
        int p0 = i0 + a, p1 = i1 + b;
        bool inside = p0 >= 0 && p0 < r0 && p1 >= 0 && p1 < r1;
        acc += w * (inside ? in[grid.flat(p0, p1)] : pad_value);
      }
      out[grid.flat(i0, i1)] = acc;
    }
}

}  // namespace

DensityField leks(const DensityField& field, const GridKernel& kernel,
                  double eps) {
  kernel.validate();
  if (!(eps > 0)) throw config_error("leks needs eps > 0");
  if ((field.values.array() < 0).any())
    throw numerical_error("leks input field has negative values");
  const Grid& grid = field.grid;
  const double log_eps = std::log(eps);

  Vector lg = (field.values.array() + eps).log();
  Vector conv;
  if (kernel.kind == GridKernel::Kind::gaussian) {
    // vanishing variance degenerates to the identity stencil
    Vector s0 = gaussian_stencil(kernel.var, grid.step(0), grid.res[0]);
    convolve_axis(grid, lg, s0, 0, log_eps, conv);
    if (grid.dims == 2) {
      Vector s1 = gaussian_stencil(kernel.var, grid.step(1), grid.res[1]);
      Vector tmp = conv;
      convolve_axis(grid, tmp, s1, 1, log_eps, conv);
    }
  } else {
    convolve_ball(grid, lg, kernel.radius, log_eps, conv);
  }

  DensityField out;
  out.grid = grid;
  // subtract the max before exponentiating, fold it into the normalizer
  double mx = conv.maxCoeff();
  out.values = (conv.array() - mx).exp();
  double z = out.values.sum() * grid.cell_volume();
  out.values /= z;
  out.normalized = true;
  return out;
}

DensityField ledkde(const Dataset& ds, const GridKernel& K,
                    const GridKernel& L, const Grid& grid, double eps) {
  return leks(kde(ds, L, grid), K, eps);
}

// ---------------------------------------------------------------------------

void write_field_csv(const DensityField& f, const std::filesystem::path& path) {
  CsvWriter w(path);
  if (f.grid.dims == 1) {
    w.header({"x0", "value"});
    for (int i0 = 0; i0 < f.grid.res[0]; ++i0)
      w.row({f.grid.center(0, i0), f.at(i0)});
  } else {
    w.header({"x0", "x1", "value"});
    for (int i0 = 0; i0 < f.grid.res[0]; ++i0)
      for (int i1 = 0; i1 < f.grid.res[1]; ++i1)
        w.row({f.grid.center(0, i0), f.grid.center(1, i1), f.at(i0, i1)});
  }
}

void write_field_pgm(const DensityField& f, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot write " + path.string());
  const int w = f.grid.dims == 2 ? f.grid.res[1] : f.grid.res[0];
  const int h = f.grid.dims == 2 ? f.grid.res[0] : 1;
  double mx = f.values.maxCoeff();
  if (mx <= 0) mx = 1;
  out << "P5\n" << w << " " << h << "\n255\n";
  for (int i0 = 0; i0 < h; ++i0)
    for (int i1 = 0; i1 < w; ++i1) {
      double v = f.grid.dims == 2 ? f.at(i0, i1) : f.at(i1);
      unsigned char byte =
          static_cast<unsigned char>(std::lround(255.0 * v / mx));
      out.put(static_cast<char>(byte));
    }
}

static void check_same_grid(const DensityField& a, const DensityField& b) {
  if (a.grid.dims != b.grid.dims || a.grid.res != b.grid.res ||
      a.grid.lo != b.grid.lo || a.grid.hi != b.grid.hi)
    throw config_error("density fields live on different grids");
}

double l2_distance(const DensityField& a, const DensityField& b) {
  check_same_grid(a, b);
  return std::sqrt((a.values - b.values).squaredNorm() *
                   a.grid.cell_volume());
}

double sup_distance(const DensityField& a, const DensityField& b) {
  check_same_grid(a, b);
  return (a.values - b.values).cwiseAbs().maxCoeff();
}

}  // namespace mollescore
