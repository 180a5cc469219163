#pragma once

#include <array>
#include <filesystem>

#include "mollescore/dataset.hpp"

namespace mollescore {

// Axis-aligned uniform evaluation grid, 1D or 2D.
struct Grid {
  int dims = 1;
  std::array<double, 2> lo{0, 0}, hi{1, 1};
  std::array<int, 2> res{64, 1};

  static Grid make1d(double lo, double hi, int res);
  static Grid make2d(double lo0, double hi0, int res0, double lo1, double hi1,
                     int res1);
  void validate() const;
  double step(int axis) const { return (hi[axis] - lo[axis]) / res[axis]; }
  double cell_volume() const;
  double center(int axis, int i) const {
    return lo[axis] + (i + 0.5) * step(axis);
  }
  Eigen::Index cells() const {
    return static_cast<Eigen::Index>(res[0]) * (dims == 2 ? res[1] : 1);
  }
  // row-major flat index: i0 * res1 + i1
  Eigen::Index flat(int i0, int i1 = 0) const {
    return static_cast<Eigen::Index>(i0) * (dims == 2 ? res[1] : 1) + i1;
  }
};

struct GridKernel {
  enum class Kind { gaussian, ball };
  Kind kind = Kind::gaussian;
  double var = 0;     // gaussian
  double radius = 0;  // ball: C_r = 1/(vol ball) on {||x-y|| <= r}
  static GridKernel gaussian(double var);
  static GridKernel ball(double radius);
  void validate() const;
};

struct DensityField {
  Grid grid;
  Vector values;  // flat, row-major
  bool normalized = false;

  double riemann_sum() const { return values.sum() * grid.cell_volume(); }
  double& at(int i0, int i1 = 0) { return values[grid.flat(i0, i1)]; }
  double at(int i0, int i1 = 0) const { return values[grid.flat(i0, i1)]; }
};

// (1/N) sum_i kernel(cell_center - x_i); the Gaussian kernel is evaluated
// exactly at cell centers, the ball kernel counts membership.
DensityField kde(const Dataset& ds, const GridKernel& kernel,
                 const Grid& grid);

// exp(K * log(field + eps)), renormalized by the midpoint Riemann sum.
// Out-of-grid log values are the floor log(eps).
DensityField leks(const DensityField& field, const GridKernel& kernel,
                  double eps = 1e-10);

// leks(kde(ds, L, grid), K, eps)
DensityField ledkde(const Dataset& ds, const GridKernel& K,
                    const GridKernel& L, const Grid& grid, double eps = 1e-10);

void write_field_csv(const DensityField& f, const std::filesystem::path& path);
void write_field_pgm(const DensityField& f, const std::filesystem::path& path);

double l2_distance(const DensityField& a, const DensityField& b);
double sup_distance(const DensityField& a, const DensityField& b);

}  // namespace mollescore
