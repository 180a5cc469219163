#pragma once

#include <functional>

#include "mollescore/dataset.hpp"

namespace mollescore {

// Neumann eigenmodes of the cube [-1,1]^d. The reported `coeffs` tensor
// holds <p0, f_k> for the cosine family f_k(x) = prod_j cos(pi k_j x_j);
// reconstruction additionally carries the interleaved odd modes
// nu_j(x) = cos(j pi (x+1)/2) (the full Neumann basis), without which a
// non-symmetric dataset acquires a spurious mirror image about the origin.
// The heat decay uses the semigroup of (1/2) Laplacian, matching dX = dB:
// mode j damps by exp(-(j pi / 2)^2 t / 2).
struct SpectralCoeffs {
  int d = 1;
  int kmax = 0;
  Vector coeffs;  // <p0, f_k>, flattened row-major over (kmax+1)^d indices
  Vector modal;   // <p0, nu_j>, flattened row-major over (2 kmax + 1)^d
  std::string source;

  Eigen::Index flat_size() const;
  Eigen::Index modal_size() const;
};

// damping < 1e-34 beyond 4/sqrt(t); capped at 256 per axis
int default_kmax(double t);

SpectralCoeffs fit_coeffs(const Dataset& ds, int kmax);
SpectralCoeffs fit_coeffs_analytic(
    const std::function<double(const Vector&)>& density, int d, int kmax,
    int quad_nodes = 4096);

double spectral_density(const SpectralCoeffs& sc, double t, const Vector& x);
Vector spectral_density_gradient(const SpectralCoeffs& sc, double t,
                                 const Vector& x);
Vector spectral_density_laplacian_terms(const SpectralCoeffs& sc, double t,
                                        const Vector& x);  // per-axis d2/dx^2

// Mollified spectral score: gradient series at t+h over the density at t.
// The derivative series sidesteps the f_k(x) = 0 singularity of the g_k/f_k
// ratio form.
Vector spectral_score(const SpectralCoeffs& sc, double t, const Vector& x,
                      double h = 0.0, double density_floor = 1e-8);
double spectral_score_divergence(const SpectralCoeffs& sc, double t,
                                 const Vector& x, double h = 0.0,
                                 double density_floor = 1e-8);

struct AffineRescale {
  double scale = 1.0;
  Vector shift;  // y = scale * (x - shift)
};

// Affine map putting the dataset inside [-half, half]^d, recorded for
// round-tripping.
Dataset rescale_to_cube(const Dataset& ds, double half, AffineRescale* rec);

void write_coeffs_csv(const SpectralCoeffs& sc,
                      const std::filesystem::path& path);

}  // namespace mollescore
