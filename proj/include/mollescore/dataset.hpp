#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "mollescore/common.hpp"

namespace mollescore {

// N points in R^d plus provenance. `sq_norms` caches ||x_i||^2 for the
// kernel-sum hot paths; call finalize() after touching `points`.
struct Dataset {
  Matrix points;  // N x d
  std::string name;
  std::map<std::string, std::string> generator_params;
  std::optional<int> intrinsic_dim;
  bool missing_manifest = false;

  Vector sq_norms;

  int n() const { return static_cast<int>(points.rows()); }
  int dim() const { return static_cast<int>(points.cols()); }
  void finalize();
};

Dataset make_dataset(Matrix points, std::string name = "dataset");

// Analytic target distributions. Capability flags tell which oracles exist;
// unsupported calls raise capability_error.
struct TargetSpec {
  enum class Kind {
    gaussian_iso,     // N(0, Id) in R^d
    swiss_roll_2d,    // (theta cos theta, theta sin theta), theta ~ U[pi, 4pi]
    hypersphere,      // uniform on the sphere of given radius in R^d
    two_point,        // (delta_{x1} + delta_{x2}) / 2
    linear_subspace,  // N(0, scale^2 Id_k) on span(e_1..e_k) in R^d
  };

  Kind kind = Kind::gaussian_iso;
  int d = 1;
  double radius = 1.0;               // hypersphere
  Vector x1, x2;                     // two_point atoms
  int k = 1;                         // linear_subspace manifold dimension
  double subspace_scale = 1.0;       // linear_subspace on-manifold std dev
  int theta_nodes = 20000;           // swiss roll quadrature resolution
  int angular_nodes = 10000;         // hypersphere angular quadrature nodes
  bool angular_monte_carlo = false;  // MC instead of Gauss-Legendre

  static TargetSpec gaussian(int d);
  static TargetSpec swiss_roll();
  static TargetSpec sphere(int d, double radius = 1.0);
  static TargetSpec two_points(const Vector& a, const Vector& b);
  static TargetSpec two_points_1d(double a, double b);
  static TargetSpec subspace(int k, int d, double scale = 1.0);

  int ambient_dim() const;
  std::optional<int> known_intrinsic_dim() const;
  bool has_oracle_m() const { return true; }
  bool has_smoothed_log_density() const { return true; }
  bool has_true_score() const;
  // singular targets have no density at t = 0
  bool singular() const;
  std::string label() const;
  void validate() const;
};

Dataset sample_target(const TargetSpec& spec, int n, std::uint64_t seed);

// m_t(x) = E[X_0 | X_t = x]; closed form where available, quadrature for the
// curve/sphere targets (locally refined near the projection of x at small t).
Vector oracle_m(const TargetSpec& spec, double t, const Vector& x);

// log of (G_t * p_*)(x); -inf for singular targets at t = 0.
double smoothed_log_density(const TargetSpec& spec, double t, const Vector& x);

Vector true_score(const TargetSpec& spec, double t, const Vector& x);
double true_score_divergence(const TargetSpec& spec, double t,
                             const Vector& x);

// IDX (MNIST) ingestion: flattens images to rows, d = rows*cols.
// `labels_path` defaults to the conventional sibling name when filtering.
Dataset load_idx(const std::filesystem::path& images_path,
                 std::optional<int> filter_label = std::nullopt,
                 std::optional<int> limit = std::nullopt,
                 bool normalize = true,
                 std::optional<std::filesystem::path> labels_path =
                     std::nullopt);

// CSV with header x0..x{d-1}; sidecar <path>.manifest.json carries metadata.
void save_dataset(const Dataset& ds, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace mollescore
