#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "mollescore/dataset.hpp"
#include "mollescore/rng.hpp"
#include "mollescore/score.hpp"

using namespace mollescore;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  auto p = fs::temp_directory_path() / "mollescore_test_dataset";
  fs::create_directories(p);
  return p;
}

void write_be32(std::ofstream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                        static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v)};
  out.write(reinterpret_cast<char*>(b), 4);
}

}  // namespace

TEST_CASE("two_point sampling hits both atoms with equal weight") {
  auto spec = TargetSpec::two_points_1d(-1.0, 1.0);
  Dataset ds = sample_target(spec, 4000, 11);
  int pos = 0;
  for (int i = 0; i < ds.n(); ++i) {
    CHECK((ds.points(i, 0) == -1.0 || ds.points(i, 0) == 1.0));
    if (ds.points(i, 0) == 1.0) ++pos;
  }
  double frac = pos / 4000.0;
  CHECK(frac > 0.45);
  CHECK(frac < 0.55);
}

TEST_CASE("swiss roll samples live on the spiral with theta in [pi, 4pi]") {
  Dataset ds = sample_target(TargetSpec::swiss_roll(), 100, 3);
  CHECK(ds.intrinsic_dim == 1);
  for (int i = 0; i < ds.n(); ++i) {
    double r = ds.points.row(i).norm();  // ||c(theta)|| = theta
    CHECK(r >= M_PI - 1e-9);
    CHECK(r <= 4 * M_PI + 1e-9);
    double theta = r;
    CHECK(ds.points(i, 0) == doctest::Approx(theta * std::cos(theta)));
    CHECK(ds.points(i, 1) == doctest::Approx(theta * std::sin(theta)));
  }
}

TEST_CASE("hypersphere samples have exact norm") {
  Dataset ds = sample_target(TargetSpec::sphere(4, 1.0), 1000, 5);
  for (int i = 0; i < ds.n(); ++i)
    CHECK(std::abs(ds.points.row(i).norm() - 1.0) <= 1e-12);
}

TEST_CASE("sampling is bitwise deterministic in the seed") {
  Dataset a = sample_target(TargetSpec::gaussian(3), 50, 77);
  Dataset b = sample_target(TargetSpec::gaussian(3), 50, 77);
  Dataset c = sample_target(TargetSpec::gaussian(3), 50, 78);
  CHECK(a.points == b.points);
  CHECK(a.points != c.points);
}

TEST_CASE("oracle_m closed forms") {
  Vector x(4);
  x << 2, 0, 0, 0;
  Vector m = oracle_m(TargetSpec::gaussian(4), 1.0, x);
  CHECK(m[0] == doctest::Approx(1.0));
  CHECK(m.tail(3).norm() == 0.0);

  Vector zero1(1);
  zero1 << 0.0;
  Vector m2 = oracle_m(TargetSpec::two_points_1d(-1, 1), 0.37, zero1);
  CHECK(m2[0] == doctest::Approx(0.0));

  CHECK_THROWS_AS(oracle_m(TargetSpec::gaussian(2), 0.0, Vector::Zero(2)),
                  domain_error);
}

TEST_CASE("swiss roll oracle_m concentrates on the curve as t -> 0") {
  double theta = 2.2 * M_PI;
  Vector x(2);
  x << theta * std::cos(theta), theta * std::sin(theta);
  Vector m = oracle_m(TargetSpec::swiss_roll(), 1e-3, x);
  CHECK((m - x).norm() < 1e-3);
}

TEST_CASE("gaussian oracle_m matches the empirical mean on a huge sample") {
  auto spec = TargetSpec::gaussian(4);
  Dataset big = sample_target(spec, 1000000, 2024);
  RngStream rng(derive_stream(2024, "query"));
  for (int trial = 0; trial < 10; ++trial) {
    double t = std::exp(rng.unit_co() * std::log(10.0) - std::log(2.0));
    Vector x(4);
    for (int j = 0; j < 4; ++j) x[j] = 1.5 * rng.normal();
    Vector m_true = oracle_m(spec, t, x);
    Vector m_hat = m_emp(big, t, x);
    LocalCovariance lc = local_sigma(big, t, x);
    for (int j = 0; j < 4; ++j) {
      double se = std::sqrt(lc.sigma_hat(j, j) / big.n());
      CHECK(std::abs(m_hat[j] - m_true[j]) <= 3.0 * se + 1e-12);
    }
  }
}

TEST_CASE("smoothed_log_density closed forms and sentinels") {
  Vector zero4 = Vector::Zero(4);
  double v = smoothed_log_density(TargetSpec::gaussian(4), 0.5, zero4);
  CHECK(v == doctest::Approx(std::log(std::pow(2 * M_PI * 1.5, -2.0))));

  Vector off(2);
  off << 1.0, 2.0;
  CHECK(smoothed_log_density(TargetSpec::swiss_roll(), 0.0, off) ==
        -std::numeric_limits<double>::infinity());
}

TEST_CASE("hypersphere smoothed density is rotation invariant") {
  auto spec = TargetSpec::sphere(4, 1.0);
  RngStream rng(derive_stream(9, "rot"));
  Vector x(4);
  for (int j = 0; j < 4; ++j) x[j] = rng.normal();
  x *= 1.3 / x.norm();
  double v1 = smoothed_log_density(spec, 0.2, x);
  // any same-norm point
  Vector y = Vector::Zero(4);
  y[2] = 1.3;
  double v2 = smoothed_log_density(spec, 0.2, y);
  CHECK(std::abs(v1 - v2) < 1e-10);
}

TEST_CASE("hypersphere smoothed density matches a direct MC oracle") {
  auto spec = TargetSpec::sphere(4, 1.0);
  const double t = 0.1;
  Vector x = Vector::Zero(4);
  x[0] = 1.0;
  double impl = std::exp(smoothed_log_density(spec, t, x));

  // (1/M) sum G_t(x - y_i) over uniform sphere points
  const int m = 1000000;
  RngStream rng(derive_stream(31337, "sphere-mc"));
  double acc = 0;
  Vector y(4);
  const double norm_const = std::pow(2 * M_PI * t, -2.0);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < 4; ++j) y[j] = rng.normal();
    y /= y.norm();
    acc += std::exp(-(x - y).squaredNorm() / (2 * t));
  }
  double mc = norm_const * acc / m;
  CHECK(std::abs(impl - mc) / mc < 0.01);
}

TEST_CASE("swiss roll smoothed density integrates to one") {
  auto spec = TargetSpec::swiss_roll();
  spec.theta_nodes = 4000;
  const double t = 0.02;
  const int res = 260;
  const double lo = -13.5, hi = 13.5;
  const double step = (hi - lo) / res;
  double total = 0;
  Vector x(2);
  for (int i = 0; i < res; ++i) {
    x[0] = lo + (i + 0.5) * step;
    for (int j = 0; j < res; ++j) {
      x[1] = lo + (j + 0.5) * step;
      total += std::exp(smoothed_log_density(spec, t, x)) * step * step;
    }
  }
  CHECK(std::abs(total - 1.0) <= 1e-2);
}

TEST_CASE("idx loading, filtering and failure modes") {
  auto dir = temp_dir();
  auto img = dir / "digits-images-idx3-ubyte";
  auto lab = dir / "digits-labels-idx1-ubyte";
  {
    std::ofstream out(img, std::ios::binary);
    write_be32(out, 0x00000803);
    write_be32(out, 3);
    write_be32(out, 2);
    write_be32(out, 2);
    for (int i = 0; i < 3; ++i)
      for (int p = 0; p < 4; ++p)
        out.put(static_cast<char>(i * 60 + p));
  }
  {
    std::ofstream out(lab, std::ios::binary);
    write_be32(out, 0x00000801);
    write_be32(out, 3);
    out.put(5);
    out.put(3);
    out.put(5);
  }

  Dataset all = load_idx(img, std::nullopt, std::nullopt, true);
  CHECK(all.n() == 3);
  CHECK(all.dim() == 4);
  CHECK(all.points.maxCoeff() <= 1.0);
  CHECK(all.points(1, 0) == doctest::Approx(60.0 / 255.0));

  Dataset fives = load_idx(img, 5, std::nullopt, false);
  CHECK(fives.n() == 2);
  CHECK(fives.points(1, 0) == doctest::Approx(120.0));

  Dataset limited = load_idx(img, std::nullopt, 2, true);
  CHECK(limited.n() == 2);

  auto bad = dir / "bad-images-idx3-ubyte";
  {
    std::ofstream out(bad, std::ios::binary);
    write_be32(out, 0x00000777);
    write_be32(out, 1);
  }
  CHECK_THROWS_AS(load_idx(bad), parse_error);

  auto trunc = dir / "trunc-images-idx3-ubyte";
  {
    std::ofstream out(trunc, std::ios::binary);
    write_be32(out, 0x00000803);
    write_be32(out, 2);
    write_be32(out, 2);
    write_be32(out, 2);
    out.put(1);  // far too short
  }
  CHECK_THROWS_WITH_AS(load_idx(trunc), doctest::Contains("at byte"),
                       parse_error);
}

TEST_CASE("dataset csv round trip is bitwise") {
  auto dir = temp_dir();
  Dataset ds = sample_target(TargetSpec::gaussian(3), 41, 99);
  ds.points(0, 0) = 0.1 + 0.2;  // not exactly representable decimal
  ds.finalize();
  auto path = dir / "round.csv";
  save_dataset(ds, path);
  Dataset back = load_dataset(path);
  CHECK(back.points == ds.points);
  CHECK(back.name == ds.name);
  CHECK(!back.missing_manifest);
  CHECK(back.intrinsic_dim == ds.intrinsic_dim);

  fs::remove(dir / "round.manifest.json");
  Dataset orphan = load_dataset(path);
  CHECK(orphan.missing_manifest);
  CHECK(orphan.generator_params.empty());
}

TEST_CASE("malformed csv row names the row") {
  auto dir = temp_dir();
  auto path = dir / "broken.csv";
  {
    std::ofstream out(path);
    out << "x0,x1\n1.0,2.0\n3.0,oops\n";
  }
  CHECK_THROWS_WITH_AS(load_dataset(path), doctest::Contains("row 2"),
                       parse_error);
}

TEST_CASE("invalid target parameters are configuration errors") {
  TargetSpec s;
  s.kind = TargetSpec::Kind::gaussian_iso;
  s.d = 0;
  CHECK_THROWS_AS(sample_target(s, 10, 1), config_error);
  CHECK_THROWS_AS(TargetSpec::subspace(3, 2), config_error);
}
