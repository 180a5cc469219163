#include <cmath>

#include "doctest.h"
#include "mollescore/analysis.hpp"
#include "mollescore/rng.hpp"

using namespace mollescore;

namespace {

// test-side reference: characteristic polynomial det(A - lambda I) expanded
// by cofactors (d <= 4), roots isolated on a grid and bisected
double char_poly(const Matrix& a, double lam) {
  const int d = static_cast<int>(a.rows());
  Matrix b = a - lam * Matrix::Identity(d, d);
  switch (d) {
    case 1:
      return b(0, 0);
    case 2:
      return b(0, 0) * b(1, 1) - b(0, 1) * b(1, 0);
    case 3:
      return b(0, 0) * (b(1, 1) * b(2, 2) - b(1, 2) * b(2, 1)) -
             b(0, 1) * (b(1, 0) * b(2, 2) - b(1, 2) * b(2, 0)) +
             b(0, 2) * (b(1, 0) * b(2, 1) - b(1, 1) * b(2, 0));
    case 4: {
      double det = 0;
      for (int c = 0; c < 4; ++c) {
        Matrix minor(3, 3);
        for (int i = 1; i < 4; ++i) {
          int cc = 0;
          for (int j = 0; j < 4; ++j) {
            if (j == c) continue;
            minor(i - 1, cc++) = b(i, j);
          }
        }
        double m3 =
            minor(0, 0) * (minor(1, 1) * minor(2, 2) -
                           minor(1, 2) * minor(2, 1)) -
            minor(0, 1) * (minor(1, 0) * minor(2, 2) -
                           minor(1, 2) * minor(2, 0)) +
            minor(0, 2) * (minor(1, 0) * minor(2, 1) -
                           minor(1, 1) * minor(2, 0));
        det += ((c % 2 == 0) ? 1.0 : -1.0) * b(0, c) * m3;
      }
      return det;
    }
  }
  return 0;
}

std::vector<double> bisection_eigenvalues(const Matrix& a) {
  const int d = static_cast<int>(a.rows());
  double radius = 0;
  for (int i = 0; i < d; ++i)
    radius = std::max(radius, a.row(i).cwiseAbs().sum());
  radius += 1e-6;
  const int grid = 40000;
  std::vector<double> roots;
  double prev_x = -radius, prev_v = char_poly(a, prev_x);
  for (int i = 1; i <= grid; ++i) {
    double x = -radius + 2.0 * radius * i / grid;
    double v = char_poly(a, x);
    if ((prev_v < 0) != (v < 0)) {
      double lo = prev_x, hi = x;
      for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if ((char_poly(a, lo) < 0) != (char_poly(a, mid) < 0))
          hi = mid;
        else
          lo = mid;
      }
      roots.push_back(0.5 * (lo + hi));
    }
    prev_x = x;
    prev_v = v;
  }
  std::sort(roots.rbegin(), roots.rend());
  return roots;
}

Matrix random_symmetric(int d, RngStream& rng) {
  Matrix a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j <= i; ++j) {
      a(i, j) = rng.normal();
      a(j, i) = a(i, j);
    }
  return a;
}

}  // namespace

TEST_CASE("jacobi: diagonal case and basic structure") {
  Matrix a = Matrix::Zero(2, 2);
  a(0, 0) = 3;
  a(1, 1) = 1;
  JacobiEigen je = jacobi_eigen(a);
  CHECK(je.values[0] == doctest::Approx(3.0));
  CHECK(je.values[1] == doctest::Approx(1.0));
  CHECK(std::abs(je.vectors(0, 0)) == doctest::Approx(1.0));
  CHECK(std::abs(je.vectors(1, 1)) == doctest::Approx(1.0));
}

TEST_CASE("jacobi on 1000 random symmetric matrices") {
  RngStream rng(derive_stream(5150, "jacobi"));
  for (int trial = 0; trial < 1000; ++trial) {
    int d;
    if (trial % 20 == 0)
      d = 33 + static_cast<int>(rng.below(32));  // up to 64
    else
      d = 2 + static_cast<int>(rng.below(11));
    Matrix a = random_symmetric(d, rng);
    JacobiEigen je = jacobi_eigen(a);

    Matrix vtv = je.vectors.transpose() * je.vectors;
    CHECK((vtv - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() < 1e-10);
    Matrix rec = je.vectors * je.values.asDiagonal() *
                 je.vectors.transpose();
    CHECK((rec - a).norm() <= 1e-10 * std::max(1.0, a.norm()));
    for (int i = 0; i + 1 < d; ++i) CHECK(je.values[i] >= je.values[i + 1]);

    if (d <= 4) {
      auto ref = bisection_eigenvalues(a);
      REQUIRE(ref.size() == static_cast<size_t>(d));
      for (int i = 0; i < d; ++i)
        CHECK(std::abs(je.values[i] - ref[i]) < 1e-9);
    }
  }
}

TEST_CASE("local pca aligns with the swiss roll tangent") {
  Dataset ds = sample_target(TargetSpec::swiss_roll(), 10000, 99);
  for (double theta : {1.6 * M_PI, 2.3 * M_PI, 3.1 * M_PI}) {
    Vector x(2);
    x << theta * std::cos(theta), theta * std::sin(theta);
    PcaReport pca = local_pca(ds, 1e-3, x);
    Vector tangent(2);
    tangent << std::cos(theta) - theta * std::sin(theta),
        std::sin(theta) + theta * std::cos(theta);
    tangent.normalize();
    double align = std::abs(pca.eigenvectors.col(0).dot(tangent));
    CHECK(align >= 0.95);
    CHECK(pca.eigenvalues[0] > pca.eigenvalues[1]);
  }
}

TEST_CASE("intrinsic dimension from the eigenvalue scaling law") {
  std::vector<double> ts = {1e-4, 3e-4, 1e-3, 3e-3, 1e-2};

  Dataset line = sample_target(TargetSpec::subspace(1, 2), 10000, 7);
  Vector x1(2);
  x1 << 0.2, 0.0;
  IntrinsicDimReport r1 = intrinsic_dim(line, x1, ts);
  CHECK(std::abs(r1.k_hat - 1.0) <= 0.2);
  CHECK(std::abs(r1.slope - 0.5) <= 0.1);

  Dataset plane = sample_target(TargetSpec::subspace(2, 3), 10000, 8);
  Vector x2 = Vector::Zero(3);
  x2[0] = 0.1;
  IntrinsicDimReport r2 = intrinsic_dim(plane, x2, ts);
  CHECK(std::abs(r2.k_hat - 2.0) <= 0.3);

  Dataset roll = sample_target(TargetSpec::swiss_roll(), 10000, 9);
  double theta = 2.4 * M_PI;
  Vector x3(2);
  x3 << theta * std::cos(theta), theta * std::sin(theta);
  IntrinsicDimReport r3 = intrinsic_dim(roll, x3, ts);
  CHECK(std::abs(r3.k_hat - 1.0) <= 0.25);

  CHECK_THROWS_AS(intrinsic_dim(line, x1, {1e-3, 2e-3, 3e-3}), config_error);
  CHECK_THROWS_AS(intrinsic_dim(line, x1, {1e-3, 2e-3, 3e-3, 4e-3}),
                  config_error);
}

TEST_CASE("kl of a field against its own target vanishes") {
  for (int d : {1, 4, 10}) {
    auto spec = TargetSpec::gaussian(d);
    AnalyticField field(spec);
    KlReport rep = kl_estimate(spec, field, 0.1, 15.0, 1e-3, 400,
                               derive_stream(3, d));
    CHECK(rep.q_dropped == 0);
    CHECK(std::abs(rep.kl) <= 3.0 * rep.std_error + 2e-2);
  }
}

TEST_CASE("bias_variance: unbiased for affine oracles, 1/N variance") {
  auto gauss = TargetSpec::gaussian(2);
  Vector x(2);
  x << 0.4, -0.1;
  BiasVarianceReport rg = bias_variance(gauss, 200, 0.05, 0.3, x, 50, 256, 5);
  CHECK(rg.b_hat <= 3.0 * rg.b_se + 1e-18);

  auto line = TargetSpec::subspace(1, 2);
  Vector xm(2);
  xm << 0.3, 0.0;
  BiasVarianceReport v1 = bias_variance(line, 300, 1e-3, 0.1, xm, 250, 2048, 6);
  BiasVarianceReport v4 =
      bias_variance(line, 1200, 1e-3, 0.1, xm, 250, 2048, 6);
  double ratio = v1.v_hat / v4.v_hat;
  CHECK(ratio >= 2.5);
  CHECK(ratio <= 6.0);

  // h -> 0 degenerates to the raw estimator deviation
  BiasVarianceReport raw =
      bias_variance(line, 300, 1e-3, 1e-12, xm, 120, 2, 7);
  double direct = 0;
  Vector m_true = oracle_m(line, 1e-3, xm);
  for (int r = 0; r < 120; ++r) {
    Dataset ds = sample_target(
        line, 300, derive_stream(derive_stream(7, "biasvar/data"),
                                 static_cast<std::uint64_t>(r)));
    direct += ((m_emp(ds, 1e-3, xm) - m_true).squaredNorm() - direct) / (r + 1);
  }
  CHECK(raw.v_hat == doctest::Approx(direct).epsilon(1e-4));
}

TEST_CASE("n_eff with a vanishing bandwidth returns N") {
  auto spec = TargetSpec::gaussian(1);
  auto moll = MollifySpec::fixed(1e-9, 2, MollifySpec::Mode::time_shift);
  NeffResult r = n_eff(spec, 40, 0.1, moll, 5.0, 0.01, 400, 3, 12345);
  CHECK(r.n_eff >= 40.0 * 0.9);
  CHECK(r.n_eff <= 40.0 * 2.1);
}

TEST_CASE("memorization ratio basics") {
  Dataset train = sample_target(TargetSpec::gaussian(2), 40, 11);
  CHECK(memorization_ratio(train.points, train) == 1.0);

  // every probe equidistant from its two nearest trainers
  Matrix grid_train(2, 2);
  grid_train << 0, 0, 1, 0;
  Dataset two = make_dataset(grid_train);
  Matrix mid(1, 2);
  mid << 0.5, 0.0;
  CHECK(memorization_ratio(mid, two) == 0.0);

  Matrix one(1, 2);
  one << 0, 0;
  CHECK_THROWS_AS(memorization_ratio(mid, make_dataset(one)), domain_error);
}

TEST_CASE("memorization ratio is rotation invariant") {
  Dataset train = sample_target(TargetSpec::swiss_roll(), 60, 13);
  Dataset batch = sample_target(TargetSpec::swiss_roll(), 80, 14);
  RngStream rng(derive_stream(15, "jitter"));
  Matrix b = batch.points;
  for (int i = 0; i < b.rows(); ++i)
    for (int j = 0; j < 2; ++j) b(i, j) += 0.3 * rng.normal();
  double base = memorization_ratio(b, train);
  double angle = 1.234;
  Matrix rot(2, 2);
  rot << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  Dataset train_rot = train;
  train_rot.points = train.points * rot.transpose();
  train_rot.finalize();
  CHECK(memorization_ratio(b * rot.transpose(), train_rot) ==
        doctest::Approx(base).epsilon(1e-12));
  CHECK(base > 0.0);
  CHECK(base < 1.0);
}
