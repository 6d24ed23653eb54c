#include <doctest.h>

#include <Eigen/QR>

#include <cmath>

#include "oracles/jacobi_oracle.hpp"
#include "oracles/test_util.hpp"
#include "sgdstab/linalg.hpp"

using namespace sgdstab;

TEST_CASE("symmetrized averages and validates") {
  Matrix m(2, 2);
  m << 1.0, 2.0, 4.0, 3.0;
  const Matrix s = symmetrized(m);
  CHECK(s(0, 1) == 3.0);
  CHECK(s(1, 0) == 3.0);
  CHECK(s(0, 0) == 1.0);

  CHECK_THROWS_AS(symmetrized(Matrix::Zero(2, 3)), ValidationError);
  Matrix bad = Matrix::Zero(2, 2);
  bad(0, 0) = std::nan("");
  CHECK_THROWS_AS(symmetrized(bad), ValidationError);
}

TEST_CASE("sym_eigen_extremes on fixed matrices") {
  const auto id = sym_eigen_extremes(Matrix::Identity(3, 3));
  CHECK(id.lambda_max == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(id.lambda_min == doctest::Approx(1.0).epsilon(1e-12));

  const auto ones = sym_eigen_extremes(Matrix::Ones(4, 4));
  CHECK(ones.lambda_max == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(std::abs(ones.lambda_min) < 1e-12);
}

TEST_CASE("sym_eigen_extremes matches the Jacobi oracle") {
  Xoshiro256pp rng(101);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix m = testing::random_symmetric(rng, 6, 2.0);
    const auto ext = sym_eigen_extremes(m);
    const Vector oracle = testing::jacobi_eigenvalues(m);
    CHECK(std::abs(ext.lambda_max - oracle(5)) <=
          1e-9 * std::max(1.0, std::abs(oracle(5))));
    CHECK(std::abs(ext.lambda_min - oracle(0)) <=
          1e-9 * std::max(1.0, std::abs(oracle(0))));
  }
}

TEST_CASE("sym_eigen_extremes argument errors") {
  CHECK_THROWS_AS(sym_eigen_extremes(Matrix::Identity(2, 2), -1.0),
                  ValidationError);
  CHECK_THROWS_AS(sym_eigen_extremes(Matrix::Identity(2, 2), 1e-9, 0),
                  ConvergenceError);
  CHECK_THROWS_AS(sym_eigen_extremes(Matrix::Zero(2, 3)), ValidationError);
}

TEST_CASE("psd_sqrt on fixed matrices") {
  CHECK((psd_sqrt(Matrix::Identity(3, 3)) - Matrix::Identity(3, 3)).norm() <
        1e-12);

  Matrix diag = Matrix::Zero(2, 2);
  diag(0, 0) = 4.0;
  diag(1, 1) = 9.0;
  const Matrix root = psd_sqrt(diag);
  CHECK(root(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(root(1, 1) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(std::abs(root(0, 1)) < 1e-12);
}

TEST_CASE("psd_sqrt round-trips random PSD matrices") {
  Xoshiro256pp rng(202);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix m = testing::random_psd(rng, 5, 1.5);
    const Matrix root = psd_sqrt(m);
    CHECK((root - root.transpose()).norm() == 0.0);  // exactly symmetric
    CHECK((root * root - m).norm() <= 1e-9 * (1.0 + m.norm()));
  }
}

TEST_CASE("psd_sqrt rejects indefinite input") {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = 1.0;
  m(1, 1) = -1.0;
  try {
    psd_sqrt(m);
    FAIL("expected NotPsdError");
  } catch (const NotPsdError& err) {
    CHECK(err.lambda_min == doctest::Approx(-1.0).epsilon(1e-9));
  }
}

TEST_CASE("psd_sqrt is idempotent on orthogonal projections") {
  Xoshiro256pp rng(303);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix g = testing::random_matrix(rng, 6, 3);
    const Matrix q = Eigen::HouseholderQR<Matrix>(g)
                         .householderQ() *
                     Matrix::Identity(6, 3);
    const Matrix p = q * q.transpose();
    CHECK((psd_sqrt(p) - p).norm() <= 1e-9 * (1.0 + p.norm()));
  }
}

TEST_CASE("frobenius_inner") {
  CHECK(frobenius_inner(Matrix::Identity(4, 4), Matrix::Identity(4, 4)) ==
        doctest::Approx(4.0).epsilon(1e-14));

  Matrix e1 = Matrix::Zero(3, 3);
  e1(0, 0) = 1.0;
  Matrix e2 = Matrix::Zero(3, 3);
  e2(1, 1) = 1.0;
  CHECK(frobenius_inner(e1, e2) == 0.0);

  Xoshiro256pp rng(404);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix a = testing::random_symmetric(rng, 5);
    const Matrix b = testing::random_symmetric(rng, 5);
    double naive = 0.0;
    for (Index r = 0; r < 5; ++r) {
      for (Index c = 0; c < 5; ++c) naive += a(r, c) * b(r, c);
    }
    CHECK(std::abs(frobenius_inner(a, b) - naive) <= 1e-12);
  }

  CHECK_THROWS_AS(frobenius_inner(Matrix::Zero(2, 2), Matrix::Zero(3, 3)),
                  ValidationError);
}

TEST_CASE("check_psd") {
  CHECK(check_psd(Matrix::Identity(3, 3)));
  Matrix indef = Matrix::Zero(2, 2);
  indef(0, 0) = 1.0;
  indef(1, 1) = -1.0;
  CHECK_FALSE(check_psd(indef));

  Xoshiro256pp rng(505);
  for (int trial = 0; trial < 20; ++trial) {
    CHECK(check_psd(testing::random_psd(rng, 4)));
  }
}

TEST_CASE("psd_factor reconstructs and drops null directions") {
  Xoshiro256pp rng(606);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix g = testing::random_matrix(rng, 5, 2);
    const Matrix m = g * g.transpose();  // rank 2
    const Matrix w = psd_factor(m);
    CHECK(w.cols() == 2);
    CHECK((w * w.transpose() - m).norm() <= 1e-12 * (1.0 + m.norm()));
  }
  const Matrix zero_factor = psd_factor(Matrix::Zero(3, 3));
  CHECK(zero_factor.cols() == 0);
}

TEST_CASE("spectral inequalities on random symmetric matrices") {
  Xoshiro256pp rng(707);
  for (int trial = 0; trial < 30; ++trial) {
    const Index d = 2 + static_cast<Index>(rng.bounded(6));
    const Matrix m = testing::random_symmetric(rng, d, 1.3);
    const Vector eigs = sym_eigenvalues(m);
    const double lambda_min = eigs(0);
    const double lambda_max = eigs(d - 1);
    const double spectral = std::max(std::abs(lambda_min), std::abs(lambda_max));
    const double frob2 = frobenius_inner(m, m);

    // lambda_min <= tr/d <= lambda_max
    const double mean_eig = m.trace() / static_cast<double>(d);
    CHECK(lambda_min <= mean_eig + 1e-12);
    CHECK(mean_eig <= lambda_max + 1e-12);

    // ||M||_2^2 <= ||M||_F^2 <= d ||M||_2^2, and F^2 >= lambda_max^2
    CHECK(spectral * spectral <= frob2 * (1.0 + 1e-12));
    CHECK(frob2 <= static_cast<double>(d) * spectral * spectral * (1 + 1e-12));
    CHECK(lambda_max * lambda_max <= frob2 * (1.0 + 1e-12));

    // ||M||_F <= sum |lambda_i| <= sqrt(d) ||M||_F
    const double schatten1 = eigs.cwiseAbs().sum();
    const double frob = std::sqrt(frob2);
    CHECK(frob <= schatten1 * (1.0 + 1e-12));
    CHECK(schatten1 <= std::sqrt(static_cast<double>(d)) * frob * (1 + 1e-12));
  }
}
