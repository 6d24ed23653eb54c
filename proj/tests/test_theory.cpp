#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <vector>

#include "oracles/test_util.hpp"
#include "sgdstab/linalg.hpp"
#include "sgdstab/theory.hpp"

using namespace sgdstab;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// n=2, H = {[2], [2]}, eta = 0.5, B = 1: J = 0, c = 1/16, A = 0.5 * id.
HessianEnsemble contracting_pair() { return make_aligned_ensemble(2, 2, 2.0); }
const StabilityConfig kContractingCfg{0.5, 1, 2};

// n=2, H = {[4], [0]}, eta = 0.6, B = 1: A = 1.48 * id.
HessianEnsemble divergent_pair() { return make_aligned_ensemble(2, 1, 2.0); }
const StabilityConfig kDivergentCfg{0.6, 1, 2};

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

}  // namespace

TEST_CASE("config validation and noise coefficient") {
  CHECK_THROWS_AS((StabilityConfig{0.5, 0, 2}.validate()), ValidationError);
  CHECK_THROWS_AS((StabilityConfig{0.5, 3, 2}.validate()), ValidationError);
  CHECK_THROWS_AS((StabilityConfig{-0.1, 1, 2}.validate()), ValidationError);
  StabilityConfig frozen{0.0, 1, 2};
  frozen.validate();  // eta = 0 is a legal degenerate configuration

  CHECK(StabilityConfig{0.7, 4, 4}.noise_coefficient() == 0.0);
  CHECK(kContractingCfg.noise_coefficient() ==
        doctest::Approx(0.0625).epsilon(1e-14));
  CHECK(kDivergentCfg.noise_coefficient() ==
        doctest::Approx(0.09).epsilon(1e-14));
}

TEST_CASE("divergence certificate fixtures") {
  {
    const auto cert = divergence_certificate(2.0, 1.0, StabilityConfig{0.6, 1, 2});
    CHECK(cert.threshold == doctest::Approx(1.0 / 0.6).epsilon(1e-12));
    CHECK(cert.certified);
  }
  {
    const StabilityConfig cfg{0.8, 5, 100};
    const auto cert = divergence_certificate(2.0, 5.0, cfg);
    CHECK(cert.threshold ==
          doctest::Approx(6.25 / std::sqrt(19.0)).epsilon(1e-12));
    CHECK(cert.certified);
    CHECK(noise_divergence_threshold(5.0, cfg) ==
          doctest::Approx(6.25 / std::sqrt(19.0)).epsilon(1e-12));
  }
  {
    // The noise branch alone sits at 3.125 here; the GD branch 2/eta = 2.5
    // is the binding threshold and the certificate stays off.
    const StabilityConfig cfg{0.8, 20, 100};
    CHECK(noise_divergence_threshold(5.0, cfg) ==
          doctest::Approx(3.125).epsilon(1e-12));
    const auto cert = divergence_certificate(2.0, 5.0, cfg);
    CHECK(cert.threshold == doctest::Approx(2.5).epsilon(1e-12));
    CHECK_FALSE(cert.certified);
  }
  CHECK(noise_divergence_threshold(5.0, StabilityConfig{0.8, 100, 100}) ==
        kInf);
  // Strictness at the boundary: equal threshold is not certified.
  const auto boundary = divergence_certificate(2.5, 5.0,
                                               StabilityConfig{0.8, 20, 100});
  CHECK_FALSE(boundary.certified);
}

TEST_CASE("stable sharpness bound fixtures") {
  CHECK(stable_sharpness_bound(5.0, StabilityConfig{0.8, 50, 100}) ==
        doctest::Approx(12.5 / 6.0).epsilon(1e-12));
  CHECK(stable_sharpness_bound(5.0, StabilityConfig{0.8, 40, 100}) ==
        doctest::Approx(12.5 / 6.5).epsilon(1e-12));
  CHECK(stable_sharpness_bound(7.0, StabilityConfig{0.4, 7, 7}) ==
        doctest::Approx(2.0 / 0.4).epsilon(1e-12));
  // Fig-1a geometry at eta = 0.8, lambda1 = 2: the divergence boundary
  // crosses between B = 9 and B = 10, the stability one between 40 and 45.
  CHECK(divergence_certificate(2.0, 5.0, StabilityConfig{0.8, 9, 100})
            .certified);
  CHECK_FALSE(divergence_certificate(2.0, 5.0, StabilityConfig{0.8, 10, 100})
                  .certified);
  CHECK(stable_sharpness_bound(5.0, StabilityConfig{0.8, 45, 100}) > 2.0);
  CHECK(stable_sharpness_bound(5.0, StabilityConfig{0.8, 40, 100}) < 2.0);
}

TEST_CASE("moment operator matches direct expectation over subsets") {
  Xoshiro256pp rng(910);
  for (int trial = 0; trial < 6; ++trial) {
    const int n = 2;
    const Index d = 2;
    const HessianEnsemble ensemble = testing::random_ensemble(rng, n, d);
    const int batch = 1 + static_cast<int>(rng.bounded(2));
    const StabilityConfig cfg{0.4, batch, n};
    const Matrix m = testing::random_symmetric(rng, d);

    // E[J_hat M J_hat] by enumerating the four Bernoulli subsets.
    const double p = static_cast<double>(batch) / n;
    Matrix expected = Matrix::Zero(d, d);
    for (int mask = 0; mask < 4; ++mask) {
      Matrix jac = Matrix::Identity(d, d);
      int count = 0;
      for (int i = 0; i < n; ++i) {
        if (mask >> i & 1) {
          jac -= (cfg.eta / batch) * ensemble.hessian(i);
          ++count;
        }
      }
      expected += std::pow(p, count) * std::pow(1 - p, n - count) *
                  (jac * m * jac);
    }
    const Matrix actual = moment_operator_apply(ensemble, cfg, m);
    CHECK((actual - expected).norm() <= 1e-12 * (1.0 + expected.norm()));
    CHECK((actual - actual.transpose()).norm() == 0.0);
  }
}

TEST_CASE("moment operator GD limit and base case") {
  Xoshiro256pp rng(911);
  const HessianEnsemble ensemble = testing::random_ensemble(rng, 3, 3);
  const Matrix m = testing::random_symmetric(rng, 3);
  const Matrix h = mean_hessian(ensemble);

  const StabilityConfig gd{0.7, 3, 3};
  const Matrix j = Matrix::Identity(3, 3) - 0.7 * h;
  CHECK((moment_operator_apply(ensemble, gd, m) - j * m * j).norm() <=
        1e-12 * (1.0 + m.norm()));

  // A(I) = I - 2 eta H + eta^2 H^2 + c * sum H_i^2
  const StabilityConfig noisy{0.7, 1, 3};
  Matrix base = Matrix::Identity(3, 3) - 1.4 * h + 0.49 * h * h;
  for (const Matrix& hi : ensemble.hessians()) {
    base += noisy.noise_coefficient() * hi * hi;
  }
  CHECK((moment_operator_apply(ensemble, noisy, Matrix::Identity(3, 3)) - base)
            .norm() <= 1e-12 * (1.0 + base.norm()));

  // scalar fixture: J = 0, so A([1]) = c * (4 + 4) = [0.5]
  const Matrix one = Matrix::Ones(1, 1);
  CHECK(moment_operator_apply(contracting_pair(), kContractingCfg, one)(0, 0) ==
        doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("exact second moment on the scalar fixtures") {
  CHECK(exact_second_moment(contracting_pair(), kContractingCfg, 0).value ==
        1.0);
  CHECK(exact_second_moment(contracting_pair(), kContractingCfg, 1).value ==
        doctest::Approx(0.5).epsilon(1e-12));
  CHECK(exact_second_moment(contracting_pair(), kContractingCfg, 3).value ==
        doctest::Approx(0.125).epsilon(1e-12));
  CHECK(exact_second_moment(divergent_pair(), kDivergentCfg, 2).value ==
        doctest::Approx(2.1904).epsilon(1e-12));
}

TEST_CASE("exact second moment equals the GD trace at B = n") {
  Xoshiro256pp rng(912);
  const HessianEnsemble ensemble = testing::random_ensemble(rng, 4, 3);
  const StabilityConfig cfg{0.6, 4, 4};
  const Vector eigs = sym_eigenvalues(mean_hessian(ensemble));
  for (const int k : {1, 3, 7}) {
    double expected = 0.0;
    for (Index i = 0; i < eigs.size(); ++i) {
      expected += std::pow(1.0 - 0.6 * eigs(i), 2 * k);
    }
    CHECK(exact_second_moment(ensemble, cfg, k).value ==
          doctest::Approx(expected).epsilon(1e-11));
  }
}

TEST_CASE("exact second moment reports the overflow step") {
  const SeriesValue overflowed =
      exact_second_moment(divergent_pair(), kDivergentCfg, 2000);
  CHECK(overflowed.overflowed());
  CHECK(std::isinf(overflowed.value));
  // growth rate 1.48 per step: double range ends near step 1811
  CHECK(overflowed.overflow_step >= 1805);
  CHECK(overflowed.overflow_step <= 1815);
}

TEST_CASE("moment spectral radius fixtures and GD limit") {
  CHECK(moment_spectral_radius(contracting_pair(), kContractingCfg) ==
        doctest::Approx(0.5).epsilon(1e-9));
  CHECK(moment_spectral_radius(divergent_pair(), kDivergentCfg) ==
        doctest::Approx(1.48).epsilon(1e-9));

  Xoshiro256pp rng(913);
  const HessianEnsemble ensemble = testing::random_ensemble(rng, 4, 3);
  const StabilityConfig gd{0.9, 4, 4};
  const Vector eigs = sym_eigenvalues(mean_hessian(ensemble));
  double expected = 0.0;
  for (Index i = 0; i < eigs.size(); ++i) {
    expected = std::max(expected, std::pow(1.0 - 0.9 * eigs(i), 2));
  }
  CHECK(moment_spectral_radius(ensemble, gd) ==
        doctest::Approx(expected).epsilon(1e-8));
}

TEST_CASE("moment spectral radius matches the vectorized operator") {
  Xoshiro256pp rng(914);
  for (int trial = 0; trial < 6; ++trial) {
    const Index d = 2 + static_cast<Index>(rng.bounded(2));  // d in {2,3}
    const int n = 2 + static_cast<int>(rng.bounded(2));
    const HessianEnsemble ensemble = testing::random_ensemble(rng, n, d);
    const int batch = 1 + static_cast<int>(rng.bounded(n));
    const StabilityConfig cfg{0.5, batch, n};

    const Matrix j =
        Matrix::Identity(d, d) - cfg.eta * mean_hessian(ensemble);
    Matrix lifted = kron(j, j);
    for (const Matrix& h : ensemble.hessians()) {
      lifted += cfg.noise_coefficient() * kron(h, h);
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(lifted);
    const double top = solver.eigenvalues()(d * d - 1);
    const double bottom = solver.eigenvalues()(0);
    // cone-preserving: the leading eigenvalue is the radius
    CHECK(top >= std::abs(bottom) * (1.0 - 1e-10));
    CHECK(moment_spectral_radius(ensemble, cfg) ==
          doctest::Approx(top).epsilon(1e-7));
  }
}

TEST_CASE("power iteration reports non-convergence with its quotients") {
  Xoshiro256pp rng(919);
  const HessianEnsemble ensemble = testing::random_ensemble(rng, 3, 4);
  try {
    moment_spectral_radius(ensemble, StabilityConfig{0.5, 1, 3}, 1e-10, 2);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& err) {
    CHECK(err.iterations == 2);
    CHECK(std::isfinite(err.last_estimate));
  }
  CHECK_THROWS_AS(
      moment_spectral_radius(ensemble, StabilityConfig{0.5, 1, 3}, -1.0),
      ValidationError);
}

TEST_CASE("noise series rate") {
  CHECK(noise_series_rate(contracting_pair(), StabilityConfig{0.5, 2, 2}) ==
        0.0);
  CHECK(noise_series_rate(contracting_pair(), kContractingCfg) ==
        doctest::Approx(0.5).epsilon(1e-9));

  // mutually orthogonal m e_i e_i^T: the product operator acts with m^2
  const double m = 3.0;
  std::vector<Matrix> orth;
  for (Index i = 0; i < 4; ++i) {
    Matrix h = Matrix::Zero(4, 4);
    h(i, i) = m;
    orth.push_back(h);
  }
  const HessianEnsemble ensemble(orth);
  const StabilityConfig cfg{0.5, 1, 4};
  CHECK(noise_series_rate(ensemble, cfg) ==
        doctest::Approx(cfg.noise_coefficient() * m * m).epsilon(1e-9));
}

TEST_CASE("noise series term") {
  const HessianEnsemble pair = contracting_pair();
  CHECK(noise_series_term(pair, kContractingCfg, 0).value == 1.0);  // d = 1
  // k = 1: c * sum ||H_i||_F^2 = 0.0625 * 8
  CHECK(noise_series_term(pair, kContractingCfg, 1).value ==
        doctest::Approx(0.5).epsilon(1e-12));

  Xoshiro256pp rng(915);
  const int n = 3;
  const Index d = 2;
  const HessianEnsemble ensemble = testing::random_ensemble(rng, n, d);
  const StabilityConfig cfg{0.7, 1, 3};
  const double c = cfg.noise_coefficient();
  double oracle = 0.0;
  for (int y1 = 0; y1 < n; ++y1) {
    for (int y2 = 0; y2 < n; ++y2) {
      for (int y3 = 0; y3 < n; ++y3) {
        const Matrix product = ensemble.hessian(y3) * ensemble.hessian(y2) *
                               ensemble.hessian(y1);
        oracle += product.squaredNorm();
      }
    }
  }
  oracle *= c * c * c;
  CHECK(noise_series_term(ensemble, cfg, 3).value ==
        doctest::Approx(oracle).epsilon(1e-10));
}

TEST_CASE("contraction certificate") {
  // GD at eps = 0.5 with H = I, eta = 1
  const HessianEnsemble identity_ensemble(
      std::vector<Matrix>(3, Matrix::Identity(2, 2)));
  CHECK(contraction_certificate(identity_ensemble, StabilityConfig{1.0, 3, 3},
                                0.5));

  const HessianEnsemble pair = contracting_pair();
  CHECK(contraction_certificate(pair, kContractingCfg, 0.6));
  CHECK_FALSE(contraction_certificate(pair, kContractingCfg, 0.4));
  // boundary eps == rate is not certified (strict inequality)
  CHECK_FALSE(contraction_certificate(pair, kContractingCfg, 0.5));

  CHECK_THROWS_AS(contraction_certificate(pair, kContractingCfg, 0.0),
                  ValidationError);
  CHECK_THROWS_AS(contraction_certificate(pair, kContractingCfg, 1.0),
                  ValidationError);
}

TEST_CASE("second moment lower bound") {
  const HessianEnsemble pair = contracting_pair();
  CHECK_THROWS_AS(second_moment_lower_bound(pair, kContractingCfg, 0),
                  ValidationError);
  // tight at k = 1
  CHECK(second_moment_lower_bound(pair, kContractingCfg, 1).value ==
        doctest::Approx(
            exact_second_moment(pair, kContractingCfg, 1).value)
            .epsilon(1e-12));

  Xoshiro256pp rng(916);
  const HessianEnsemble ensemble = testing::random_ensemble(rng, 3, 2);
  const StabilityConfig cfg{0.5, 1, 3};
  for (int k = 1; k <= 5; ++k) {
    CHECK(second_moment_lower_bound(ensemble, cfg, k).value <=
          exact_second_moment(ensemble, cfg, k).value * (1.0 + 1e-9) + 1e-12);
  }
}

TEST_CASE("second moment upper bound fixtures") {
  const HessianEnsemble pair = contracting_pair();
  // eps = 0.6, k = 2: 0.4^4 + 2 * 0.4^2 * 0.5 + 0.25 = 0.4356
  CHECK(second_moment_upper_bound(pair, kContractingCfg, 0.6, 2).value ==
        doctest::Approx(0.4356).epsilon(1e-12));
  CHECK(second_moment_upper_bound(pair, kContractingCfg, 0.6, 2).value >=
        exact_second_moment(pair, kContractingCfg, 2).value);

  // GD limit: only the r = 0 term survives
  const HessianEnsemble bench = make_benchmark_ensemble(4, 2);
  const StabilityConfig gd{0.4, 4, 4};
  for (const int k : {1, 2, 5}) {
    const double bound = second_moment_upper_bound(bench, gd, 0.3, k).value;
    CHECK(bound == doctest::Approx(3.0 * std::pow(0.7, 2 * k)).epsilon(1e-12));
    CHECK(bound >= exact_second_moment(bench, gd, k).value);
  }

  // the divergent pair still has a contracting Jacobian at eps = 0.5
  // (eta * lambda = 1.2), so the bound applies and covers the growth
  const double divergent_bound =
      second_moment_upper_bound(divergent_pair(), kDivergentCfg, 0.5, 2).value;
  CHECK(divergent_bound >=
        exact_second_moment(divergent_pair(), kDivergentCfg, 2).value);
  // at eps = 0.9 the window (0.9, 1.1) excludes eta * lambda = 1.2
  CHECK_THROWS_AS(
      second_moment_upper_bound(divergent_pair(), kDivergentCfg, 0.9, 2),
      ValidationError);
}

TEST_CASE("lower / exact / upper sandwich on window ensembles") {
  Xoshiro256pp rng(917);
  for (int trial = 0; trial < 8; ++trial) {
    const int n = 2 + static_cast<int>(rng.bounded(4));
    const Index d = 1 + static_cast<Index>(rng.bounded(4));
    double eps = 0.0;
    const HessianEnsemble ensemble =
        testing::random_window_ensemble(rng, n, d, 1.0, &eps);
    REQUIRE(eps > 0.0);
    const int batch = 1 + static_cast<int>(rng.bounded(n));
    const StabilityConfig cfg{1.0, batch, n};
    for (int k = 1; k <= 10; ++k) {
      const double lower = second_moment_lower_bound(ensemble, cfg, k).value;
      const double exact = exact_second_moment(ensemble, cfg, k).value;
      const double upper =
          second_moment_upper_bound(ensemble, cfg, eps, k).value;
      CHECK(lower <= exact * (1.0 + 1e-9) + 1e-12);
      CHECK(exact <= upper * (1.0 + 1e-9) + 1e-12);
    }
  }
}

TEST_CASE("rho is non-increasing in batch size on the benchmark family") {
  for (const int sigma : {2, 5}) {
    const HessianEnsemble ensemble = make_benchmark_ensemble(20, sigma);
    double previous = kInf;
    for (const int batch : {1, 2, 4, 5, 10, 20}) {
      const double rho =
          moment_spectral_radius(ensemble, StabilityConfig{0.6, batch, 20});
      CHECK(rho <= previous * (1.0 + 1e-7));
      previous = rho;
    }
  }
}

TEST_CASE("squared scaling of the noise threshold at small B/n") {
  // threshold(c*eta, c^2*B) / threshold(eta, B) -> 1 as B/n -> 0
  const double sigma = 5.0;
  for (const int n : {50, 100}) {
    struct Scale {
      double factor;   // c
      int batch_mult;  // c^2, kept integral so batches stay integral
    };
    for (const Scale scale : {Scale{std::sqrt(2.0), 2},
                              Scale{std::sqrt(3.0), 3}}) {
      for (int batch = 1; batch <= n / 10; ++batch) {
        const double base = noise_divergence_threshold(
            sigma, StabilityConfig{0.8, batch, n});
        const double scaled = noise_divergence_threshold(
            sigma,
            StabilityConfig{0.8 * scale.factor, batch * scale.batch_mult, n});
        const double ratio = scaled / base;
        CHECK(std::abs(ratio - 1.0) <=
              2.0 * static_cast<double>(batch) / n + 1e-12);
      }
    }
    // downscaling direction, even batches so B/2 stays integral
    for (int batch = 2; batch <= n / 10; batch += 2) {
      const double base =
          noise_divergence_threshold(sigma, StabilityConfig{0.8, batch, n});
      const double scaled = noise_divergence_threshold(
          sigma, StabilityConfig{0.8 * std::sqrt(0.5), batch / 2, n});
      CHECK(std::abs(scaled / base - 1.0) <=
            2.0 * static_cast<double>(batch) / n + 1e-12);
    }
  }
}

TEST_CASE("certificates are consistent with the exact radius") {
  // divergence certificate => rho > 1 (scalar fixture)
  {
    const auto cert = divergence_certificate(2.0, 1.0, kDivergentCfg);
    CHECK(cert.certified);
    CHECK(moment_spectral_radius(divergent_pair(), kDivergentCfg) > 1.0);
  }
  // benchmark cells, small scale: certified => rho > 1
  for (const int sigma : {1, 2, 3}) {
    const HessianEnsemble ensemble = make_benchmark_ensemble(12, sigma);
    const EnsembleAnalysis analysis = analyze_ensemble(ensemble);
    for (int batch = 1; batch <= 12; ++batch) {
      for (const double eta : {0.5, 0.8}) {
        const StabilityConfig cfg{eta, batch, 12};
        const auto cert =
            divergence_certificate(analysis.coh.lambda1_H, analysis.coh.sigma,
                                   cfg);
        if (cert.certified) {
          CHECK(moment_spectral_radius(ensemble, cfg) > 1.0);
        }
      }
    }
  }
  // aligned construction (d = 1): lambda1 below the stable bound <=> rho < 1
  {
    const StabilityConfig cfg{0.7, 3, 10};
    const double bound = stable_sharpness_bound(4.0, cfg);
    CHECK(bound == doctest::Approx((8.0 / 0.7) / (4.0 + 10.0 / 3.0 - 1.0))
                       .epsilon(1e-12));
    for (const double lambda1 : {0.5, 1.5, 0.98 * bound}) {
      CHECK(moment_spectral_radius(make_aligned_ensemble(10, 4, lambda1),
                                   cfg) < 1.0);
    }
    for (const double lambda1 : {1.02 * bound, 2.5}) {
      CHECK(moment_spectral_radius(make_aligned_ensemble(10, 4, lambda1),
                                   cfg) > 1.0);
    }
  }
}

TEST_CASE("below the stable bound the second moment stays bounded to k=1000") {
  const StabilityConfig cfg{0.7, 3, 10};
  const double bound = stable_sharpness_bound(4.0, cfg);
  const HessianEnsemble ensemble =
      make_aligned_ensemble(10, 4, 0.9 * bound);
  const double d = static_cast<double>(ensemble.dim());
  for (const int k : {1, 10, 100, 1000}) {
    const SeriesValue moment = exact_second_moment(ensemble, cfg, k);
    CHECK_FALSE(moment.overflowed());
    CHECK(moment.value <= d + 1e-9);
  }
}

TEST_CASE("evaluate_conditions assembles the report") {
  const HessianEnsemble pair = contracting_pair();
  const ConditionReport report =
      evaluate_conditions(pair, kContractingCfg, /*with_rho=*/true);
  CHECK(report.sigma == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(report.lambda1_h == doctest::Approx(2.0).epsilon(1e-9));
  CHECK_FALSE(report.gd_unstable);  // 2 < 2/0.5
  CHECK(report.noise_rate == doctest::Approx(0.5).epsilon(1e-9));
  REQUIRE(report.rho.has_value());
  CHECK(*report.rho == doctest::Approx(0.5).epsilon(1e-9));
  REQUIRE(report.epsilon_window.has_value());
  CHECK(report.epsilon_window->first == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(report.epsilon_window->second == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(contraction_certificate(pair, kContractingCfg,
                                0.5 * (report.epsilon_window->first +
                                       report.epsilon_window->second)));

  // GD limit: no noise, radius is the squared GD contraction factor
  const HessianEnsemble bench = make_benchmark_ensemble(10, 2);
  const StabilityConfig gd{0.6, 10, 10};
  const ConditionReport gd_report = evaluate_conditions(bench, gd, true);
  CHECK(gd_report.noise_rate == 0.0);
  CHECK(gd_report.divergence_threshold == kInf);
  const Vector eigs = sym_eigenvalues(mean_hessian(bench));
  double expected = 0.0;
  for (Index i = 0; i < eigs.size(); ++i) {
    expected = std::max(expected, std::pow(1.0 - 0.6 * eigs(i), 2));
  }
  CHECK(*gd_report.rho == doctest::Approx(expected).epsilon(1e-8));

  // report invariant: certificate flag == (gd branch || noise branch)
  Xoshiro256pp rng(918);
  for (int trial = 0; trial < 10; ++trial) {
    const HessianEnsemble random = testing::random_ensemble(rng, 4, 2);
    const StabilityConfig cfg{0.3 + 0.2 * static_cast<double>(rng.bounded(4)),
                              1 + static_cast<int>(rng.bounded(4)), 4};
    const ConditionReport r = evaluate_conditions(random, cfg, false);
    CHECK(r.divergence_certified ==
          (r.gd_unstable || r.lambda1_h > r.divergence_threshold));
    CHECK(r.stable_construction_exists == (r.lambda1_h < r.stable_bound));
    CHECK_FALSE((r.divergence_certified && r.stable_construction_exists));
  }
}
