#include "sgdstab/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "sgdstab/linalg.hpp"

namespace sgdstab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLogDoubleMax = 709.78;  // log(DBL_MAX), rounded down
constexpr double kRescaleHigh = 1e150;
constexpr double kRescaleLow = 1e-150;

// Certificates use strict inequalities and a cell sitting exactly on a
// certificate boundary must stay uncertified. Measured sharpness and coherence
// carry eigensolver rounding of a few ulps, so the strict comparison gets a
// relative guard band wide enough to absorb that noise and ten orders of
// magnitude below any real margin.
constexpr double kCertificateGuard = 1e-12;

void require_matching(const HessianEnsemble& ensemble,
                      const StabilityConfig& cfg) {
  cfg.validate();
  if (cfg.n != ensemble.n()) {
    throw ValidationError("config n = " + std::to_string(cfg.n) +
                          " does not match ensemble n = " +
                          std::to_string(ensemble.n()));
  }
}

// sum_i H_i * M * H_i through the stored factors: W (W^T M W) W^T per term.
void apply_hessian_product(const HessianEnsemble& ensemble, const Matrix& m,
                           Matrix& out) {
  out.setZero();
  for (int i = 0; i < ensemble.n(); ++i) {
    const Matrix& w = ensemble.factor(i);
    if (w.cols() == 0) continue;
    if (w.cols() == 1) {
      const double quad = w.col(0).dot(m * w.col(0));
      out.noalias() += quad * (w.col(0) * w.col(0).transpose());
    } else {
      const Matrix inner = w.transpose() * m * w;
      out.noalias() += w * inner * w.transpose();
    }
  }
}

// Power iteration from I with Frobenius normalization. Converged when the
// Rayleigh quotient moves by less than tol (relative) for 3 consecutive
// iterations. The iterate stays in the PSD cone, so the quotient approaches
// the cone-leading eigenvalue, which is the spectral radius.
template <typename ApplyFn>
double power_iteration_radius(ApplyFn&& apply, Index d, double tol,
                              int max_iter) {
  if (tol <= 0.0) {
    throw ValidationError("power iteration: tol must be positive");
  }
  Matrix m = Matrix::Identity(d, d) / std::sqrt(static_cast<double>(d));
  Matrix next(d, d);
  double rq_prev1 = kInf;  // previous iteration's quotient
  double rq_prev2 = kInf;  // the one before that
  int stable_iters = 0;
  for (int iter = 1; iter <= max_iter; ++iter) {
    apply(m, next);
    const double rq = frobenius_inner(m, next);
    const double norm = next.norm();
    if (norm == 0.0) {
      return 0.0;  // the operator annihilates a cone-interior point
    }
    m = next / norm;
    if (std::abs(rq - rq_prev1) <= tol * std::max(1.0, std::abs(rq))) {
      if (++stable_iters >= 3) {
        return rq;
      }
    } else {
      stable_iters = 0;
    }
    rq_prev2 = rq_prev1;
    rq_prev1 = rq;
  }
  throw ConvergenceError(
      "power iteration did not converge within " + std::to_string(max_iter) +
          " iterations",
      max_iter, rq_prev1, rq_prev2);
}

// coef^k * tr[T_k] with T_0 = I and T_j = apply(T_{j-1}), rescaling the
// iterate so divergent sequences report an overflow step instead of inf
// arithmetic. Exact double arithmetic is kept whenever no rescale triggers.
template <typename ApplyFn>
SeriesValue weighted_operator_trace(ApplyFn&& apply, Index d, int k,
                                    double coef) {
  if (k < 0) throw ValidationError("operator trace: k must be >= 0");
  if (k == 0) return SeriesValue{static_cast<double>(d), -1};
  if (coef == 0.0) return SeriesValue{0.0, -1};
  const double log_coef = std::log(coef);
  Matrix t = Matrix::Identity(d, d);
  Matrix next(d, d);
  double log_scale = 0.0;
  bool rescaled = false;
  for (int j = 1; j <= k; ++j) {
    apply(t, next);
    t = symmetrized(next);
    const double norm = t.norm();
    if (norm == 0.0) return SeriesValue{0.0, -1};
    if (!std::isfinite(norm)) return SeriesValue{kInf, j};
    const double est =
        static_cast<double>(j) * log_coef + log_scale + std::log(t.trace());
    if (est > kLogDoubleMax) return SeriesValue{kInf, j};
    if (norm > kRescaleHigh || norm < kRescaleLow) {
      log_scale += std::log(norm);
      t /= norm;
      rescaled = true;
    }
  }
  if (!rescaled) {
    return SeriesValue{std::pow(coef, k) * t.trace(), -1};
  }
  const double total =
      static_cast<double>(k) * log_coef + log_scale + std::log(t.trace());
  return SeriesValue{std::exp(total), -1};
}

}  // namespace

void StabilityConfig::validate() const {
  if (!std::isfinite(eta) || eta < 0.0) {
    throw ValidationError("config: eta must be finite and >= 0");
  }
  if (n < 1) throw ValidationError("config: n must be >= 1");
  if (batch < 1 || batch > n) {
    throw ValidationError("config: batch must be in [1, n]");
  }
}

double StabilityConfig::noise_coefficient() const {
  const double nn = static_cast<double>(n);
  return eta * eta * (1.0 / (nn * batch) - 1.0 / (nn * nn));
}

double noise_divergence_threshold(double sigma, const StabilityConfig& cfg) {
  // Coherence is >= 1 analytically; allow the eigensolver's rounding slack.
  if (!(sigma > 0.0)) {
    throw ValidationError("noise_divergence_threshold: sigma must be positive");
  }
  if (cfg.batch == cfg.n) return kInf;
  const double ratio = static_cast<double>(cfg.n) / cfg.batch - 1.0;
  return sigma / (cfg.eta * std::sqrt(ratio));
}

DivergenceCertificate divergence_certificate(double lambda1_h, double sigma,
                                             const StabilityConfig& cfg) {
  if (lambda1_h < -kPsdTol) {
    throw ValidationError("divergence_certificate: lambda1_h must be >= 0");
  }
  const double threshold =
      std::min(2.0 / cfg.eta, noise_divergence_threshold(sigma, cfg));
  return DivergenceCertificate{
      lambda1_h > threshold * (1.0 + kCertificateGuard), threshold};
}

double stable_sharpness_bound(double sigma, const StabilityConfig& cfg) {
  if (!(sigma > 0.0)) {
    throw ValidationError("stable_sharpness_bound: sigma must be positive");
  }
  const double denom = sigma + static_cast<double>(cfg.n) / cfg.batch - 1.0;
  return (2.0 * sigma / cfg.eta) / denom;
}

Matrix moment_operator_apply(const HessianEnsemble& ensemble,
                             const StabilityConfig& cfg,
                             const Eigen::Ref<const Matrix>& m) {
  require_matching(ensemble, cfg);
  if (m.rows() != ensemble.dim() || m.cols() != ensemble.dim()) {
    throw ValidationError("moment_operator_apply: dimension mismatch");
  }
  const Index d = ensemble.dim();
  const Matrix j = Matrix::Identity(d, d) - cfg.eta * mean_hessian(ensemble);
  Matrix result = j * m * j;
  const double c = cfg.noise_coefficient();
  if (c != 0.0) {
    for (const Matrix& h : ensemble.hessians()) {
      result.noalias() += c * (h * m * h);
    }
  }
  return symmetrized(result);
}

SeriesValue exact_second_moment(const HessianEnsemble& ensemble,
                                const StabilityConfig& cfg, int k) {
  require_matching(ensemble, cfg);
  const Index d = ensemble.dim();
  const Matrix j = Matrix::Identity(d, d) - cfg.eta * mean_hessian(ensemble);
  const double c = cfg.noise_coefficient();
  Matrix noise(d, d);
  auto apply = [&](const Matrix& m, Matrix& out) {
    out.noalias() = j * m * j;
    if (c != 0.0) {
      apply_hessian_product(ensemble, m, noise);
      out.noalias() += c * noise;
    }
  };
  return weighted_operator_trace(apply, d, k, 1.0);
}

double moment_spectral_radius(const HessianEnsemble& ensemble,
                              const StabilityConfig& cfg, double tol,
                              int max_iter) {
  require_matching(ensemble, cfg);
  const Index d = ensemble.dim();
  const Matrix j = Matrix::Identity(d, d) - cfg.eta * mean_hessian(ensemble);
  const double c = cfg.noise_coefficient();
  Matrix noise(d, d);
  auto apply = [&](const Matrix& m, Matrix& out) {
    out.noalias() = j * m * j;
    if (c != 0.0) {
      apply_hessian_product(ensemble, m, noise);
      out.noalias() += c * noise;
    }
  };
  return power_iteration_radius(apply, d, tol, max_iter);
}

double noise_series_rate(const HessianEnsemble& ensemble,
                         const StabilityConfig& cfg, double tol,
                         int max_iter) {
  require_matching(ensemble, cfg);
  const double c = cfg.noise_coefficient();
  if (c == 0.0) return 0.0;
  auto apply = [&](const Matrix& m, Matrix& out) {
    apply_hessian_product(ensemble, m, out);
  };
  return c * power_iteration_radius(apply, ensemble.dim(), tol, max_iter);
}

SeriesValue noise_series_term(const HessianEnsemble& ensemble,
                              const StabilityConfig& cfg, int k) {
  require_matching(ensemble, cfg);
  auto apply = [&](const Matrix& m, Matrix& out) {
    apply_hessian_product(ensemble, m, out);
  };
  return weighted_operator_trace(apply, ensemble.dim(), k,
                                 cfg.noise_coefficient());
}

namespace {

// Strict window eps/eta < lambda < (2-eps)/eta for every eigenvalue; returns
// the first violator through `offender` when the check fails.
bool eigen_window_holds(const Vector& eigenvalues, double eta, double epsilon,
                        double* offender) {
  for (Index i = 0; i < eigenvalues.size(); ++i) {
    const double lambda = eigenvalues(i);
    if (!(lambda * eta > epsilon) || !(lambda * eta < 2.0 - epsilon)) {
      if (offender != nullptr) *offender = lambda;
      return false;
    }
  }
  return true;
}

}  // namespace

bool contraction_certificate(const HessianEnsemble& ensemble,
                             const StabilityConfig& cfg, double epsilon) {
  require_matching(ensemble, cfg);
  if (!(epsilon > 0.0) || !(epsilon < 1.0)) {
    throw ValidationError("contraction_certificate: epsilon must be in (0,1)");
  }
  const Vector eigs = sym_eigenvalues(mean_hessian(ensemble));
  if (!eigen_window_holds(eigs, cfg.eta, epsilon, nullptr)) return false;
  return noise_series_rate(ensemble, cfg) < epsilon;
}

SeriesValue second_moment_lower_bound(const HessianEnsemble& ensemble,
                                      const StabilityConfig& cfg, int k) {
  require_matching(ensemble, cfg);
  if (k < 1) {
    throw ValidationError("second_moment_lower_bound: requires k >= 1");
  }
  const Vector eigs = sym_eigenvalues(mean_hessian(ensemble));
  double trace_j2k = 0.0;
  for (Index i = 0; i < eigs.size(); ++i) {
    trace_j2k += std::pow(1.0 - cfg.eta * eigs(i), 2 * k);
  }
  if (!std::isfinite(trace_j2k)) return SeriesValue{kInf, k};
  const SeriesValue series = noise_series_term(ensemble, cfg, k);
  if (series.overflowed()) return series;
  const double value = trace_j2k + series.value;
  if (!std::isfinite(value)) return SeriesValue{kInf, k};
  return SeriesValue{value, -1};
}

SeriesValue second_moment_upper_bound(const HessianEnsemble& ensemble,
                                      const StabilityConfig& cfg,
                                      double epsilon, int k) {
  require_matching(ensemble, cfg);
  if (!(epsilon > 0.0) || !(epsilon < 1.0)) {
    throw ValidationError("second_moment_upper_bound: epsilon must be in (0,1)");
  }
  if (k < 1) {
    throw ValidationError("second_moment_upper_bound: requires k >= 1");
  }
  const Vector eigs = sym_eigenvalues(mean_hessian(ensemble));
  double offender = 0.0;
  if (!eigen_window_holds(eigs, cfg.eta, epsilon, &offender)) {
    throw ValidationError(
        "second_moment_upper_bound: Jacobian not contracting at epsilon = " +
        std::to_string(epsilon) + ", offending eigenvalue " +
        std::to_string(offender));
  }

  // Noise-series terms tr[N_r] for r = 0..k, sharing one operator iterate.
  const Index d = ensemble.dim();
  const double c = cfg.noise_coefficient();
  std::vector<double> term(k + 1, 0.0);
  term[0] = static_cast<double>(d);
  if (c != 0.0) {
    const double log_c = std::log(c);
    Matrix t = Matrix::Identity(d, d);
    Matrix next(d, d);
    double log_scale = 0.0;
    for (int r = 1; r <= k; ++r) {
      apply_hessian_product(ensemble, t, next);
      t = symmetrized(next);
      const double norm = t.norm();
      if (norm == 0.0) break;  // remaining terms vanish
      const double log_term =
          static_cast<double>(r) * log_c + log_scale + std::log(t.trace());
      if (!std::isfinite(norm) || log_term > kLogDoubleMax) {
        return SeriesValue{kInf, r};
      }
      term[r] = std::exp(log_term);
      if (norm > kRescaleHigh || norm < kRescaleLow) {
        log_scale += std::log(norm);
        t /= norm;
      }
    }
  }

  // Pascal row for C(k, r) in doubles.
  std::vector<double> binom(k + 1, 0.0);
  binom[0] = 1.0;
  for (int row = 1; row <= k; ++row) {
    for (int r = row; r >= 1; --r) {
      binom[r] += binom[r - 1];
    }
  }

  const double contraction = (1.0 - epsilon) * (1.0 - epsilon);
  double sum = 0.0;
  double weight = std::pow(contraction, k);  // (1-eps)^{2(k-r)} at r = 0
  for (int r = 0; r <= k; ++r) {
    sum += weight * binom[r] * term[r];
    if (!std::isfinite(sum)) return SeriesValue{kInf, r};
    weight /= contraction;
  }
  return SeriesValue{sum, -1};
}

EnsembleAnalysis analyze_ensemble(const HessianEnsemble& ensemble,
                                  double tol) {
  EnsembleAnalysis analysis;
  analysis.coh = coherence(ensemble);
  analysis.mean_h = mean_hessian(ensemble);
  analysis.mean_h_eigenvalues = sym_eigenvalues(analysis.mean_h);
  auto apply = [&](const Matrix& m, Matrix& out) {
    apply_hessian_product(ensemble, m, out);
  };
  analysis.product_radius =
      power_iteration_radius(apply, ensemble.dim(), tol, 50000);
  return analysis;
}

ConditionReport evaluate_conditions(const HessianEnsemble& ensemble,
                                    const EnsembleAnalysis& analysis,
                                    const StabilityConfig& cfg,
                                    bool with_rho) {
  require_matching(ensemble, cfg);
  ConditionReport report;
  report.sigma = analysis.coh.sigma;
  report.lambda1_h = analysis.coh.lambda1_H;
  report.gd_unstable =
      report.lambda1_h > (2.0 / cfg.eta) * (1.0 + kCertificateGuard);
  report.divergence_threshold = noise_divergence_threshold(report.sigma, cfg);
  report.divergence_certified =
      divergence_certificate(report.lambda1_h, report.sigma, cfg).certified;
  report.stable_bound = stable_sharpness_bound(report.sigma, cfg);
  report.stable_construction_exists =
      report.lambda1_h < report.stable_bound * (1.0 - kCertificateGuard);
  report.noise_rate = cfg.noise_coefficient() * analysis.product_radius;
  if (with_rho) {
    report.rho = moment_spectral_radius(ensemble, cfg);
  }
  const Vector& eigs = analysis.mean_h_eigenvalues;
  const double window_cap =
      std::min({cfg.eta * eigs(0), 2.0 - cfg.eta * eigs(eigs.size() - 1), 1.0});
  if (report.noise_rate < window_cap) {
    report.epsilon_window = std::make_pair(report.noise_rate, window_cap);
  }
  return report;
}

ConditionReport evaluate_conditions(const HessianEnsemble& ensemble,
                                    const StabilityConfig& cfg,
                                    bool with_rho) {
  return evaluate_conditions(ensemble, analyze_ensemble(ensemble), cfg,
                             with_rho);
}

}  // namespace sgdstab
