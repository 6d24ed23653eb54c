#pragma once

#include <optional>
#include <utility>

#include "sgdstab/common.hpp"
#include "sgdstab/ensemble.hpp"

namespace sgdstab {

// Hyperparameters of the stochastic dynamics. batch == n recovers plain
// gradient descent. eta == 0 is accepted (a frozen trajectory) even though
// the interesting regime is eta > 0.
struct StabilityConfig {
  double eta = 0.1;
  int batch = 1;
  int n = 1;

  void validate() const;

  // c = eta^2 * (1/(n*batch) - 1/n^2); exactly zero when batch == n. Scales
  // the sampling-noise term of the second-moment recursion.
  double noise_coefficient() const;
};

// A value of the form coef^k * tr[T_k] that may exceed double range. When the
// running estimate first crosses the representable range, `value` is +inf and
// `overflow_step` records the step index.
struct SeriesValue {
  double value = 0.0;
  int overflow_step = -1;
  bool overflowed() const { return overflow_step >= 0; }
};

/// Sufficient-divergence threshold contributed by sampling noise:
/// (sigma/eta) * (n/B - 1)^{-1/2}; +inf when batch == n (GD has no noise).
double noise_divergence_threshold(double sigma, const StabilityConfig& cfg);

struct DivergenceCertificate {
  // Strict inequality with a 1e-12 relative guard band: a cell computed to
  // sit exactly on the boundary stays uncertified even when the measured
  // inputs carry a few ulps of eigensolver rounding.
  bool certified;
  double threshold;  // min(2/eta, noise_divergence_threshold)
};

/// Certifies mean-square divergence of the dynamics when the sharpness
/// exceeds either the GD edge 2/eta or the noise threshold, strictly.
DivergenceCertificate divergence_certificate(double lambda1_h, double sigma,
                                             const StabilityConfig& cfg);

/// Largest sharpness for which a non-divergent ensemble with the given
/// coherence exists: (2*sigma/eta) * (sigma + n/B - 1)^{-1}. A caller
/// concluding stability must compare lambda1 < bound strictly.
double stable_sharpness_bound(double sigma, const StabilityConfig& cfg);

/// One application of the exact second-moment operator,
///   A(M) = J*M*J + c * sum_i H_i*M*H_i,   J = I - eta*H.
/// Maps PSD to PSD; the k-fold application to I gives the exact expected
/// squared Frobenius norm of the k-step Jacobian product.
Matrix moment_operator_apply(const HessianEnsemble& ensemble,
                             const StabilityConfig& cfg,
                             const Eigen::Ref<const Matrix>& m);

/// tr[A^k(I)]: the exact E||J_hat_k ... J_hat_1||_F^2 under Bernoulli
/// sampling. k = 0 gives d.
SeriesValue exact_second_moment(const HessianEnsemble& ensemble,
                                const StabilityConfig& cfg, int k);

/// Spectral radius of A via power iteration from I (Frobenius-normalized;
/// the operator preserves the PSD cone, so the Rayleigh quotient converges
/// to the leading eigenvalue). rho > 1 iff the exact second moment diverges
/// geometrically, rho < 1 iff it vanishes geometrically.
double moment_spectral_radius(const HessianEnsemble& ensemble,
                              const StabilityConfig& cfg, double tol = 1e-10,
                              int max_iter = 50000);

/// Geometric rate c * rho(B) of the noise series, where B(M) = sum_i H_i*M*H_i.
/// rate > 1 certifies divergence through the series branch; rate < eps is the
/// decidable stand-in for the vanishing-series condition at that eps.
double noise_series_rate(const HessianEnsemble& ensemble,
                         const StabilityConfig& cfg, double tol = 1e-10,
                         int max_iter = 50000);

/// k-th noise-series term c^k * sum over all length-k index words of
/// ||H_{y_k} ... H_{y_1}||_F^2, computed as c^k * tr[B^k(I)] with k operator
/// applications (never by enumeration).
SeriesValue noise_series_term(const HessianEnsemble& ensemble,
                              const StabilityConfig& cfg, int k);

/// True iff every eigenvalue of H lies strictly inside (eps/eta, (2-eps)/eta)
/// and noise_series_rate < eps strictly; then the expected squared norm of the
/// k-step product vanishes as k grows. Sufficient, not necessary.
bool contraction_certificate(const HessianEnsemble& ensemble,
                             const StabilityConfig& cfg, double epsilon);

/// tr[J^{2k}] + noise_series_term(k); a guaranteed lower bound on
/// exact_second_moment(k) for k >= 1, tight at k = 1.
SeriesValue second_moment_lower_bound(const HessianEnsemble& ensemble,
                                      const StabilityConfig& cfg, int k);

/// sum_{r=0}^{k} (1-eps)^{2(k-r)} * C(k,r) * tr[N_r] with tr[N_0] = d and
/// tr[N_r] = noise_series_term(r); a guaranteed upper bound on
/// exact_second_moment(k). Requires the strict eigenvalue window
/// eps/eta < lambda_i(H) < (2-eps)/eta (the Jacobian contracts at eps).
/// Binomial coefficients are built in floating point through the Pascal
/// recurrence so large k cannot overflow an integer type.
SeriesValue second_moment_upper_bound(const HessianEnsemble& ensemble,
                                      const StabilityConfig& cfg,
                                      double epsilon, int k);

// Per-ensemble quantities reused across every (eta, batch) cell of a sweep.
struct EnsembleAnalysis {
  CoherenceReport coh;
  Matrix mean_h;
  Vector mean_h_eigenvalues;  // ascending
  double product_radius;      // rho of M -> sum_i H_i*M*H_i
};

EnsembleAnalysis analyze_ensemble(const HessianEnsemble& ensemble,
                                  double tol = 1e-10);

// All certificates and thresholds for one (ensemble, config) pair.
struct ConditionReport {
  double sigma = 0.0;
  double lambda1_h = 0.0;
  bool gd_unstable = false;            // lambda1_h > 2/eta
  double divergence_threshold = 0.0;   // noise branch; +inf when batch == n
  bool divergence_certified = false;   // gd_unstable or above threshold
  double stable_bound = 0.0;
  bool stable_construction_exists = false;  // lambda1_h < stable_bound
  double noise_rate = 0.0;                  // c * rho(B)
  std::optional<double> rho;                // rho(A), when requested
  // Open interval of eps values for which contraction_certificate holds.
  std::optional<std::pair<double, double>> epsilon_window;
};

ConditionReport evaluate_conditions(const HessianEnsemble& ensemble,
                                    const EnsembleAnalysis& analysis,
                                    const StabilityConfig& cfg, bool with_rho);

ConditionReport evaluate_conditions(const HessianEnsemble& ensemble,
                                    const StabilityConfig& cfg, bool with_rho);

}  // namespace sgdstab
