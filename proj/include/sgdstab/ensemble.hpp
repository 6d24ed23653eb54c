#pragma once

#include <string>
#include <vector>

#include "sgdstab/common.hpp"

namespace sgdstab {

// Set {H_i} of per-sample PSD Hessians, all d x d. Matrices are symmetrized
// at construction and validated PSD at the given tolerance. Alongside each
// H_i the constructor keeps a factor W_i with H_i = W_i * W_i^T and the top
// eigenvalue; both fall out of the validation eigendecomposition and give
// every consumer a cheap exact path for products H_i * M * H_i and H_i * w.
class HessianEnsemble {
 public:
  explicit HessianEnsemble(std::vector<Matrix> hessians, double tol = kPsdTol);

  int n() const { return static_cast<int>(hessians_.size()); }
  Index dim() const { return dim_; }
  double tolerance() const { return tol_; }
  const Matrix& hessian(int i) const { return hessians_[i]; }
  const std::vector<Matrix>& hessians() const { return hessians_; }

  // W_i with H_i = W_i * W_i^T, d x rank_i.
  const Matrix& factor(int i) const { return factors_[i]; }
  double lambda_max(int i) const { return lambda_max_[i]; }

 private:
  std::vector<Matrix> hessians_;
  std::vector<Matrix> factors_;
  std::vector<double> lambda_max_;
  Index dim_ = 0;
  double tol_ = kPsdTol;
};

struct CoherenceReport {
  double sigma;
  double lambda1_S;       // top eigenvalue of the alignment matrix
  double max_lambda1_Hi;  // largest top eigenvalue among the H_i
  double lambda1_H;       // sharpness of the mean Hessian
};

/// (1/n) * sum_i H_i.
Matrix mean_hessian(const HessianEnsemble& ensemble);

/// n x n matrix S with S_ij = sqrt(max(0, tr[H_i * H_j])). For PSD inputs
/// this equals the Frobenius norm of H_i^{1/2} * H_j^{1/2}; the square-root
/// route survives only as a test oracle.
Matrix alignment_matrix(const HessianEnsemble& ensemble);

/// sigma = lambda1(S) / max_i lambda1(H_i). Throws ValidationError when every
/// H_i is zero (the ratio is undefined).
CoherenceReport coherence(const HessianEnsemble& ensemble);

/// d = 1 ensemble whose first `sigma` entries are the scalar m = lambda1*n/sigma
/// and the rest are zero. Mean sharpness is exactly lambda1, coherence is
/// exactly sigma.
HessianEnsemble make_aligned_ensemble(int n, int sigma, double lambda1);

/// The synthetic family swept by the phase diagrams: d = n - sigma + 1,
/// H_i = m*e_1 e_1^T for i < sigma and m*e_j e_j^T (one j per remaining i)
/// otherwise, with m = 2n/sigma. Mean sharpness is 2, coherence is sigma.
HessianEnsemble make_benchmark_ensemble(int n, int sigma);

struct QuadraticLoss {
  double total;                    // mean of per_sample
  std::vector<double> per_sample;  // w^T H_i w
};

QuadraticLoss quadratic_loss(const HessianEnsemble& ensemble,
                             const Eigen::Ref<const Vector>& w);

/// JSON on disk: {"n": int, "d": int, "hessians": [[[row], ...], ...]} with
/// numbers written at 17 significant digits so entries round-trip bitwise.
void save_ensemble(const HessianEnsemble& ensemble, const std::string& path);

/// Loads and validates: malformed documents raise IoError; dimension,
/// symmetry, and PSD violations raise the matching ValidationError subtype
/// carrying the offending matrix index.
HessianEnsemble load_ensemble(const std::string& path, double tol = kPsdTol);

}  // namespace sgdstab
