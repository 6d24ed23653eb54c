#pragma once

#include <Eigen/Core>

#include "sgdstab/common.hpp"

namespace sgdstab {

struct EigenExtremes {
  double lambda_max;
  double lambda_min;
};

/// Exactly symmetric copy (M + M^T)/2. Throws ValidationError when M is not
/// square or contains non-finite entries.
Matrix symmetrized(const Eigen::Ref<const Matrix>& m);

bool has_finite_entries(const Eigen::Ref<const Matrix>& m);

/// All eigenvalues of a symmetric matrix, ascending.
Vector sym_eigenvalues(const Eigen::Ref<const Matrix>& m);

/// Largest and smallest eigenvalue. The full decomposition runs underneath;
/// the extremes are the contract. max_iter <= 0 is rejected, and solver
/// failure raises ConvergenceError with the sweep budget it exhausted.
EigenExtremes sym_eigen_extremes(const Eigen::Ref<const Matrix>& m,
                                 double tol = kPsdTol, int max_iter = 10000);

/// Symmetric PSD square root. Eigenvalues in [-tol*lambda_max, 0) are clamped
/// to zero; anything below that raises NotPsdError carrying lambda_min.
Matrix psd_sqrt(const Eigen::Ref<const Matrix>& m, double tol = kPsdTol);

/// tr[A*B] for symmetric inputs, computed as the entrywise product sum.
template <typename DerivedA, typename DerivedB>
double frobenius_inner(const Eigen::MatrixBase<DerivedA>& a,
                       const Eigen::MatrixBase<DerivedB>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ValidationError("frobenius_inner: dimension mismatch");
  }
  return a.derived().cwiseProduct(b.derived()).sum();
}

/// True iff lambda_min(M) >= -tol * max(1, lambda_max(M)).
bool check_psd(const Eigen::Ref<const Matrix>& m, double tol = kPsdTol);

/// Factor W with M = W * W^T, W of size d x rank. Columns are eigenvectors
/// scaled by sqrt(eigenvalue); numerically zero eigenvalues are dropped.
/// Raises NotPsdError under the same tolerance rule as check_psd.
Matrix psd_factor(const Eigen::Ref<const Matrix>& m, double tol = kPsdTol);

}  // namespace sgdstab
