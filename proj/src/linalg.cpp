#include "sgdstab/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <string>

namespace sgdstab {

namespace {

Eigen::SelfAdjointEigenSolver<Matrix> solve_symmetric(
    const Eigen::Ref<const Matrix>& m, bool with_vectors) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver;
  solver.compute(m, with_vectors ? Eigen::ComputeEigenvectors
                                 : Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    // Eigen's tridiagonal QL caps itself at 30 sweeps per eigenvalue.
    const int budget = 30 * static_cast<int>(m.rows());
    throw ConvergenceError("symmetric eigensolver did not converge", budget);
  }
  return solver;
}

}  // namespace

Matrix symmetrized(const Eigen::Ref<const Matrix>& m) {
  if (m.rows() != m.cols()) {
    throw ValidationError("symmetrized: matrix must be square, got " +
                          std::to_string(m.rows()) + "x" +
                          std::to_string(m.cols()));
  }
  if (!has_finite_entries(m)) {
    throw ValidationError("symmetrized: matrix has non-finite entries");
  }
  return 0.5 * (m + m.transpose());
}

bool has_finite_entries(const Eigen::Ref<const Matrix>& m) {
  return m.allFinite();
}

Vector sym_eigenvalues(const Eigen::Ref<const Matrix>& m) {
  if (m.rows() != m.cols()) {
    throw ValidationError("sym_eigenvalues: matrix must be square");
  }
  return solve_symmetric(m, /*with_vectors=*/false).eigenvalues();
}

EigenExtremes sym_eigen_extremes(const Eigen::Ref<const Matrix>& m, double tol,
                                 int max_iter) {
  if (tol <= 0.0) {
    throw ValidationError("sym_eigen_extremes: tol must be positive");
  }
  if (max_iter <= 0) {
    throw ConvergenceError("sym_eigen_extremes: iteration budget exhausted", 0);
  }
  const Vector eigs = sym_eigenvalues(m);
  return EigenExtremes{eigs(eigs.size() - 1), eigs(0)};
}

Matrix psd_sqrt(const Eigen::Ref<const Matrix>& m, double tol) {
  const auto solver = solve_symmetric(m, /*with_vectors=*/true);
  const Vector& eigs = solver.eigenvalues();
  const double lambda_max = eigs(eigs.size() - 1);
  const double lambda_min = eigs(0);
  if (lambda_min < -tol * std::max(0.0, lambda_max)) {
    throw NotPsdError("psd_sqrt: matrix is not PSD, lambda_min = " +
                          std::to_string(lambda_min),
                      lambda_min);
  }
  // Clamp eigenvalues within tolerance of zero, not just the negative ones:
  // a noise eigenvalue of size eps would otherwise surface as sqrt(eps).
  const double clamp = tol * std::max(0.0, lambda_max);
  Vector roots(eigs.size());
  for (Index i = 0; i < eigs.size(); ++i) {
    roots(i) = eigs(i) > clamp ? std::sqrt(eigs(i)) : 0.0;
  }
  const Matrix& v = solver.eigenvectors();
  return symmetrized(v * roots.asDiagonal() * v.transpose());
}

bool check_psd(const Eigen::Ref<const Matrix>& m, double tol) {
  const Vector eigs = sym_eigenvalues(m);
  const double lambda_max = eigs(eigs.size() - 1);
  return eigs(0) >= -tol * std::max(1.0, lambda_max);
}

Matrix psd_factor(const Eigen::Ref<const Matrix>& m, double tol) {
  const auto solver = solve_symmetric(m, /*with_vectors=*/true);
  const Vector& eigs = solver.eigenvalues();
  const double lambda_max = eigs(eigs.size() - 1);
  if (eigs(0) < -tol * std::max(1.0, lambda_max)) {
    throw NotPsdError("psd_factor: matrix is not PSD, lambda_min = " +
                          std::to_string(eigs(0)),
                      eigs(0));
  }
  const double cutoff = lambda_max * static_cast<double>(m.rows()) *
                        std::numeric_limits<double>::epsilon();
  Index rank = 0;
  for (Index i = 0; i < eigs.size(); ++i) {
    if (eigs(i) > cutoff) ++rank;
  }
  Matrix w(m.rows(), rank);
  Index col = 0;
  for (Index i = 0; i < eigs.size(); ++i) {
    if (eigs(i) > cutoff) {
      w.col(col++) = solver.eigenvectors().col(i) * std::sqrt(eigs(i));
    }
  }
  return w;
}

}  // namespace sgdstab
