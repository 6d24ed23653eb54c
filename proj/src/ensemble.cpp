#include "sgdstab/ensemble.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>

#include <json.hpp>

#include "sgdstab/linalg.hpp"

namespace sgdstab {

HessianEnsemble::HessianEnsemble(std::vector<Matrix> hessians, double tol)
    : tol_(tol) {
  if (hessians.empty()) {
    throw ValidationError("ensemble: needs at least one Hessian");
  }
  dim_ = hessians.front().rows();
  if (dim_ < 1) {
    throw ValidationError("ensemble: dimension must be at least 1");
  }
  hessians_.reserve(hessians.size());
  factors_.reserve(hessians.size());
  lambda_max_.reserve(hessians.size());
  for (std::size_t i = 0; i < hessians.size(); ++i) {
    if (hessians[i].rows() != dim_ || hessians[i].cols() != dim_) {
      throw ValidationError("ensemble: Hessian " + std::to_string(i) +
                            " has inconsistent dimensions");
    }
    Matrix h = symmetrized(hessians[i]);
    Matrix w;
    try {
      w = psd_factor(h, tol);
    } catch (const NotPsdError& err) {
      throw NotPsdError("ensemble: Hessian " + std::to_string(i) +
                            " is not PSD, lambda_min = " +
                            std::to_string(err.lambda_min),
                        err.lambda_min, static_cast<Index>(i));
    }
    double top = 0.0;
    for (Index c = 0; c < w.cols(); ++c) {
      top = std::max(top, w.col(c).squaredNorm());
    }
    hessians_.push_back(std::move(h));
    factors_.push_back(std::move(w));
    lambda_max_.push_back(top);
  }
}

Matrix mean_hessian(const HessianEnsemble& ensemble) {
  Matrix sum = Matrix::Zero(ensemble.dim(), ensemble.dim());
  for (const Matrix& h : ensemble.hessians()) {
    sum += h;
  }
  return symmetrized(sum / static_cast<double>(ensemble.n()));
}

Matrix alignment_matrix(const HessianEnsemble& ensemble) {
  const int n = ensemble.n();
  Matrix s(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      // tr of a product of PSD matrices is nonnegative analytically; clamp
      // the rounding residue before the square root.
      const double inner =
          frobenius_inner(ensemble.hessian(i), ensemble.hessian(j));
      const double value = std::sqrt(std::max(0.0, inner));
      s(i, j) = value;
      s(j, i) = value;
    }
  }
  return s;
}

CoherenceReport coherence(const HessianEnsemble& ensemble) {
  double max_top = 0.0;
  for (int i = 0; i < ensemble.n(); ++i) {
    max_top = std::max(max_top, ensemble.lambda_max(i));
  }
  if (max_top <= 0.0) {
    throw ValidationError(
        "coherence: degenerate ensemble (all Hessians are zero)");
  }
  const Matrix s = alignment_matrix(ensemble);
  const double lambda1_s = sym_eigen_extremes(s).lambda_max;
  const double lambda1_h = sym_eigen_extremes(mean_hessian(ensemble)).lambda_max;
  return CoherenceReport{lambda1_s / max_top, lambda1_s, max_top, lambda1_h};
}

HessianEnsemble make_aligned_ensemble(int n, int sigma, double lambda1) {
  if (n < 1) throw ValidationError("make_aligned_ensemble: n must be >= 1");
  if (sigma < 1 || sigma > n) {
    throw ValidationError("make_aligned_ensemble: sigma must be in [1, n]");
  }
  if (!(lambda1 > 0.0)) {
    throw ValidationError("make_aligned_ensemble: lambda1 must be positive");
  }
  const double m = lambda1 * static_cast<double>(n) / sigma;
  std::vector<Matrix> hessians(n, Matrix::Zero(1, 1));
  for (int i = 0; i < sigma; ++i) {
    hessians[i](0, 0) = m;
  }
  return HessianEnsemble(std::move(hessians));
}

HessianEnsemble make_benchmark_ensemble(int n, int sigma) {
  if (n < 1) throw ValidationError("make_benchmark_ensemble: n must be >= 1");
  if (sigma < 1 || sigma > n) {
    throw ValidationError("make_benchmark_ensemble: sigma must be in [1, n]");
  }
  const Index d = n - sigma + 1;
  const double m = 2.0 * static_cast<double>(n) / sigma;
  std::vector<Matrix> hessians(n, Matrix::Zero(d, d));
  for (int i = 0; i < n; ++i) {
    const Index coord = i < sigma ? 0 : static_cast<Index>(i - sigma + 1);
    hessians[i](coord, coord) = m;
  }
  return HessianEnsemble(std::move(hessians));
}

QuadraticLoss quadratic_loss(const HessianEnsemble& ensemble,
                             const Eigen::Ref<const Vector>& w) {
  if (w.size() != ensemble.dim()) {
    throw ValidationError("quadratic_loss: w has dimension " +
                          std::to_string(w.size()) + ", expected " +
                          std::to_string(ensemble.dim()));
  }
  QuadraticLoss result;
  result.per_sample.reserve(ensemble.n());
  double sum = 0.0;
  for (const Matrix& h : ensemble.hessians()) {
    const double value = w.dot(h * w);
    result.per_sample.push_back(value);
    sum += value;
  }
  result.total = sum / static_cast<double>(ensemble.n());
  return result;
}

namespace {

void append_number(std::string& out, double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value,
                                 std::chars_format::general, 17);
  out.append(buf, res.ptr);
}

}  // namespace

void save_ensemble(const HessianEnsemble& ensemble, const std::string& path) {
  std::string out;
  out += "{\n  \"n\": " + std::to_string(ensemble.n()) +
         ",\n  \"d\": " + std::to_string(ensemble.dim()) +
         ",\n  \"hessians\": [\n";
  for (int i = 0; i < ensemble.n(); ++i) {
    const Matrix& h = ensemble.hessian(i);
    out += "    [";
    for (Index r = 0; r < h.rows(); ++r) {
      out += r == 0 ? "[" : "     [";
      for (Index c = 0; c < h.cols(); ++c) {
        append_number(out, h(r, c));
        if (c + 1 < h.cols()) out += ", ";
      }
      out += r + 1 < h.rows() ? "],\n" : "]";
    }
    out += i + 1 < ensemble.n() ? "],\n" : "]\n";
  }
  out += "  ]\n}\n";

  std::ofstream file(path, std::ios::binary);
  if (!file) {
    throw IoError("save_ensemble: cannot open '" + path + "' for writing");
  }
  file << out;
  if (!file) {
    throw IoError("save_ensemble: write to '" + path + "' failed");
  }
}

HessianEnsemble load_ensemble(const std::string& path, double tol) {
  std::ifstream file(path, std::ios::binary);
  if (!file) {
    throw IoError("load_ensemble: cannot open '" + path + "'");
  }
  nlohmann::json doc;
  try {
    file >> doc;
  } catch (const nlohmann::json::exception& err) {
    throw IoError("load_ensemble: malformed JSON in '" + path +
                  "': " + err.what());
  }
  if (!doc.is_object() || !doc.contains("n") || !doc.contains("d") ||
      !doc.contains("hessians") || !doc["n"].is_number_integer() ||
      !doc["d"].is_number_integer() || !doc["hessians"].is_array()) {
    throw IoError("load_ensemble: '" + path +
                  "' does not match {n, d, hessians} schema");
  }
  const int n = doc["n"].get<int>();
  const Index d = doc["d"].get<Index>();
  if (n < 1 || d < 1) {
    throw ValidationError("load_ensemble: n and d must be >= 1");
  }
  const auto& list = doc["hessians"];
  if (static_cast<int>(list.size()) != n) {
    throw ValidationError("load_ensemble: expected " + std::to_string(n) +
                          " hessians, found " + std::to_string(list.size()));
  }
  std::vector<Matrix> hessians;
  hessians.reserve(n);
  for (int i = 0; i < n; ++i) {
    const auto& rows = list[i];
    if (!rows.is_array() || static_cast<Index>(rows.size()) != d) {
      throw ValidationError("load_ensemble: Hessian " + std::to_string(i) +
                            " does not have " + std::to_string(d) + " rows");
    }
    Matrix h(d, d);
    for (Index r = 0; r < d; ++r) {
      const auto& row = rows[r];
      if (!row.is_array() || static_cast<Index>(row.size()) != d) {
        throw ValidationError("load_ensemble: Hessian " + std::to_string(i) +
                              " row " + std::to_string(r) + " does not have " +
                              std::to_string(d) + " entries");
      }
      for (Index c = 0; c < d; ++c) {
        if (!row[c].is_number()) {
          throw ValidationError("load_ensemble: Hessian " + std::to_string(i) +
                                " has a non-numeric entry");
        }
        h(r, c) = row[c].get<double>();
      }
    }
    if (!has_finite_entries(h)) {
      throw ValidationError("load_ensemble: Hessian " + std::to_string(i) +
                            " has non-finite entries");
    }
    const double skew = (h - h.transpose()).cwiseAbs().maxCoeff();
    if (skew > tol * (1.0 + h.cwiseAbs().maxCoeff())) {
      throw SymmetryError("load_ensemble: Hessian " + std::to_string(i) +
                              " is not symmetric (max skew " +
                              std::to_string(skew) + ")",
                          static_cast<Index>(i));
    }
    hessians.push_back(std::move(h));
  }
  return HessianEnsemble(std::move(hessians), tol);
}

}  // namespace sgdstab
