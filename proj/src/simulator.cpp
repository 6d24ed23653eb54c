#include "sgdstab/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace sgdstab {

namespace {

constexpr std::uint64_t kRepStream = 0x7265700aULL;  // trajectory repetitions
constexpr double kRenormLogThreshold = 500.0;

void sample_batch_into(Sampling sampling, int n, int batch, Xoshiro256pp& rng,
                       std::vector<int>& out) {
  out.clear();
  if (sampling == Sampling::kBernoulli) {
    const double p = static_cast<double>(batch) / n;
    for (int i = 0; i < n; ++i) {
      if (rng.uniform01() < p) out.push_back(i);
    }
  } else {
    // Partial Fisher-Yates over [0, n), then sorted so downstream summation
    // order is index-ascending in both modes.
    std::vector<int> pool(n);
    std::iota(pool.begin(), pool.end(), 0);
    for (int j = 0; j < batch; ++j) {
      const int pick =
          j + static_cast<int>(rng.bounded(static_cast<std::uint64_t>(n - j)));
      std::swap(pool[j], pool[pick]);
    }
    out.assign(pool.begin(), pool.begin() + batch);
    std::sort(out.begin(), out.end());
  }
}

// w -= (eta/B) * sum_{i in S} H_i w, through the ensemble factors.
void apply_step_factored(const HessianEnsemble& ensemble,
                         const StabilityConfig& cfg,
                         const std::vector<int>& batch, Vector& w,
                         Vector& acc) {
  if (batch.empty()) return;
  acc.setZero();
  for (const int i : batch) {
    const Matrix& factor = ensemble.factor(i);
    if (factor.cols() == 0) continue;
    if (factor.cols() == 1) {
      acc.noalias() += factor.col(0).dot(w) * factor.col(0);
    } else {
      acc.noalias() += factor * (factor.transpose() * w);
    }
  }
  w.noalias() -= (cfg.eta / cfg.batch) * acc;
}

}  // namespace

const char* to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::kDiverged:
      return "Diverged";
    case Verdict::kConverged:
      return "Converged";
    case Verdict::kInconclusive:
      return "Inconclusive";
  }
  return "Inconclusive";
}

const char* to_string(Sampling sampling) {
  return sampling == Sampling::kBernoulli ? "bernoulli" : "without-replacement";
}

void SgdRunConfig::validate(Index dim) const {
  cfg.validate();
  if (max_steps < 1) throw ValidationError("run config: max_steps must be >= 1");
  if (!(growth_factor > 1.0) || !(decay_factor > 1.0)) {
    throw ValidationError("run config: growth and decay factors must be > 1");
  }
  if (reps < 1 || reps % 2 == 0) {
    throw ValidationError("run config: reps must be odd");
  }
  if (w0.has_value()) {
    if (w0->size() != dim) {
      throw ValidationError("run config: w0 has dimension " +
                            std::to_string(w0->size()) + ", expected " +
                            std::to_string(dim));
    }
    if (!w0->allFinite() || w0->norm() == 0.0) {
      throw ValidationError("run config: w0 must be finite and nonzero");
    }
  }
}

std::vector<int> sample_batch(Sampling sampling, int n, int batch,
                              Xoshiro256pp& rng) {
  if (n < 1 || batch < 1 || batch > n) {
    throw ValidationError("sample_batch: requires 1 <= batch <= n");
  }
  std::vector<int> out;
  sample_batch_into(sampling, n, batch, rng, out);
  return out;
}

Vector sgd_step(const HessianEnsemble& ensemble, const StabilityConfig& cfg,
                Sampling sampling, const Eigen::Ref<const Vector>& w,
                Xoshiro256pp& rng) {
  cfg.validate();
  if (cfg.n != ensemble.n()) {
    throw ValidationError("sgd_step: config n does not match ensemble");
  }
  if (w.size() != ensemble.dim()) {
    throw ValidationError("sgd_step: w has dimension " +
                          std::to_string(w.size()) + ", expected " +
                          std::to_string(ensemble.dim()));
  }
  const auto batch = sample_batch(sampling, cfg.n, cfg.batch, rng);
  Vector acc = Vector::Zero(ensemble.dim());
  for (const int i : batch) {
    acc.noalias() += ensemble.hessian(i) * w;
  }
  return w - (cfg.eta / cfg.batch) * acc;
}

TrajectoryRecord run_trajectory(const HessianEnsemble& ensemble,
                                const SgdRunConfig& run_cfg, int rep_index) {
  run_cfg.validate(ensemble.dim());
  if (rep_index < 0) {
    throw ValidationError("run_trajectory: rep_index must be >= 0");
  }
  const std::uint64_t seed_used =
      derive_seed(run_cfg.seed, static_cast<std::uint64_t>(rep_index),
                  kRepStream);
  Xoshiro256pp rng(seed_used);

  const Index d = ensemble.dim();
  Vector w;
  if (run_cfg.w0.has_value()) {
    w = *run_cfg.w0;
  } else {
    w.resize(d);
    do {
      for (Index i = 0; i < d; ++i) w(i) = rng.normal();
    } while (w.norm() == 0.0);
    w /= w.norm();
  }

  TrajectoryRecord record;
  record.seed_used = seed_used;
  record.log_norm_history.reserve(run_cfg.max_steps + 1);

  double shift = 0.0;
  const double base = std::log(w.norm());
  record.log_norm_history.push_back(base);
  const double log_growth = std::log(run_cfg.growth_factor);
  const double log_decay = std::log(run_cfg.decay_factor);

  std::vector<int> batch;
  batch.reserve(run_cfg.cfg.n);
  Vector acc(d);
  for (int step = 1; step <= run_cfg.max_steps; ++step) {
    sample_batch_into(run_cfg.sampling, run_cfg.cfg.n, run_cfg.cfg.batch, rng,
                      batch);
    apply_step_factored(ensemble, run_cfg.cfg, batch, w, acc);
    // stableNorm: squaredNorm would overflow once ||w|| passes ~1e154,
    // well before the renormalization threshold.
    const double norm = w.stableNorm();
    const double local = std::log(norm);
    const double current = local + shift;
    record.log_norm_history.push_back(current);
    if (current - base >= log_growth) {
      record.verdict = Verdict::kDiverged;
      record.steps_taken = step;
      return record;
    }
    if (current - base <= -log_decay) {
      record.verdict = Verdict::kConverged;
      record.steps_taken = step;
      return record;
    }
    if (std::abs(local) > kRenormLogThreshold) {
      shift += local;
      w /= norm;
    }
  }
  record.verdict = Verdict::kInconclusive;
  record.steps_taken = run_cfg.max_steps;
  return record;
}

ClassifyResult classify(const HessianEnsemble& ensemble,
                        const SgdRunConfig& run_cfg) {
  run_cfg.validate(ensemble.dim());
  ClassifyResult result;
  for (int rep = 0; rep < run_cfg.reps; ++rep) {
    switch (run_trajectory(ensemble, run_cfg, rep).verdict) {
      case Verdict::kDiverged:
        ++result.diverged;
        break;
      case Verdict::kConverged:
        ++result.converged;
        break;
      case Verdict::kInconclusive:
        ++result.inconclusive;
        break;
    }
  }
  const int majority = run_cfg.reps / 2;
  if (result.diverged > majority) {
    result.verdict = Verdict::kDiverged;
  } else if (result.converged > majority) {
    result.verdict = Verdict::kConverged;
  } else {
    result.verdict = Verdict::kInconclusive;
  }
  return result;
}

}  // namespace sgdstab
