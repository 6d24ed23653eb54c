#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sgdstab/common.hpp"
#include "sgdstab/ensemble.hpp"
#include "sgdstab/rng.hpp"
#include "sgdstab/theory.hpp"

namespace sgdstab {

enum class Sampling { kBernoulli, kWithoutReplacement };

enum class Verdict { kDiverged, kConverged, kInconclusive };

const char* to_string(Verdict verdict);
const char* to_string(Sampling sampling);

struct SgdRunConfig {
  StabilityConfig cfg;
  Sampling sampling = Sampling::kBernoulli;
  int max_steps = 1000;
  double growth_factor = 1000.0;  // ||w|| up by this factor => Diverged
  double decay_factor = 1000.0;   // ||w|| down by this factor => Converged
  int reps = 5;                   // odd, so the majority vote is well-defined
  std::uint64_t seed = 0;
  // Start point; fresh uniform draw from the unit sphere per repetition when
  // absent. Divergence holds from almost every start, so a random start
  // avoids measure-zero alignment with stable subspaces.
  std::optional<Vector> w0;

  void validate(Index dim) const;
};

struct TrajectoryRecord {
  Verdict verdict;
  int steps_taken;
  std::vector<double> log_norm_history;  // ln||w_t||, entry 0 is the start
  std::uint64_t seed_used;
};

struct ClassifyResult {
  Verdict verdict;
  int diverged = 0;
  int converged = 0;
  int inconclusive = 0;
};

/// Batch index set. Bernoulli: each i independently with probability B/n
/// (any size, possibly empty). WithoutReplacement: uniform size-B subset.
/// Indices are returned ascending.
std::vector<int> sample_batch(Sampling sampling, int n, int batch,
                              Xoshiro256pp& rng);

/// One update w - (eta/B) * sum_{i in S} H_i * w with S freshly sampled.
/// An empty Bernoulli batch leaves w unchanged.
Vector sgd_step(const HessianEnsemble& ensemble, const StabilityConfig& cfg,
                Sampling sampling, const Eigen::Ref<const Vector>& w,
                Xoshiro256pp& rng);

/// Iterates the update from w0 until the norm grows by growth_factor
/// (Diverged), shrinks by decay_factor (Converged), or max_steps elapse
/// (Inconclusive). Norms are tracked in log space with periodic
/// renormalization of w, so divergence beyond double range cannot overflow
/// before the verdict triggers. Deterministic given (seed, rep_index).
TrajectoryRecord run_trajectory(const HessianEnsemble& ensemble,
                                const SgdRunConfig& run_cfg, int rep_index);

/// Majority vote over `reps` independent repetitions.
ClassifyResult classify(const HessianEnsemble& ensemble,
                        const SgdRunConfig& run_cfg);

}  // namespace sgdstab
