#pragma once

#include <cstdint>
#include <optional>

#include "sgdstab/common.hpp"
#include "sgdstab/ensemble.hpp"
#include "sgdstab/theory.hpp"

namespace sgdstab {

enum class OracleMethod { kExhaustive, kMonteCarlo };

struct OracleResult {
  double value;
  OracleMethod method;
  long long trials_or_patterns;
  std::optional<double> std_error;  // Monte Carlo only
};

/// Exact E||J_hat_k ... J_hat_1||_F^2 by enumerating all 2^(n*k) Bernoulli
/// sampling patterns, each weighted (B/n)^{#in} (1-B/n)^{#out}. Independent
/// of the operator recursion by construction; the pattern probabilities are
/// asserted to sum to 1. Budget n*k <= 16.
OracleResult brute_force_second_moment(const HessianEnsemble& ensemble,
                                       const StabilityConfig& cfg, int k);

/// Unbiased Monte Carlo estimate of the same quantity; each trial propagates
/// the full d x d product (every basis vector), which estimates the Frobenius
/// norm directly. trials >= 100 required.
OracleResult monte_carlo_second_moment(const HessianEnsemble& ensemble,
                                       const StabilityConfig& cfg, int k,
                                       long long trials, std::uint64_t seed);

}  // namespace sgdstab
