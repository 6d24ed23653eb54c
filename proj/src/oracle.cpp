#include "sgdstab/oracle.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "sgdstab/rng.hpp"
#include "sgdstab/simulator.hpp"

namespace sgdstab {

namespace {

// Kahan accumulator; enumeration order is fixed, so totals are deterministic.
struct Compensated {
  double sum = 0.0;
  double carry = 0.0;
  void add(double x) {
    const double y = x - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

}  // namespace

OracleResult brute_force_second_moment(const HessianEnsemble& ensemble,
                                       const StabilityConfig& cfg, int k) {
  cfg.validate();
  if (cfg.n != ensemble.n()) {
    throw ValidationError("brute force: config n does not match ensemble");
  }
  if (k < 0) throw ValidationError("brute force: k must be >= 0");
  const int n = cfg.n;
  if (n * k > 16) {
    throw ValidationError("brute force: n*k = " + std::to_string(n * k) +
                          " exceeds the enumeration budget of 16");
  }
  const Index d = ensemble.dim();
  if (k == 0) {
    return OracleResult{static_cast<double>(d), OracleMethod::kExhaustive, 1,
                        std::nullopt};
  }
  const double p = static_cast<double>(cfg.batch) / n;
  const std::uint64_t patterns = 1ULL << (n * k);

  Compensated total;
  Compensated prob_total;
  Matrix product(d, d);
  Matrix jac(d, d);
  for (std::uint64_t pattern = 0; pattern < patterns; ++pattern) {
    product.setIdentity();
    int included = 0;
    for (int step = 0; step < k; ++step) {
      jac.setIdentity();
      for (int i = 0; i < n; ++i) {
        if (pattern >> (step * n + i) & 1ULL) {
          jac -= (cfg.eta / cfg.batch) * ensemble.hessian(i);
          ++included;
        }
      }
      product = jac * product;
    }
    const double prob = std::pow(p, included) *
                        std::pow(1.0 - p, n * k - included);
    prob_total.add(prob);
    total.add(prob * product.squaredNorm());
  }
  if (std::abs(prob_total.sum - 1.0) > 1e-12) {
    throw std::logic_error("brute force: pattern probabilities sum to " +
                           std::to_string(prob_total.sum));
  }
  return OracleResult{total.sum, OracleMethod::kExhaustive,
                      static_cast<long long>(patterns), std::nullopt};
}

OracleResult monte_carlo_second_moment(const HessianEnsemble& ensemble,
                                       const StabilityConfig& cfg, int k,
                                       long long trials, std::uint64_t seed) {
  cfg.validate();
  if (cfg.n != ensemble.n()) {
    throw ValidationError("monte carlo: config n does not match ensemble");
  }
  if (k < 0) throw ValidationError("monte carlo: k must be >= 0");
  if (trials < 100) throw ValidationError("monte carlo: trials must be >= 100");

  const Index d = ensemble.dim();
  Xoshiro256pp rng(derive_seed(seed, 0x6d63ULL));
  std::vector<double> samples;
  samples.reserve(trials);
  Matrix product(d, d);
  Matrix stepped(d, d);
  std::vector<int> batch;
  for (long long trial = 0; trial < trials; ++trial) {
    product.setIdentity();
    for (int step = 0; step < k; ++step) {
      batch = sample_batch(Sampling::kBernoulli, cfg.n, cfg.batch, rng);
      stepped = product;
      for (const int i : batch) {
        stepped.noalias() -=
            (cfg.eta / cfg.batch) * (ensemble.hessian(i) * product);
      }
      product.swap(stepped);
    }
    samples.push_back(product.squaredNorm());
  }

  Compensated sum;
  for (const double x : samples) sum.add(x);
  const double mean = sum.sum / trials;
  Compensated sq;
  for (const double x : samples) sq.add((x - mean) * (x - mean));
  const double variance = trials > 1 ? sq.sum / (trials - 1) : 0.0;
  const double std_error = std::sqrt(variance / trials);
  return OracleResult{mean, OracleMethod::kMonteCarlo, trials, std_error};
}

}  // namespace sgdstab
