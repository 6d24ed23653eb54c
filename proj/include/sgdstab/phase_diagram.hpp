#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sgdstab/common.hpp"
#include "sgdstab/simulator.hpp"
#include "sgdstab/theory.hpp"

namespace sgdstab {

// Shared per-sweep protocol knobs. Per-cell seeds derive from (seed, cell
// index) through a counter-based hash, so worker scheduling cannot reorder
// random streams and outputs are byte-identical across worker counts.
struct SweepProtocol {
  int max_steps = 1000;
  double growth_factor = 1000.0;
  double decay_factor = 1000.0;
  int reps = 5;
  Sampling sampling = Sampling::kBernoulli;
  std::uint64_t seed = 0;
  bool with_rho = false;  // rho dominates runtime at large d; opt in per sweep
  int workers = 1;
};

struct GridCell {
  double sigma = 0.0;
  double batch = 0.0;
  double eta = 0.0;
  double lambda1_h = 0.0;
  Verdict verdict = Verdict::kInconclusive;
  int diverged_count = 0;
  int converged_count = 0;
  int inconclusive_count = 0;
  double divergence_threshold = 0.0;  // noise branch (CSV: thm1_threshold)
  bool divergence_certified = false;  // CSV: thm1_certified
  double stable_bound = 0.0;          // CSV: thm2_bound
  bool stable_certified = false;      // CSV: thm2_certified
  std::optional<double> rho;
};

struct PhaseDiagramGrid {
  std::string x_name;
  std::vector<double> x_values;
  std::string y_name;  // always "B"
  std::vector<double> y_values;
  std::vector<std::pair<std::string, double>> fixed_params;
  int n = 0;
  int reps = 0;
  std::uint64_t seed = 0;
  std::vector<GridCell> cells;  // x-major: index = ix * ny + iy

  const GridCell& at(std::size_t ix, std::size_t iy) const {
    return cells[ix * y_values.size() + iy];
  }
};

/// Seed assigned to the cell at linear index ix * ny + iy; lets a single cell
/// from a sweep be reproduced in isolation.
std::uint64_t cell_seed(std::uint64_t root_seed, std::size_t cell_index);

/// Phase diagram over (sigma, B) for the benchmark family at fixed eta; one
/// ensemble per sigma column, classify + certificates per cell. Fails the
/// whole sweep if any cell carries both certificates (they are mutually
/// exclusive by construction).
PhaseDiagramGrid sweep_sigma_batch(int n, double eta,
                                   const std::vector<double>& sigmas,
                                   const std::vector<double>& batches,
                                   const SweepProtocol& protocol);

/// Phase diagram over (eta, B) for the benchmark family at fixed sigma.
PhaseDiagramGrid sweep_eta_batch(int n, int sigma,
                                 const std::vector<double>& etas,
                                 const std::vector<double>& batches,
                                 const SweepProtocol& protocol);

/// CSV document, one row per cell (header + x-major row order, LF endings):
/// sigma,B,eta,n,lambda1_H,verdict,diverged_count,reps,thm1_threshold,
/// thm1_certified,thm2_bound,thm2_certified,rho,seed
std::string grid_to_csv(const PhaseDiagramGrid& grid);

}  // namespace sgdstab
