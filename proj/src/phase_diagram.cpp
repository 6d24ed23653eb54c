#include "sgdstab/phase_diagram.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "sgdstab/io_util.hpp"
#include "sgdstab/rng.hpp"

namespace sgdstab {

namespace {

constexpr std::uint64_t kCellStream = 0x63656c6cULL;

int require_grid_integer(double value, int lo, int hi, const char* what) {
  const double rounded = std::round(value);
  if (!std::isfinite(value) || std::abs(value - rounded) > 1e-9 ||
      rounded < lo || rounded > hi) {
    throw ValidationError(std::string(what) + " value " +
                          format_double(value) + " must be an integer in [" +
                          std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  return static_cast<int>(rounded);
}

void validate_protocol(const SweepProtocol& protocol) {
  if (protocol.workers < 1) {
    throw ValidationError("sweep: workers must be >= 1");
  }
  if (protocol.reps < 1 || protocol.reps % 2 == 0) {
    throw ValidationError("sweep: reps must be odd");
  }
}

// Shared engine: per-x ensemble/analysis/eta, batches along y. Cells are
// gathered by linear index, so output does not depend on completion order.
PhaseDiagramGrid run_grid(std::string x_name, std::vector<double> x_values,
                          std::vector<double> batches, int n,
                          const std::vector<const HessianEnsemble*>& ensembles,
                          const std::vector<const EnsembleAnalysis*>& analyses,
                          const std::vector<double>& etas_per_x,
                          const SweepProtocol& protocol,
                          std::vector<std::pair<std::string, double>> fixed) {
  const std::size_t nx = x_values.size();
  const std::size_t ny = batches.size();
  if (nx == 0 || ny == 0) {
    throw ValidationError("sweep: axis value lists must be non-empty");
  }

  PhaseDiagramGrid grid;
  grid.x_name = std::move(x_name);
  grid.x_values = std::move(x_values);
  grid.y_name = "B";
  grid.y_values = batches;
  grid.fixed_params = std::move(fixed);
  grid.n = n;
  grid.reps = protocol.reps;
  grid.seed = protocol.seed;
  grid.cells.resize(nx * ny);

  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;

  auto work = [&]() {
    try {
      for (;;) {
        const std::size_t idx = next.fetch_add(1);
        if (idx >= grid.cells.size()) break;
        const std::size_t ix = idx / ny;
        const std::size_t iy = idx % ny;
        const HessianEnsemble& ensemble = *ensembles[ix];
        StabilityConfig cfg;
        cfg.eta = etas_per_x[ix];
        cfg.batch = static_cast<int>(batches[iy]);
        cfg.n = n;
        const ConditionReport report =
            evaluate_conditions(ensemble, *analyses[ix], cfg,
                                protocol.with_rho);
        SgdRunConfig run_cfg;
        run_cfg.cfg = cfg;
        run_cfg.sampling = protocol.sampling;
        run_cfg.max_steps = protocol.max_steps;
        run_cfg.growth_factor = protocol.growth_factor;
        run_cfg.decay_factor = protocol.decay_factor;
        run_cfg.reps = protocol.reps;
        run_cfg.seed = cell_seed(protocol.seed, idx);
        const ClassifyResult outcome = classify(ensemble, run_cfg);

        GridCell& cell = grid.cells[idx];
        cell.sigma = report.sigma;
        cell.batch = batches[iy];
        cell.eta = cfg.eta;
        cell.lambda1_h = report.lambda1_h;
        cell.verdict = outcome.verdict;
        cell.diverged_count = outcome.diverged;
        cell.converged_count = outcome.converged;
        cell.inconclusive_count = outcome.inconclusive;
        cell.divergence_threshold = report.divergence_threshold;
        cell.divergence_certified = report.divergence_certified;
        cell.stable_bound = report.stable_bound;
        cell.stable_certified = report.stable_construction_exists;
        cell.rho = report.rho;
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!first_error) first_error = std::current_exception();
    }
  };

  if (protocol.workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(protocol.workers);
    for (int t = 0; t < protocol.workers; ++t) {
      pool.emplace_back(work);
    }
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  // The two certificates cannot hold at once: the stable bound never exceeds
  // either divergence branch. A cell carrying both means a broken formula.
  for (std::size_t idx = 0; idx < grid.cells.size(); ++idx) {
    const GridCell& cell = grid.cells[idx];
    if (cell.divergence_certified && cell.stable_certified) {
      throw ValidationError(
          "sweep invariant violated: cell (" + format_double(cell.sigma) +
          ", B=" + format_double(cell.batch) + ", eta=" +
          format_double(cell.eta) + ") carries both certificates");
    }
  }
  return grid;
}

}  // namespace

std::uint64_t cell_seed(std::uint64_t root_seed, std::size_t cell_index) {
  return derive_seed(root_seed, cell_index, kCellStream);
}

PhaseDiagramGrid sweep_sigma_batch(int n, double eta,
                                   const std::vector<double>& sigmas,
                                   const std::vector<double>& batches,
                                   const SweepProtocol& protocol) {
  validate_protocol(protocol);
  if (!(eta > 0.0) || !std::isfinite(eta)) {
    throw ValidationError("sweep: eta must be positive and finite");
  }
  std::vector<int> sigma_ints;
  sigma_ints.reserve(sigmas.size());
  for (const double s : sigmas) {
    sigma_ints.push_back(require_grid_integer(s, 1, n, "sigma"));
  }
  for (const double b : batches) {
    require_grid_integer(b, 1, n, "B");
  }

  std::vector<HessianEnsemble> ensembles;
  std::vector<EnsembleAnalysis> analyses;
  ensembles.reserve(sigma_ints.size());
  analyses.reserve(sigma_ints.size());
  for (const int sigma : sigma_ints) {
    ensembles.push_back(make_benchmark_ensemble(n, sigma));
    analyses.push_back(analyze_ensemble(ensembles.back()));
  }
  std::vector<const HessianEnsemble*> ensemble_ptrs;
  std::vector<const EnsembleAnalysis*> analysis_ptrs;
  for (std::size_t i = 0; i < ensembles.size(); ++i) {
    ensemble_ptrs.push_back(&ensembles[i]);
    analysis_ptrs.push_back(&analyses[i]);
  }
  const std::vector<double> etas(sigmas.size(), eta);
  return run_grid("sigma", sigmas, batches, n, ensemble_ptrs, analysis_ptrs,
                  etas, protocol, {{"eta", eta}, {"n", double(n)}});
}

PhaseDiagramGrid sweep_eta_batch(int n, int sigma,
                                 const std::vector<double>& etas,
                                 const std::vector<double>& batches,
                                 const SweepProtocol& protocol) {
  validate_protocol(protocol);
  require_grid_integer(sigma, 1, n, "sigma");
  for (const double eta : etas) {
    if (!(eta > 0.0) || !std::isfinite(eta)) {
      throw ValidationError("sweep: eta values must be positive and finite");
    }
  }
  for (const double b : batches) {
    require_grid_integer(b, 1, n, "B");
  }

  const HessianEnsemble ensemble = make_benchmark_ensemble(n, sigma);
  const EnsembleAnalysis analysis = analyze_ensemble(ensemble);
  const std::vector<const HessianEnsemble*> ensemble_ptrs(etas.size(),
                                                          &ensemble);
  const std::vector<const EnsembleAnalysis*> analysis_ptrs(etas.size(),
                                                           &analysis);
  return run_grid("eta", etas, batches, n, ensemble_ptrs, analysis_ptrs, etas,
                  protocol, {{"sigma", double(sigma)}, {"n", double(n)}});
}

std::string grid_to_csv(const PhaseDiagramGrid& grid) {
  std::string out =
      "sigma,B,eta,n,lambda1_H,verdict,diverged_count,reps,thm1_threshold,"
      "thm1_certified,thm2_bound,thm2_certified,rho,seed\n";
  for (const GridCell& cell : grid.cells) {
    out += format_double(cell.sigma);
    out += ',';
    out += format_double(cell.batch);
    out += ',';
    out += format_double(cell.eta);
    out += ',';
    out += std::to_string(grid.n);
    out += ',';
    out += format_double(cell.lambda1_h);
    out += ',';
    out += to_string(cell.verdict);
    out += ',';
    out += std::to_string(cell.diverged_count);
    out += ',';
    out += std::to_string(grid.reps);
    out += ',';
    out += format_double(cell.divergence_threshold);
    out += ',';
    out += cell.divergence_certified ? '1' : '0';
    out += ',';
    out += format_double(cell.stable_bound);
    out += ',';
    out += cell.stable_certified ? '1' : '0';
    out += ',';
    if (cell.rho.has_value()) out += format_double(*cell.rho);
    out += ',';
    out += std::to_string(grid.seed);
    out += '\n';
  }
  return out;
}

}  // namespace sgdstab
