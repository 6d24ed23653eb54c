#include <cmath>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sgdstab/ensemble.hpp"
#include "sgdstab/io_util.hpp"
#include "sgdstab/oracle.hpp"
#include "sgdstab/phase_diagram.hpp"
#include "sgdstab/simulator.hpp"
#include "sgdstab/svg.hpp"
#include "sgdstab/theory.hpp"

namespace {

using nlohmann::ordered_json;
using namespace sgdstab;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;
constexpr int kExitOracleFailure = 4;

// "1,3,5" or "1:19:2" (inclusive range), mixed by commas.
std::vector<double> parse_value_list(const std::string& text) {
  std::vector<double> values;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    const std::string token = text.substr(pos, comma - pos);
    pos = comma + 1;
    if (token.empty()) continue;
    const std::size_t c1 = token.find(':');
    if (c1 == std::string::npos) {
      values.push_back(std::stod(token));
      continue;
    }
    const std::size_t c2 = token.find(':', c1 + 1);
    if (c2 == std::string::npos) {
      throw ValidationError("list range '" + token + "' must be start:stop:step");
    }
    const double start = std::stod(token.substr(0, c1));
    const double stop = std::stod(token.substr(c1 + 1, c2 - c1 - 1));
    const double step = std::stod(token.substr(c2 + 1));
    if (!(step > 0.0) || stop < start) {
      throw ValidationError("list range '" + token +
                            "' needs step > 0 and stop >= start");
    }
    for (int i = 0;; ++i) {
      const double v = start + i * step;
      if (v > stop + 1e-9 * step) break;
      values.push_back(v);
    }
  }
  if (values.empty()) {
    throw ValidationError("value list '" + text + "' is empty");
  }
  return values;
}

struct ProtocolOpts {
  int steps = 1000;
  int reps = 5;
  double growth = 1000.0;
  double decay = 1000.0;
  std::string sampling = "bernoulli";
  std::uint64_t seed = 0;
  int workers = 1;
  bool with_rho = false;
};

struct ProtocolFlags {
  CLI::Option* steps;
  CLI::Option* reps;
  CLI::Option* growth;
  CLI::Option* decay;
  CLI::Option* sampling;
  CLI::Option* seed;
  CLI::Option* workers;
  CLI::Option* with_rho;
};

ProtocolFlags add_protocol_flags(CLI::App* cmd, ProtocolOpts& p) {
  ProtocolFlags f;
  f.steps = cmd->add_option("--steps", p.steps, "max steps per trajectory");
  f.reps = cmd->add_option("--reps", p.reps, "repetitions per cell (odd)");
  f.growth = cmd->add_option("--growth", p.growth,
                             "norm growth factor that declares divergence");
  f.decay = cmd->add_option("--decay", p.decay,
                            "norm decay factor that declares convergence");
  f.sampling =
      cmd->add_option("--sampling", p.sampling, "batch sampling mode")
          ->check(CLI::IsMember({"bernoulli", "without-replacement"}));
  f.seed = cmd->add_option("--seed", p.seed, "root seed");
  f.workers = cmd->add_option("--workers", p.workers, "worker threads");
  f.with_rho = cmd->add_flag("--with-rho", p.with_rho,
                             "also compute the moment spectral radius");
  return f;
}

Sampling parse_sampling(const std::string& text) {
  return text == "without-replacement" ? Sampling::kWithoutReplacement
                                       : Sampling::kBernoulli;
}

SweepProtocol to_sweep_protocol(const ProtocolOpts& p) {
  SweepProtocol protocol;
  protocol.max_steps = p.steps;
  protocol.growth_factor = p.growth;
  protocol.decay_factor = p.decay;
  protocol.reps = p.reps;
  protocol.sampling = parse_sampling(p.sampling);
  protocol.seed = p.seed;
  protocol.with_rho = p.with_rho;
  protocol.workers = p.workers;
  return protocol;
}

// JSON config document; command-line flags override file values.
class JsonConfig {
 public:
  void load(const std::string& path) {
    nlohmann::json parsed;
    try {
      parsed = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& err) {
      throw IoError("config '" + path + "': " + err.what());
    }
    if (!parsed.is_object()) {
      throw ValidationError("config '" + path + "' must be a JSON object");
    }
    doc_ = std::move(parsed);
    loaded_ = true;
  }

  template <typename T>
  void apply(const CLI::Option* flag, const char* key, T& target) const {
    if (!loaded_ || (flag != nullptr && flag->count() > 0) ||
        !doc_.contains(key)) {
      return;
    }
    try {
      target = doc_[key].get<T>();
    } catch (const nlohmann::json::exception& err) {
      throw ValidationError("config key '" + std::string(key) +
                            "': " + err.what());
    }
  }

  void apply_list(const CLI::Option* flag, const char* key,
                  std::string& target) const {
    if (!loaded_ || (flag != nullptr && flag->count() > 0) ||
        !doc_.contains(key)) {
      return;
    }
    const auto& node = doc_[key];
    if (node.is_string()) {
      target = node.get<std::string>();
      return;
    }
    if (node.is_array()) {
      std::string joined;
      for (const auto& item : node) {
        if (!joined.empty()) joined += ',';
        joined += format_double(item.get<double>());
      }
      target = joined;
      return;
    }
    throw ValidationError("config key '" + std::string(key) +
                          "' must be a string or array");
  }

  void apply_protocol(const ProtocolFlags& flags, ProtocolOpts& p) const {
    apply(flags.steps, "steps", p.steps);
    apply(flags.reps, "reps", p.reps);
    apply(flags.growth, "growth", p.growth);
    apply(flags.decay, "decay", p.decay);
    apply(flags.sampling, "sampling", p.sampling);
    apply(flags.seed, "seed", p.seed);
    apply(flags.workers, "workers", p.workers);
    if (!(flags.with_rho->count() > 0) && loaded_ && doc_.contains("with_rho")) {
      p.with_rho = doc_["with_rho"].get<bool>();
    }
  }

 private:
  nlohmann::json doc_;
  bool loaded_ = false;
};

ordered_json report_to_json(const ConditionReport& report,
                            const StabilityConfig& cfg, Index dim) {
  ordered_json doc;
  doc["n"] = cfg.n;
  doc["d"] = dim;
  doc["eta"] = cfg.eta;
  doc["B"] = cfg.batch;
  doc["sigma"] = report.sigma;
  doc["lambda1_H"] = report.lambda1_h;
  doc["gd_unstable"] = report.gd_unstable;
  doc["thm1_threshold"] = std::isfinite(report.divergence_threshold)
                              ? ordered_json(report.divergence_threshold)
                              : ordered_json("inf");
  doc["thm1_certified"] = report.divergence_certified;
  doc["thm2_bound"] = report.stable_bound;
  doc["thm2_certified"] = report.stable_construction_exists;
  doc["lemma_rate"] = report.noise_rate;
  if (report.rho.has_value()) {
    doc["rho"] = *report.rho;
  } else {
    doc["rho"] = nullptr;
  }
  if (report.epsilon_window.has_value()) {
    doc["epsilon_window"] = {report.epsilon_window->first,
                             report.epsilon_window->second};
  } else {
    doc["epsilon_window"] = nullptr;
  }
  return doc;
}

void print_report(const ConditionReport& report, const StabilityConfig& cfg,
                  Index dim) {
  std::cout << "ensemble:              n = " << cfg.n << ", d = " << dim
            << "\n";
  std::cout << "config:                eta = " << format_double(cfg.eta)
            << ", B = " << cfg.batch << "\n";
  std::cout << "sigma:                 " << format_double(report.sigma)
            << "\n";
  std::cout << "lambda1(H):            " << format_double(report.lambda1_h)
            << "\n";
  std::cout << "gd edge 2/eta:         " << format_double(2.0 / cfg.eta)
            << (report.gd_unstable ? "  (exceeded)" : "") << "\n";
  std::cout << "divergence threshold:  "
            << format_double(report.divergence_threshold)
            << "   certified divergent: "
            << (report.divergence_certified ? "yes" : "no") << "\n";
  std::cout << "stable bound:          " << format_double(report.stable_bound)
            << "   stable construction exists: "
            << (report.stable_construction_exists ? "yes" : "no") << "\n";
  std::cout << "noise series rate:     " << format_double(report.noise_rate)
            << "\n";
  if (report.rho.has_value()) {
    std::cout << "moment radius rho:     " << format_double(*report.rho)
              << "\n";
  }
  if (report.epsilon_window.has_value()) {
    std::cout << "epsilon window:        ("
              << format_double(report.epsilon_window->first) << ", "
              << format_double(report.epsilon_window->second) << ")\n";
  } else {
    std::cout << "epsilon window:        none\n";
  }
}

int cmd_analyze(const std::string& path, double eta, int batch,
                const ProtocolOpts& protocol, bool simulate,
                const std::string& out_path) {
  const HessianEnsemble ensemble = load_ensemble(path);
  StabilityConfig cfg;
  cfg.eta = eta;
  cfg.batch = batch;
  cfg.n = ensemble.n();
  const ConditionReport report =
      evaluate_conditions(ensemble, cfg, protocol.with_rho);
  print_report(report, cfg, ensemble.dim());

  ordered_json doc = report_to_json(report, cfg, ensemble.dim());
  if (simulate) {
    SgdRunConfig run_cfg;
    run_cfg.cfg = cfg;
    run_cfg.sampling = parse_sampling(protocol.sampling);
    run_cfg.max_steps = protocol.steps;
    run_cfg.growth_factor = protocol.growth;
    run_cfg.decay_factor = protocol.decay;
    run_cfg.reps = protocol.reps;
    run_cfg.seed = protocol.seed;
    const ClassifyResult outcome = classify(ensemble, run_cfg);
    std::cout << "verdict:               " << to_string(outcome.verdict)
              << "  (diverged " << outcome.diverged << ", converged "
              << outcome.converged << ", inconclusive "
              << outcome.inconclusive << " of " << run_cfg.reps << ")\n";
    doc["verdict"] = to_string(outcome.verdict);
    doc["tally"] = {{"diverged", outcome.diverged},
                    {"converged", outcome.converged},
                    {"inconclusive", outcome.inconclusive}};
  }
  if (!out_path.empty()) {
    write_text_file(out_path, doc.dump(2) + "\n");
  }
  return kExitOk;
}

int cmd_coherence(const std::string& path) {
  const HessianEnsemble ensemble = load_ensemble(path);
  const CoherenceReport report = coherence(ensemble);
  std::cout << "n = " << ensemble.n() << ", d = " << ensemble.dim() << "\n";
  std::cout << "sigma          = " << format_double(report.sigma) << "\n";
  std::cout << "lambda1(S)     = " << format_double(report.lambda1_S) << "\n";
  std::cout << "max lambda1_Hi = " << format_double(report.max_lambda1_Hi)
            << "\n";
  std::cout << "lambda1(H)     = " << format_double(report.lambda1_H) << "\n";
  return kExitOk;
}

int cmd_make_ensemble(const std::string& type, int n, int sigma,
                      double lambda1, const std::string& out_path) {
  HessianEnsemble ensemble =
      type == "aligned" ? make_aligned_ensemble(n, sigma, lambda1)
                        : make_benchmark_ensemble(n, sigma);
  save_ensemble(ensemble, out_path);
  std::cout << "wrote " << out_path << " (n = " << ensemble.n()
            << ", d = " << ensemble.dim() << ")\n";
  return kExitOk;
}

struct OracleCheck {
  std::string label;
  HessianEnsemble ensemble;
  StabilityConfig cfg;
  int k;
};

int cmd_oracle_check(std::optional<int> n, std::optional<int> d,
                     std::optional<double> eta, std::optional<int> batch,
                     std::optional<int> k, long long trials,
                     std::uint64_t seed) {
  std::vector<OracleCheck> checks;
  if (n || d || eta || batch || k) {
    const int nn = n.value_or(2);
    const int dd = d.value_or(2);
    const int kk = k.value_or(2);
    StabilityConfig cfg;
    cfg.eta = eta.value_or(0.5);
    cfg.batch = batch.value_or(1);
    cfg.n = nn;
    Xoshiro256pp rng(derive_seed(seed, 0x656e73ULL));
    std::vector<Matrix> hessians;
    for (int i = 0; i < nn; ++i) {
      Matrix g(dd, dd);
      for (Index r = 0; r < dd; ++r) {
        for (Index c = 0; c < dd; ++c) g(r, c) = rng.normal();
      }
      hessians.push_back(g * g.transpose() / dd);
    }
    checks.push_back({"random ensemble", HessianEnsemble(std::move(hessians)),
                      cfg, kk});
  } else {
    checks.push_back({"scalar contracting pair",
                      make_aligned_ensemble(2, 2, 2.0),
                      StabilityConfig{0.5, 1, 2}, 1});
    checks.push_back({"scalar contracting pair (k=3)",
                      make_aligned_ensemble(2, 2, 2.0),
                      StabilityConfig{0.5, 1, 2}, 3});
    checks.push_back({"scalar divergent pair",
                      make_aligned_ensemble(2, 1, 2.0),
                      StabilityConfig{0.6, 1, 2}, 2});
    checks.push_back({"gradient descent limit",
                      make_benchmark_ensemble(4, 2),
                      StabilityConfig{0.4, 4, 4}, 3});
  }

  bool all_ok = true;
  for (const OracleCheck& check : checks) {
    const OracleResult exhaustive =
        brute_force_second_moment(check.ensemble, check.cfg, check.k);
    const SeriesValue exact =
        exact_second_moment(check.ensemble, check.cfg, check.k);
    const OracleResult mc = monte_carlo_second_moment(
        check.ensemble, check.cfg, check.k, trials, seed);
    const double rel_gap = std::abs(exact.value - exhaustive.value) /
                           std::max(1.0, std::abs(exhaustive.value));
    const double mc_gap = std::abs(mc.value - exhaustive.value);
    const double mc_limit = std::max(5.0 * mc.std_error.value_or(0.0),
                                     1e-12 * std::max(1.0, exhaustive.value));
    const bool ok = rel_gap <= 1e-10 && mc_gap <= mc_limit;
    all_ok = all_ok && ok;
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << check.label << " (k = "
              << check.k << "): exhaustive = " << format_double(exhaustive.value)
              << ", exact = " << format_double(exact.value)
              << ", monte-carlo = " << format_double(mc.value) << " +/- "
              << format_double(mc.std_error.value_or(0.0)) << "\n";
  }
  return all_ok ? kExitOk : kExitOracleFailure;
}

void write_sweep_outputs(const PhaseDiagramGrid& grid,
                         const std::string& out_prefix, bool eta_axis) {
  write_text_file(out_prefix + ".csv", grid_to_csv(grid));
  SvgStyle style;
  if (eta_axis) {
    style.x_transform = SvgStyle::XTransform::kLog;
    style.title = "verdicts over (eta, B)";
    write_text_file(out_prefix + ".svg", emit_svg_heatmap(grid, style));
    style.x_transform = SvgStyle::XTransform::kSquare;
    write_text_file(out_prefix + "_linear.svg", emit_svg_heatmap(grid, style));
  } else {
    style.title = "verdicts over (sigma, B)";
    write_text_file(out_prefix + ".svg", emit_svg_heatmap(grid, style));
  }
}

void print_sweep_summary(const PhaseDiagramGrid& grid) {
  int diverged = 0;
  int converged = 0;
  int inconclusive = 0;
  int cert1 = 0;
  int cert1_sound = 0;
  int cert2 = 0;
  int cert2_sound = 0;
  for (const GridCell& cell : grid.cells) {
    diverged += cell.verdict == Verdict::kDiverged;
    converged += cell.verdict == Verdict::kConverged;
    inconclusive += cell.verdict == Verdict::kInconclusive;
    if (cell.divergence_certified) {
      ++cert1;
      cert1_sound += cell.verdict == Verdict::kDiverged;
    }
    if (cell.stable_certified) {
      ++cert2;
      cert2_sound += cell.verdict == Verdict::kConverged;
    }
  }
  std::cout << grid.cells.size() << " cells: " << diverged << " diverged, "
            << converged << " converged, " << inconclusive
            << " inconclusive\n";
  std::cout << "divergence-certified cells diverged: " << cert1_sound << "/"
            << cert1 << "\n";
  std::cout << "stability-certified cells converged: " << cert2_sound << "/"
            << cert2 << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "mean-square stability of linearized SGD on quadratic ensembles:\n"
      "certificates, exact second-moment recursion, and phase-diagram sweeps"};
  app.require_subcommand(1);

  // analyze
  auto* analyze = app.add_subcommand(
      "analyze", "certificates and thresholds for one ensemble file");
  std::string analyze_path;
  double analyze_eta = 0.1;
  int analyze_batch = 1;
  bool analyze_simulate = false;
  std::string analyze_out;
  std::string analyze_config;
  ProtocolOpts analyze_protocol;
  analyze->add_option("ensemble", analyze_path, "ensemble JSON file")
      ->required();
  auto* analyze_eta_flag =
      analyze->add_option("--eta", analyze_eta, "learning rate")->required();
  auto* analyze_batch_flag =
      analyze->add_option("--batch", analyze_batch, "batch size")->required();
  analyze->add_flag("--simulate", analyze_simulate,
                    "also classify empirically");
  analyze->add_option("--out", analyze_out, "write a JSON report here");
  analyze->add_option("--config", analyze_config, "JSON config file");
  const ProtocolFlags analyze_flags =
      add_protocol_flags(analyze, analyze_protocol);

  // coherence
  auto* coherence_cmd = app.add_subcommand(
      "coherence", "print the coherence report for an ensemble file");
  std::string coherence_path;
  coherence_cmd->add_option("ensemble", coherence_path, "ensemble JSON file")
      ->required();

  // make-ensemble
  auto* make_cmd = app.add_subcommand(
      "make-ensemble", "write a synthetic ensemble file");
  std::string make_type = "benchmark";
  int make_n = 100;
  int make_sigma = 5;
  double make_lambda1 = 2.0;
  std::string make_out;
  make_cmd->add_option("--type", make_type, "benchmark | aligned")
      ->check(CLI::IsMember({"benchmark", "aligned"}));
  make_cmd->add_option("--n", make_n, "number of Hessians");
  make_cmd->add_option("--sigma", make_sigma, "coherence parameter");
  make_cmd->add_option("--lambda1", make_lambda1,
                       "mean sharpness (aligned type only)");
  make_cmd->add_option("--out", make_out, "output path")->required();

  // oracle-check
  auto* oracle_cmd = app.add_subcommand(
      "oracle-check",
      "cross-check exhaustive, recursive, and Monte Carlo second moments");
  std::optional<int> oracle_n;
  std::optional<int> oracle_d;
  std::optional<double> oracle_eta;
  std::optional<int> oracle_batch;
  std::optional<int> oracle_k;
  long long oracle_trials = 100000;
  std::uint64_t oracle_seed = 0;
  oracle_cmd->add_option("--n", oracle_n, "ensemble size (random check)");
  oracle_cmd->add_option("--d", oracle_d, "dimension (random check)");
  oracle_cmd->add_option("--eta", oracle_eta, "learning rate (random check)");
  oracle_cmd->add_option("--batch", oracle_batch, "batch size (random check)");
  oracle_cmd->add_option("--k", oracle_k, "number of steps (n*k <= 16)");
  oracle_cmd->add_option("--trials", oracle_trials, "Monte Carlo trials");
  oracle_cmd->add_option("--seed", oracle_seed, "seed");

  // sweep-sigma-batch
  auto* sweep_sigma = app.add_subcommand(
      "sweep-sigma-batch", "phase diagram over (sigma, B) at fixed eta");
  int ss_n = 100;
  double ss_eta = 0.8;
  std::string ss_sigma_list;
  std::string ss_b_list;
  std::string ss_out = "sigma_batch";
  std::string ss_config;
  ProtocolOpts ss_protocol;
  auto* ss_n_flag = sweep_sigma->add_option("--n", ss_n, "ensemble size");
  auto* ss_eta_flag =
      sweep_sigma->add_option("--eta", ss_eta, "fixed learning rate");
  auto* ss_sigma_flag = sweep_sigma->add_option(
      "--sigma-list", ss_sigma_list, "sigma values: 1,3,5 or 1:19:2");
  auto* ss_b_flag = sweep_sigma->add_option("--b-list", ss_b_list,
                                            "batch values: 5,10 or 5:100:5");
  auto* ss_out_flag =
      sweep_sigma->add_option("--out", ss_out, "output prefix");
  sweep_sigma->add_option("--config", ss_config, "JSON config file");
  const ProtocolFlags ss_flags = add_protocol_flags(sweep_sigma, ss_protocol);

  // sweep-eta-batch
  auto* sweep_eta = app.add_subcommand(
      "sweep-eta-batch", "phase diagram over (eta, B) at fixed sigma");
  int se_n = 100;
  int se_sigma = 5;
  std::string se_eta_list;
  std::string se_b_list;
  std::string se_out = "eta_batch";
  std::string se_config;
  ProtocolOpts se_protocol;
  auto* se_n_flag = sweep_eta->add_option("--n", se_n, "ensemble size");
  auto* se_sigma_flag =
      sweep_eta->add_option("--sigma", se_sigma, "fixed coherence parameter");
  auto* se_eta_flag = sweep_eta->add_option(
      "--eta-list", se_eta_list, "eta values: 0.1,0.2 or 0.1:1.0:0.1");
  auto* se_b_flag = sweep_eta->add_option("--b-list", se_b_list,
                                          "batch values: 5,10 or 5:100:5");
  auto* se_out_flag = sweep_eta->add_option("--out", se_out, "output prefix");
  sweep_eta->add_option("--config", se_config, "JSON config file");
  const ProtocolFlags se_flags = add_protocol_flags(sweep_eta, se_protocol);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (analyze->parsed()) {
      JsonConfig config;
      if (!analyze_config.empty()) config.load(analyze_config);
      config.apply(analyze_eta_flag, "eta", analyze_eta);
      config.apply(analyze_batch_flag, "batch", analyze_batch);
      config.apply_protocol(analyze_flags, analyze_protocol);
      return cmd_analyze(analyze_path, analyze_eta, analyze_batch,
                         analyze_protocol, analyze_simulate, analyze_out);
    }
    if (coherence_cmd->parsed()) {
      return cmd_coherence(coherence_path);
    }
    if (make_cmd->parsed()) {
      return cmd_make_ensemble(make_type, make_n, make_sigma, make_lambda1,
                               make_out);
    }
    if (oracle_cmd->parsed()) {
      return cmd_oracle_check(oracle_n, oracle_d, oracle_eta, oracle_batch,
                              oracle_k, oracle_trials, oracle_seed);
    }
    if (sweep_sigma->parsed()) {
      JsonConfig config;
      if (!ss_config.empty()) config.load(ss_config);
      config.apply(ss_n_flag, "n", ss_n);
      config.apply(ss_eta_flag, "eta", ss_eta);
      config.apply_list(ss_sigma_flag, "sigma_list", ss_sigma_list);
      config.apply_list(ss_b_flag, "b_list", ss_b_list);
      config.apply(ss_out_flag, "out", ss_out);
      config.apply_protocol(ss_flags, ss_protocol);
      const std::vector<double> sigmas =
          ss_sigma_list.empty() ? std::vector<double>{1, 3, 5, 7, 9, 11, 13,
                                                      15, 17, 19}
                                : parse_value_list(ss_sigma_list);
      const std::vector<double> batches =
          ss_b_list.empty() ? parse_value_list("5:100:5")
                            : parse_value_list(ss_b_list);
      const PhaseDiagramGrid grid = sweep_sigma_batch(
          ss_n, ss_eta, sigmas, batches, to_sweep_protocol(ss_protocol));
      write_sweep_outputs(grid, ss_out, /*eta_axis=*/false);
      print_sweep_summary(grid);
      std::cout << "wrote " << ss_out << ".csv and " << ss_out << ".svg\n";
      return kExitOk;
    }
    if (sweep_eta->parsed()) {
      JsonConfig config;
      if (!se_config.empty()) config.load(se_config);
      config.apply(se_n_flag, "n", se_n);
      config.apply(se_sigma_flag, "sigma", se_sigma);
      config.apply_list(se_eta_flag, "eta_list", se_eta_list);
      config.apply_list(se_b_flag, "b_list", se_b_list);
      config.apply(se_out_flag, "out", se_out);
      config.apply_protocol(se_flags, se_protocol);
      const std::vector<double> etas =
          se_eta_list.empty()
              ? std::vector<double>{0.1, 0.2, 0.3, 0.4, 0.5,
                                    0.6, 0.7, 0.8, 0.9, 1.0}
              : parse_value_list(se_eta_list);
      const std::vector<double> batches =
          se_b_list.empty() ? parse_value_list("5:100:5")
                            : parse_value_list(se_b_list);
      const PhaseDiagramGrid grid = sweep_eta_batch(
          se_n, se_sigma, etas, batches, to_sweep_protocol(se_protocol));
      write_sweep_outputs(grid, se_out, /*eta_axis=*/true);
      print_sweep_summary(grid);
      std::cout << "wrote " << se_out << ".csv, " << se_out << ".svg, and "
                << se_out << "_linear.svg\n";
      return kExitOk;
    }
  } catch (const IoError& err) {
    std::cerr << "io error: " << err.what() << "\n";
    return kExitIo;
  } catch (const ValidationError& err) {
    std::cerr << "validation error: " << err.what() << "\n";
    return kExitValidation;
  } catch (const ConvergenceError& err) {
    std::cerr << "convergence error: " << err.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return kExitValidation;
}
