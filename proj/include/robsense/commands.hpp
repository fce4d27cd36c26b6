#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "robsense/config.hpp"
#include "robsense/montecarlo.hpp"

namespace robsense {

inline constexpr const char* kVersion = "0.1.0";

/// Shortest-safe decimal form: 17 significant digits round-trip a double.
inline std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header) : out_(path, std::ios::binary) {
    if (!out_) throw Error("cannot write " + path.string());
    row(header);
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

inline nlohmann::json to_json(const ExperimentConfig& cfg) {
  nlohmann::json families = nlohmann::json::array();
  for (const auto& m : cfg.families)
    families.push_back({{"family", to_string(m.family)}, {"shape_s", m.shape_s}, {"dof_nu", m.dof_nu},
                        {"sigma2", m.sigma2}});
  nlohmann::json detectors = nlohmann::json::array();
  for (const auto& d : cfg.detectors) detectors.push_back(d.name());
  nlohmann::json est = {{"epsilon", cfg.estimator.epsilon},
                        {"max_iterations", cfg.estimator.max_iterations},
                        {"norm", cfg.estimator.norm == MatrixNorm::Frobenius ? "frobenius" : "spectral"}};
  if (cfg.estimator.alpha) est["alpha"] = *cfg.estimator.alpha;
  nlohmann::json j = {{"name", cfg.name},
                      {"p", cfg.p},
                      {"n", cfg.n},
                      {"trials", cfg.trials},
                      {"snr_db", std::isfinite(cfg.snr_db) ? nlohmann::json(cfg.snr_db) : nlohmann::json("-inf")},
                      {"rho_linear", cfg.rho},
                      {"seed", cfg.seed},
                      {"families", families},
                      {"detectors", detectors},
                      {"estimator", est},
                      {"resolution", cfg.resolution}};
  if (cfg.target_pfa) j["target_pfa"] = *cfg.target_pfa;
  return j;
}

inline nlohmann::json to_json(const TrialBatch& b, const SimConfig& sim) {
  nlohmann::json est = nlohmann::json::array();
  for (const auto& e : b.estimators)
    est.push_back({{"estimator", to_string(e.kind)},
                   {"runs", e.runs},
                   {"failures", e.failures},
                   {"mean_iterations", e.mean_iterations},
                   {"max_iterations", e.max_iterations}});
  nlohmann::json det = nlohmann::json::array();
  for (const auto& s : b.samples) det.push_back({{"detector", s.spec.name()}, {"trials", s.size()}});
  return {{"family", to_string(sim.noise.family)},
          {"hypothesis", to_string(b.hypothesis)},
          {"master_seed", sim.master_seed},
          {"first_trial", sim.first_trial},
          {"requested", b.requested},
          {"excluded", b.excluded},
          {"exclusion_rate", b.exclusion_rate()},
          {"estimators", est},
          {"detectors", det}};
}

}  // namespace detail

/// Settings shared by every subcommand; fields left empty defer to the config.
struct CommandOptions {
  std::filesystem::path out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::optional<double> target_pfa;
  unsigned threads = 1;
  std::string config_text;  // echoed verbatim into the manifest
};

struct CommandOutcome {
  std::vector<std::filesystem::path> files;
  std::vector<std::string> warnings;
  bool ok = true;  // false when the exclusion budget was exceeded
  nlohmann::json manifest;
};

namespace detail {

inline ExperimentConfig apply_overrides(ExperimentConfig cfg, const CommandOptions& opt) {
  if (opt.seed) cfg.seed = *opt.seed;
  if (opt.trials) {
    if (*opt.trials < 1) throw ConfigError(cfg.source, 0, "trials override must be >= 1");
    cfg.trials = *opt.trials;
  }
  if (opt.target_pfa) cfg.target_pfa = *opt.target_pfa;
  return cfg;
}

inline nlohmann::json manifest_header(const std::string& command, const ExperimentConfig& cfg,
                                      const CommandOptions& opt) {
  return {{"tool", "robsense"},
          {"version", kVersion},
          {"command", command},
          {"config_source", cfg.source},
          {"config", to_json(cfg)},
          {"config_text", opt.config_text},
          {"master_seed", cfg.seed},
          {"threads", opt.threads},
          {"runs", nlohmann::json::array()}};
}

inline void finish(CommandOutcome& out, const CommandOptions& opt, double seconds) {
  out.manifest["wall_seconds"] = seconds;
  out.manifest["ok"] = out.ok;
  out.manifest["warnings"] = out.warnings;
  const auto path = opt.out_dir / "manifest.json";
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  f << out.manifest.dump(2) << '\n';
  out.files.push_back(path);
}

inline void require_single_family(const ExperimentConfig& cfg, const std::string& command) {
  if (cfg.families.size() != 1)
    throw ConfigError(cfg.source, 0, command + " needs exactly one entry in 'noise.families'");
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace detail

/**
 * Null-hypothesis threshold sweeps.  For each detector a threshold grid is
 * built from the values pooled over all families, and one CSV
 * `pof_<family>_<detector>.csv` with columns (threshold, pfa, cdf) is
 * written per family.
 */
inline CommandOutcome cmd_pof_curve(const ExperimentConfig& base, const CommandOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentConfig cfg = detail::apply_overrides(base, opt);
  std::filesystem::create_directories(opt.out_dir);
  CommandOutcome out;
  out.manifest = detail::manifest_header("pof-curve", cfg, opt);

  std::vector<TrialBatch> batches;
  for (std::size_t f = 0; f < cfg.families.size(); ++f) {
    const SimConfig sim = cfg.sim(f);
    if (auto w = sim.noise.warning()) out.warnings.push_back(*w);
    batches.push_back(run_trials(sim, Hypothesis::H0, opt.threads));
    out.manifest["runs"].push_back(detail::to_json(batches.back(), sim));
    out.ok = out.ok && batches.back().within_exclusion_budget();
  }
  for (std::size_t k = 0; k < cfg.detectors.size(); ++k) {
    std::vector<double> pooled;
    for (const auto& b : batches) pooled.insert(pooled.end(), b.samples[k].values.begin(), b.samples[k].values.end());
    if (pooled.empty()) continue;
    const std::vector<double> grid = rank_grid(std::move(pooled), cfg.resolution);
    for (std::size_t f = 0; f < batches.size(); ++f) {
      const StatSample& sample = batches[f].samples[k];
      if (sample.values.empty()) continue;
      const CdfCurve curve = empirical_pfa_curve(sample, grid);
      const auto path = opt.out_dir / ("pof_" + to_string(cfg.families[f].family) + "_" + sample.spec.name() + ".csv");
      detail::CsvWriter csv(path, {"threshold", "pfa", "cdf"});
      const auto cdf = curve.cdf();
      for (std::size_t i = 0; i < grid.size(); ++i)
        csv.row({format_real(curve.thresholds[i]), format_real(curve.pfa[i]), format_real(cdf[i])});
      out.files.push_back(path);
    }
  }
  detail::finish(out, opt, detail::seconds_since(t0));
  return out;
}

/// ROC curves, one `roc_<detector>.csv` with columns (pfa, pod) each.
inline CommandOutcome cmd_roc(const ExperimentConfig& base, const CommandOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentConfig cfg = detail::apply_overrides(base, opt);
  detail::require_single_family(cfg, "roc");
  std::filesystem::create_directories(opt.out_dir);
  CommandOutcome out;
  out.manifest = detail::manifest_header("roc", cfg, opt);
  if (!(cfg.rho > 0.0)) out.warnings.push_back("rho = 0: H1 carries no signal, ROC curves are diagonal");

  const SimConfig sim = cfg.sim(0);
  if (auto w = sim.noise.warning()) out.warnings.push_back(*w);
  const ExperimentResult res = run_experiment(sim, true, opt.threads, cfg.resolution);
  out.manifest["runs"].push_back(detail::to_json(res.h0, sim));
  out.manifest["runs"].push_back(detail::to_json(*res.h1, sim));
  out.ok = res.within_exclusion_budget();
  for (const RocCurve& roc : res.rocs) {
    const auto path = opt.out_dir / ("roc_" + roc.spec.name() + ".csv");
    detail::CsvWriter csv(path, {"pfa", "pod"});
    for (const RocPoint& pt : roc.points) csv.row({format_real(pt.pfa), format_real(pt.pod)});
    out.files.push_back(path);
  }
  detail::finish(out, opt, detail::seconds_since(t0));
  return out;
}

/**
 * Thresholds at the target false-alarm rate.  Trials [0, N) calibrate;
 * an independent block [N, 2N) measures the achieved rate.  Writes
 * `calibration.csv` with columns (detector, threshold, achieved_pfa).
 */
inline CommandOutcome cmd_calibrate(const ExperimentConfig& base, const CommandOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentConfig cfg = detail::apply_overrides(base, opt);
  detail::require_single_family(cfg, "calibrate");
  if (!cfg.target_pfa) throw ConfigError(cfg.source, 0, "calibrate needs a target pfa ('calibrate.target_pfa' or --pfa)");
  const double alpha = *cfg.target_pfa;
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError(cfg.source, 0, "target pfa must lie in (0, 1)");
  std::filesystem::create_directories(opt.out_dir);
  CommandOutcome out;
  out.manifest = detail::manifest_header("calibrate", cfg, opt);

  SimConfig fit = cfg.sim(0);
  if (auto w = fit.noise.warning()) out.warnings.push_back(*w);
  SimConfig holdout = fit;
  holdout.first_trial = fit.first_trial + fit.trials;
  const TrialBatch a = run_trials(fit, Hypothesis::H0, opt.threads);
  const TrialBatch b = run_trials(holdout, Hypothesis::H0, opt.threads);
  out.manifest["runs"].push_back(detail::to_json(a, fit));
  out.manifest["runs"].push_back(detail::to_json(b, holdout));
  out.ok = a.within_exclusion_budget() && b.within_exclusion_budget();

  const auto path = opt.out_dir / "calibration.csv";
  detail::CsvWriter csv(path, {"detector", "threshold", "achieved_pfa"});
  for (std::size_t k = 0; k < cfg.detectors.size(); ++k) {
    if (a.samples[k].values.empty() || b.samples[k].values.empty()) continue;
    const Calibration c = calibrate_threshold(a.samples[k], alpha);
    if (c.warning) out.warnings.push_back(a.samples[k].spec.name() + ": " + *c.warning);
    const double achieved = detail::exceed_fraction(b.samples[k].values, c.threshold);
    csv.row({a.samples[k].spec.name(), format_real(c.threshold), format_real(achieved)});
  }
  out.files.push_back(path);
  detail::finish(out, opt, detail::seconds_since(t0));
  return out;
}

}  // namespace robsense
