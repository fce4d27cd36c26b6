// Command-line driver: pof-curve, roc and calibrate experiments.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "robsense/commands.hpp"

namespace {

struct Common {
  std::string config;
  std::string preset;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  unsigned threads = 1;
};

void add_common(CLI::App* cmd, Common& c) {
  auto* cfg = cmd->add_option("--config", c.config, "Experiment config file (INI)");
  auto* pre = cmd->add_option("--preset", c.preset, "Built-in experiment: fig1, fig2, fig3, fig4")
                  ->check(CLI::IsMember(robsense::presets::names()));
  cfg->excludes(pre);
  cmd->add_option("--out", c.out, "Output directory")->capture_default_str();
  cmd->add_option("--seed", c.seed, "Master seed (overrides the config)");
  cmd->add_option("--trials", c.trials, "Trial count (overrides the config)");
  cmd->add_option("--threads", c.threads, "Worker threads; results do not depend on it")
      ->check(CLI::Range(1u, 1024u))
      ->capture_default_str();
}

std::pair<robsense::ExperimentConfig, std::string> load(const Common& c) {
  if (c.config.empty() && c.preset.empty()) throw robsense::ConfigError("<cli>", 0, "one of --config or --preset is required");
  if (!c.preset.empty()) {
    const std::string text = *robsense::presets::text(c.preset);
    return {robsense::parse_experiment(text, "preset:" + c.preset), text};
  }
  std::ifstream in(c.config);
  if (!in) throw robsense::ConfigError(c.config, 0, "cannot read config file");
  std::stringstream buf;
  buf << in.rdbuf();
  return {robsense::parse_experiment(buf.str(), c.config), buf.str()};
}

robsense::CommandOptions options(const Common& c, const std::string& text) {
  robsense::CommandOptions o;
  o.out_dir = c.out;
  o.seed = c.seed;
  o.trials = c.trials;
  o.threads = c.threads;
  o.config_text = text;
  return o;
}

int report(const robsense::CommandOutcome& r) {
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
  for (const auto& f : r.files) std::cout << f.string() << '\n';
  if (!r.ok) {
    std::cerr << "error: more than 0.1% of trials were excluded for estimator non-convergence\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust eigenvalue-based spectrum sensing experiments"};
  app.set_version_flag("--version", robsense::kVersion);
  app.require_subcommand(1);

  Common pof_opts, roc_opts, cal_opts;
  std::optional<double> pfa;
  auto* pof = app.add_subcommand("pof-curve", "False-alarm probability versus threshold under H0");
  add_common(pof, pof_opts);
  auto* roc = app.add_subcommand("roc", "Receiver operating characteristics");
  add_common(roc, roc_opts);
  auto* cal = app.add_subcommand("calibrate", "Thresholds for a target false-alarm probability");
  add_common(cal, cal_opts);
  cal->add_option("--pfa", pfa, "Target false-alarm probability in (0, 1)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*pof) {
      auto [cfg, text] = load(pof_opts);
      return report(robsense::cmd_pof_curve(cfg, options(pof_opts, text)));
    }
    if (*roc) {
      auto [cfg, text] = load(roc_opts);
      return report(robsense::cmd_roc(cfg, options(roc_opts, text)));
    }
    if (*cal) {
      auto [cfg, text] = load(cal_opts);
      auto o = options(cal_opts, text);
      o.target_pfa = pfa;
      return report(robsense::cmd_calibrate(cfg, o));
    }
  } catch (const robsense::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
