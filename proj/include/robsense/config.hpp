#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "robsense/montecarlo.hpp"

namespace robsense {

/// Configuration problem, anchored to a line of the source when possible.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& source, int line, const std::string& what)
      : Error(source + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " + what), line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_;
};

/**
 * Minimal INI reader: `[section]` headers, `key = value` pairs, `#` or `;`
 * comments.  Keys are addressed as "section.key" and remember their line.
 */
class IniDocument {
 public:
  struct Entry {
    std::string value;
    int line = 0;
  };

  static IniDocument parse(const std::string& text, const std::string& source) {
    IniDocument doc;
    doc.source_ = source;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    int line_no = 0;
    while (std::getline(in, raw)) {
      ++line_no;
      std::string line = strip(strip_comment(raw));
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') throw ConfigError(source, line_no, "unterminated section header");
        section = strip(line.substr(1, line.size() - 2));
        if (section.empty()) throw ConfigError(source, line_no, "empty section name");
        doc.sections_.emplace(section, line_no);
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ConfigError(source, line_no, "expected 'key = value'");
      const std::string key = strip(line.substr(0, eq));
      if (key.empty()) throw ConfigError(source, line_no, "missing key before '='");
      if (section.empty()) throw ConfigError(source, line_no, "key '" + key + "' outside of any section");
      const std::string full = section + "." + key;
      if (doc.entries_.count(full)) throw ConfigError(source, line_no, "duplicate key '" + full + "'");
      doc.entries_[full] = Entry{strip(line.substr(eq + 1)), line_no};
    }
    return doc;
  }

  const std::string& source() const noexcept { return source_; }
  const Entry* find(const std::string& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
  }
  const std::map<std::string, Entry>& entries() const noexcept { return entries_; }
  bool has_section(const std::string& s) const { return sections_.count(s) > 0; }

  static std::string strip(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

  static std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = strip(item);
      if (!item.empty()) out.push_back(item);
    }
    return out;
  }

 private:
  static std::string strip_comment(const std::string& s) {
    const auto pos = s.find_first_of("#;");
    return pos == std::string::npos ? s : s.substr(0, pos);
  }

  std::string source_;
  std::map<std::string, Entry> entries_;
  std::map<std::string, int> sections_;
};

/// Parsed experiment description shared by the CLI subcommands.
struct ExperimentConfig {
  std::string name = "experiment";
  Index p = 5;
  Index n = 10;
  std::size_t trials = 100000;
  double snr_db = 0.0;
  double rho = 1.0;  // linear, derived from snr_db at parse time
  std::uint64_t seed = 0;
  std::vector<NoiseModel> families;
  std::vector<DetectorSpec> detectors;
  FixedPointOptions estimator;
  std::size_t resolution = 512;
  std::optional<double> target_pfa;
  std::string source;

  /// Simulation settings for family `index`.  Each family draws from its
  /// own seed so that no two families share random directions.
  SimConfig sim(std::size_t index) const {
    SimConfig c;
    c.p = p;
    c.n = n;
    c.trials = trials;
    c.rho = rho;
    c.noise = families.at(index);
    c.detectors = detectors;
    for (auto& d : c.detectors) d.sigma2 = c.noise.sigma2;
    c.master_seed = index == 0 ? seed : derive_seed(seed, 0x46414d00 + index);
    c.estimator_options = estimator;
    return c;
  }
};

namespace detail {

inline double parse_real(const IniDocument& doc, const std::string& key, const IniDocument::Entry& e) {
  try {
    std::size_t used = 0;
    const double v = std::stod(e.value, &used);
    if (used != e.value.size()) throw std::invalid_argument(e.value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(doc.source(), e.line, "'" + key + "' expects a number, got '" + e.value + "'");
  }
}

inline std::uint64_t parse_unsigned(const IniDocument& doc, const std::string& key, const IniDocument::Entry& e) {
  const std::string& v = e.value;
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
    throw ConfigError(doc.source(), e.line, "'" + key + "' expects a non-negative integer, got '" + v + "'");
  try {
    return std::stoull(v);
  } catch (const std::exception&) {
    throw ConfigError(doc.source(), e.line, "'" + key + "' is out of range");
  }
}

}  // namespace detail

/**
 * Reads an experiment from INI text.  Sections and keys:
 *
 *   [experiment]  name, p, n, trials, snr_db, seed
 *   [noise]       families (comma list of gaussian | generalized_gaussian |
 *                 student_t), shape_s, dof_nu, sigma2
 *   [detectors]   list (comma list such as scm-glrt, tyler-rlrt, ggml-glrt)
 *   [estimator]   epsilon, max_iterations, alpha, norm (frobenius | spectral)
 *   [output]      resolution
 *   [calibrate]   target_pfa
 */
inline ExperimentConfig parse_experiment(const std::string& text, const std::string& source) {
  const IniDocument doc = IniDocument::parse(text, source);
  static const std::vector<std::string> known = {
      "experiment.name",   "experiment.p",      "experiment.n",       "experiment.trials", "experiment.snr_db",
      "experiment.seed",   "noise.families",    "noise.shape_s",      "noise.dof_nu",      "noise.sigma2",
      "detectors.list",    "estimator.epsilon", "estimator.max_iterations",                "estimator.alpha",
      "estimator.norm",    "output.resolution", "calibrate.target_pfa"};
  for (const auto& [key, entry] : doc.entries()) {
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ConfigError(source, entry.line, "unknown key '" + key + "'");
  }

  ExperimentConfig cfg;
  cfg.source = source;
  auto get = [&](const std::string& key) { return doc.find(key); };
  auto require = [&](const std::string& key) -> const IniDocument::Entry& {
    const auto* e = doc.find(key);
    if (!e) throw ConfigError(source, 0, "missing required key '" + key + "'");
    return *e;
  };
  auto positive_int = [&](const std::string& key, const IniDocument::Entry& e) {
    const auto v = detail::parse_unsigned(doc, key, e);
    if (v < 1) throw ConfigError(source, e.line, "'" + key + "' must be >= 1");
    return v;
  };

  if (const auto* e = get("experiment.name")) cfg.name = e->value;
  cfg.p = static_cast<Index>(positive_int("experiment.p", require("experiment.p")));
  cfg.n = static_cast<Index>(positive_int("experiment.n", require("experiment.n")));
  cfg.trials = positive_int("experiment.trials", require("experiment.trials"));
  if (const auto* e = get("experiment.snr_db")) {
    cfg.snr_db = detail::parse_real(doc, "experiment.snr_db", *e);
    if (std::isnan(cfg.snr_db) || cfg.snr_db == INFINITY)
      throw ConfigError(source, e->line, "'experiment.snr_db' must be finite or -inf");
  }
  cfg.rho = std::pow(10.0, cfg.snr_db / 10.0);
  if (const auto* e = get("experiment.seed")) cfg.seed = detail::parse_unsigned(doc, "experiment.seed", *e);

  NoiseModel base;
  if (const auto* e = get("noise.sigma2")) {
    base.sigma2 = detail::parse_real(doc, "noise.sigma2", *e);
    if (!(base.sigma2 > 0.0)) throw ConfigError(source, e->line, "'noise.sigma2' must be > 0");
  }
  if (const auto* e = get("noise.shape_s")) {
    base.shape_s = detail::parse_real(doc, "noise.shape_s", *e);
    if (!(base.shape_s > 0.0)) throw ConfigError(source, e->line, "'noise.shape_s' must be > 0");
  }
  if (const auto* e = get("noise.dof_nu")) {
    base.dof_nu = detail::parse_real(doc, "noise.dof_nu", *e);
    if (!(base.dof_nu > 0.0)) throw ConfigError(source, e->line, "'noise.dof_nu' must be > 0");
  }
  const auto& fam = require("noise.families");
  for (const auto& name : IniDocument::split_list(fam.value)) {
    const auto f = parse_noise_family(name);
    if (!f) throw ConfigError(source, fam.line, "unknown noise family '" + name + "'");
    NoiseModel m = base;
    m.family = *f;
    cfg.families.push_back(m);
  }
  if (cfg.families.empty()) throw ConfigError(source, fam.line, "'noise.families' is empty");

  const auto& det = require("detectors.list");
  for (const auto& name : IniDocument::split_list(det.value)) {
    auto d = parse_detector(name);
    if (!d) throw ConfigError(source, det.line, "unknown detector '" + name + "'");
    d->dof_nu = base.dof_nu;
    if (std::find(cfg.detectors.begin(), cfg.detectors.end(), *d) != cfg.detectors.end())
      throw ConfigError(source, det.line, "detector '" + name + "' listed twice");
    cfg.detectors.push_back(*d);
  }
  if (cfg.detectors.empty()) throw ConfigError(source, det.line, "'detectors.list' is empty");
  for (const auto& d : cfg.detectors) {
    if (d.estimator != EstimatorKind::SCM && cfg.n <= cfg.p)
      throw ConfigError(source, det.line, "detector '" + d.name() + "' needs n > p");
    if (d.estimator == EstimatorKind::GG_ML) {
      for (const auto& m : cfg.families)
        if (m.family != NoiseFamily::GeneralizedGaussian)
          throw ConfigError(source, det.line,
                            "detector '" + d.name() + "' requires generalized_gaussian noise, got " + to_string(m.family));
    }
  }

  if (const auto* e = get("estimator.epsilon")) {
    cfg.estimator.epsilon = detail::parse_real(doc, "estimator.epsilon", *e);
    if (!(cfg.estimator.epsilon > 0.0)) throw ConfigError(source, e->line, "'estimator.epsilon' must be > 0");
  }
  if (const auto* e = get("estimator.max_iterations"))
    cfg.estimator.max_iterations = static_cast<int>(positive_int("estimator.max_iterations", *e));
  if (const auto* e = get("estimator.alpha")) {
    const double a = detail::parse_real(doc, "estimator.alpha", *e);
    if (!(a > 0.0)) throw ConfigError(source, e->line, "'estimator.alpha' must be > 0");
    cfg.estimator.alpha = a;
  }
  if (const auto* e = get("estimator.norm")) {
    if (e->value == "frobenius") cfg.estimator.norm = MatrixNorm::Frobenius;
    else if (e->value == "spectral") cfg.estimator.norm = MatrixNorm::Spectral;
    else throw ConfigError(source, e->line, "'estimator.norm' must be frobenius or spectral");
  }
  if (const auto* e = get("output.resolution")) {
    cfg.resolution = positive_int("output.resolution", *e);
    if (cfg.resolution < 2) throw ConfigError(source, e->line, "'output.resolution' must be >= 2");
  }
  if (const auto* e = get("calibrate.target_pfa")) {
    const double a = detail::parse_real(doc, "calibrate.target_pfa", *e);
    if (!(a > 0.0 && a < 1.0)) throw ConfigError(source, e->line, "'calibrate.target_pfa' must lie in (0, 1)");
    cfg.target_pfa = a;
  }
  return cfg;
}

inline ExperimentConfig load_experiment(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, 0, "cannot read config file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_experiment(buf.str(), path);
}

namespace presets {

inline constexpr const char* kFig1 = R"(# Constant false-alarm behaviour, noise power known (RLRT panel).
[experiment]
name = fig1
p = 5
n = 10
trials = 100000
seed = 20190501

[noise]
families = gaussian, generalized_gaussian, student_t
shape_s = 0.1
dof_nu = 3
sigma2 = 1

[detectors]
list = scm-rlrt, scm-glrt, tyler-rlrt, tyler-glrt

[output]
resolution = 512
)";

inline constexpr const char* kFig2 = R"(# Constant false-alarm behaviour, noise power unknown (GLRT panel).
[experiment]
name = fig2
p = 5
n = 10
trials = 100000
seed = 20190502

[noise]
families = gaussian, generalized_gaussian, student_t
shape_s = 0.1
dof_nu = 3
sigma2 = 1

[detectors]
list = scm-rlrt, scm-glrt, tyler-rlrt, tyler-glrt

[output]
resolution = 512
)";

inline constexpr const char* kFig3 = R"(# ROC under impulsive generalized Gaussian noise.
[experiment]
name = fig3
p = 5
n = 50
trials = 100000
snr_db = 0
seed = 20190503

[noise]
families = generalized_gaussian
shape_s = 0.1
sigma2 = 1

[detectors]
list = scm-rlrt, scm-glrt, tyler-rlrt, tyler-glrt, ggml-rlrt, ggml-glrt

[output]
resolution = 512
)";

inline constexpr const char* kFig4 = R"(# ROC under Gaussian noise, same geometry as fig3.
[experiment]
name = fig4
p = 5
n = 50
trials = 100000
snr_db = 0
seed = 20190504

[noise]
families = gaussian
sigma2 = 1

[detectors]
list = scm-rlrt, scm-glrt, tyler-rlrt, tyler-glrt

[output]
resolution = 512
)";

inline std::optional<std::string> text(const std::string& name) {
  if (name == "fig1") return kFig1;
  if (name == "fig2") return kFig2;
  if (name == "fig3") return kFig3;
  if (name == "fig4") return kFig4;
  return std::nullopt;
}

inline const std::vector<std::string>& names() {
  static const std::vector<std::string> n = {"fig1", "fig2", "fig3", "fig4"};
  return n;
}

}  // namespace presets

}  // namespace robsense
