#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "robsense/commands.hpp"

using namespace robsense;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("robsense_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

ExperimentConfig preset(const std::string& name) { return parse_experiment(*presets::text(name), name); }

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::ifstream in(p);
  std::string line;
  while (std::getline(in, line)) rows.push_back(IniDocument::split_list(line));
  return rows;
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(ROBSENSE_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST(Config, PresetsMatchFig1Parameters) {
  const auto c = preset("fig1");
  EXPECT_EQ(c.p, 5);
  EXPECT_EQ(c.n, 10);
  EXPECT_EQ(c.trials, 100000u);
  ASSERT_EQ(c.families.size(), 3u);
  EXPECT_EQ(c.families[1].family, NoiseFamily::GeneralizedGaussian);
  EXPECT_EQ(c.families[1].shape_s, 0.1);
  EXPECT_EQ(c.families[2].dof_nu, 3.0);
  EXPECT_EQ(c.detectors.size(), 4u);
}

TEST(Config, PresetsMatchFig3Parameters) {
  const auto c = preset("fig3");
  EXPECT_EQ(c.n, 50);
  EXPECT_EQ(c.rho, 1.0);
  EXPECT_EQ(c.detectors.size(), 6u);
  const auto d = preset("fig4");
  EXPECT_EQ(d.families.at(0).family, NoiseFamily::Gaussian);
  EXPECT_EQ(d.detectors.size(), 4u);
}

TEST(Config, ShippedConfigFilesEqualBuiltins) {
  for (const auto& name : presets::names()) {
    const fs::path file = fs::path(ROBSENSE_SOURCE_DIR) / "configs" / (name + ".ini");
    EXPECT_EQ(slurp(file), *presets::text(name)) << file;
  }
}

TEST(Config, SnrConvertedFromDecibels) {
  const auto c = parse_experiment(
      "[experiment]\np=2\nn=4\ntrials=3\nsnr_db=10\n[noise]\nfamilies=gaussian\n[detectors]\nlist=scm-glrt\n", "t");
  EXPECT_NEAR(c.rho, 10.0, 1e-12);
  const auto z = parse_experiment(
      "[experiment]\np=2\nn=4\ntrials=3\nsnr_db=-inf\n[noise]\nfamilies=gaussian\n[detectors]\nlist=scm-glrt\n", "t");
  EXPECT_EQ(z.rho, 0.0);
}

TEST(Config, ErrorsAreLineAnchored) {
  const std::string good_tail = "[noise]\nfamilies=gaussian\n[detectors]\nlist=scm-glrt\n";
  auto line_of = [](const std::string& text) {
    try {
      parse_experiment(text, "cfg.ini");
    } catch (const ConfigError& e) {
      EXPECT_NE(std::string(e.what()).find("cfg.ini"), std::string::npos);
      return e.line();
    }
    return -1;
  };
  EXPECT_EQ(line_of("[experiment]\np=5\nn=abc\ntrials=3\n" + good_tail), 3);
  EXPECT_EQ(line_of("[experiment]\np=5\nn=10\ntrials=3\nbogus=1\n" + good_tail), 5);
  EXPECT_EQ(line_of("[experiment]\np=5\nn=10\ntrials=3\n[noise]\nfamilies=laplace\n[detectors]\nlist=scm-glrt\n"), 6);
  EXPECT_EQ(line_of("[experiment]\np=5\nn=10\ntrials=3\n[noise]\nfamilies=gaussian\n[detectors]\nlist=ggml-glrt\n"), 8);
  EXPECT_EQ(line_of("[experiment]\np=5\nn=5\ntrials=3\n[noise]\nfamilies=gaussian\n[detectors]\nlist=tyler-glrt\n"), 8);
  EXPECT_EQ(line_of("p=5\n"), 1);
  EXPECT_EQ(line_of("[experiment\n"), 1);
  EXPECT_EQ(line_of("[experiment]\np=5\nn=10\n" + good_tail), 0);  // missing trials
}

TEST(FormatReal, SeventeenDigitsRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, 12345.678901234567, 1e-300, 2.0}) EXPECT_EQ(std::stod(format_real(v)), v);
  EXPECT_EQ(format_real(0.1), "0.10000000000000001");
}

TEST(PofCurve, Fig1WritesTwelveCurvesAndManifest) {
  const fs::path dir = scratch("pof");
  CommandOptions o;
  o.out_dir = dir;
  o.trials = 300;
  const auto r = cmd_pof_curve(preset("fig1"), o);
  EXPECT_TRUE(r.ok);
  int csv = 0;
  for (const auto& f : r.files) csv += f.extension() == ".csv";
  EXPECT_EQ(csv, 12);
  EXPECT_TRUE(fs::exists(dir / "manifest.json"));
  EXPECT_TRUE(fs::exists(dir / "pof_student_t_tyler-glrt.csv"));
  const auto rows = read_csv(dir / "pof_gaussian_scm-rlrt.csv");
  ASSERT_GT(rows.size(), 2u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"threshold", "pfa", "cdf"}));
  for (std::size_t i = 1; i < rows.size(); ++i) {
    ASSERT_EQ(rows[i].size(), 3u);
    EXPECT_NEAR(std::stod(rows[i][1]) + std::stod(rows[i][2]), 1.0, 1e-15);
  }
  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  EXPECT_EQ(manifest["master_seed"], 20190501u);
  EXPECT_EQ(manifest["runs"].size(), 3u);
  EXPECT_EQ(manifest["config"]["trials"], 300u);
}

TEST(PofCurve, SingleTrialStillValidCsv) {
  const fs::path dir = scratch("pof1");
  CommandOptions o;
  o.out_dir = dir;
  o.trials = 1;
  const auto r = cmd_pof_curve(preset("fig2"), o);
  EXPECT_TRUE(r.ok);
  const auto rows = read_csv(dir / "pof_gaussian_tyler-glrt.csv");
  ASSERT_GE(rows.size(), 2u);
  EXPECT_EQ(rows[0].size(), 3u);
}

TEST(PofCurve, RerunIsByteIdentical) {
  const fs::path a = scratch("pof_a"), b = scratch("pof_b");
  CommandOptions o;
  o.trials = 200;
  o.out_dir = a;
  o.threads = 1;
  cmd_pof_curve(preset("fig1"), o);
  o.out_dir = b;
  o.threads = 3;
  const auto r = cmd_pof_curve(preset("fig1"), o);
  for (const auto& f : r.files)
    if (f.extension() == ".csv") EXPECT_EQ(slurp(a / f.filename()), slurp(f)) << f;
}

TEST(Roc, Fig3AndFig4FileSets) {
  const fs::path d3 = scratch("roc3"), d4 = scratch("roc4");
  CommandOptions o;
  o.trials = 100;
  o.out_dir = d3;
  EXPECT_EQ(cmd_roc(preset("fig3"), o).files.size(), 7u);
  for (const char* n : {"scm-rlrt", "scm-glrt", "tyler-rlrt", "tyler-glrt", "ggml-rlrt", "ggml-glrt"})
    EXPECT_TRUE(fs::exists(d3 / (std::string("roc_") + n + ".csv"))) << n;
  o.out_dir = d4;
  EXPECT_EQ(cmd_roc(preset("fig4"), o).files.size(), 5u);
  const auto rows = read_csv(d4 / "roc_tyler-glrt.csv");
  EXPECT_EQ(rows[0], (std::vector<std::string>{"pfa", "pod"}));
  EXPECT_EQ(rows.back(), (std::vector<std::string>{"1", "1"}));
}

TEST(Roc, ZeroSnrCollapsesToDiagonal) {
  auto cfg = parse_experiment(
      "[experiment]\np=5\nn=20\ntrials=5000\nsnr_db=-inf\nseed=3\n[noise]\nfamilies=gaussian\n"
      "[detectors]\nlist=scm-glrt, tyler-glrt\n[output]\nresolution=101\n",
      "zero-snr");
  CommandOptions o;
  o.out_dir = scratch("roc0");
  const auto r = cmd_roc(cfg, o);
  EXPECT_FALSE(r.warnings.empty());
  const auto rows = read_csv(o.out_dir / "roc_tyler-glrt.csv");
  const double tol = 4.0 * std::sqrt(2.0 * 0.25 / 5000.0);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_NEAR(std::stod(rows[i][0]), std::stod(rows[i][1]), tol);
}

TEST(Roc, RequiresSingleFamily) {
  CommandOptions o;
  o.trials = 2;
  o.out_dir = scratch("roc_multi");
  EXPECT_THROW(cmd_roc(preset("fig1"), o), ConfigError);
}

TEST(Calibrate, OneRowPerDetectorWithHoldout) {
  auto cfg = parse_experiment(
      "[experiment]\np=5\nn=10\ntrials=20000\nseed=9\n[noise]\nfamilies=gaussian\n"
      "[detectors]\nlist=tyler-glrt\n[calibrate]\ntarget_pfa=0.1\n",
      "cal");
  CommandOptions o;
  o.out_dir = scratch("cal");
  const auto r = cmd_calibrate(cfg, o);
  EXPECT_TRUE(r.warnings.empty());
  const auto rows = read_csv(o.out_dir / "calibration.csv");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"detector", "threshold", "achieved_pfa"}));
  EXPECT_EQ(rows[1][0], "tyler-glrt");
  EXPECT_NEAR(std::stod(rows[1][2]), 0.1, 3.0 * std::sqrt(0.09 / 20000.0));

  const std::string first = slurp(o.out_dir / "calibration.csv");
  o.out_dir = scratch("cal_again");
  cmd_calibrate(cfg, o);
  EXPECT_EQ(slurp(o.out_dir / "calibration.csv"), first);
}

TEST(Calibrate, UnresolvableQuantileWarns) {
  CommandOptions o;
  o.out_dir = scratch("cal_warn");
  o.trials = 1000;
  o.target_pfa = 0.999999;
  auto cfg = preset("fig4");
  cfg.n = 10;
  const auto r = cmd_calibrate(cfg, o);
  ASSERT_FALSE(r.warnings.empty());
  EXPECT_NE(r.warnings.front().find("unresolvable"), std::string::npos);
}

TEST(Cli, ExitCodesAndMessages) {
  const fs::path dir = scratch("cli");
  const fs::path bad = dir / "bad.ini";
  std::ofstream(bad) << "[experiment]\np = 5\nn = ten\ntrials = 3\n";
  EXPECT_EQ(run_cli("pof-curve --config " + bad.string() + " --out " + (dir / "o").string(), dir / "log1"), 2);
  EXPECT_NE(slurp(dir / "log1").find("bad.ini:3"), std::string::npos) << slurp(dir / "log1");

  EXPECT_EQ(run_cli("roc --preset fig4 --trials 50 --threads 2 --seed 7 --out " + (dir / "r").string(), dir / "log2"), 0)
      << slurp(dir / "log2");
  EXPECT_TRUE(fs::exists(dir / "r" / "roc_scm-rlrt.csv"));
  const auto manifest = nlohmann::json::parse(slurp(dir / "r" / "manifest.json"));
  EXPECT_EQ(manifest["master_seed"], 7u);

  EXPECT_EQ(run_cli("calibrate --preset fig4 --trials 50 --pfa 0.1 --out " + (dir / "c").string(), dir / "log3"), 0)
      << slurp(dir / "log3");
  EXPECT_EQ(read_csv(dir / "c" / "calibration.csv").size(), 5u);

  EXPECT_NE(run_cli("roc --preset nope --out " + dir.string(), dir / "log4"), 0);
  EXPECT_NE(run_cli("calibrate --preset fig4 --trials 5 --out " + (dir / "c2").string(), dir / "log5"), 0);
}
