#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "robsense/ces.hpp"
#include "robsense/detectors.hpp"
#include "robsense/estimators.hpp"
#include "robsense/rng.hpp"

namespace robsense {

/// One simulated experiment: geometry, noise, detectors and seed.
struct SimConfig {
  Index p = 5;
  Index n = 10;
  std::size_t trials = 1000;
  double rho = 0.0;  // linear SNR
  NoiseModel noise;
  std::vector<DetectorSpec> detectors;
  std::uint64_t master_seed = 0;
  std::uint64_t first_trial = 0;  // stream id of the first trial
  FixedPointOptions estimator_options;

  void validate() const {
    if (p < 1) throw InvalidArgument("p must be >= 1");
    if (n < 1) throw InvalidArgument("n must be >= 1");
    if (trials < 1) throw InvalidArgument("trials must be >= 1");
    if (!(rho >= 0.0) || !std::isfinite(rho)) throw InvalidArgument("rho must be >= 0");
    if (detectors.empty()) throw InvalidArgument("at least one detector is required");
    noise.validate();
    estimator_options.validate();
    for (const DetectorSpec& d : detectors) {
      d.validate();
      if (d.estimator != EstimatorKind::SCM && n <= p)
        throw InvalidArgument("detector " + d.name() + " needs n > p");
      if (d.estimator == EstimatorKind::GG_ML && noise.family != NoiseFamily::GeneralizedGaussian)
        throw InvalidArgument("detector " + d.name() + " needs generalized Gaussian noise");
    }
  }
};

/// All statistic values of one detector under one hypothesis.
struct StatSample {
  std::vector<double> values;    // ascending
  std::vector<double> by_trial;  // same values in trial order
  DetectorSpec spec;
  Hypothesis hypothesis = Hypothesis::H0;

  std::size_t size() const noexcept { return values.size(); }
};

struct EstimatorDiagnostics {
  EstimatorKind kind = EstimatorKind::SCM;
  double dof_nu = 0.0;
  std::size_t runs = 0;
  std::size_t failures = 0;
  double mean_iterations = 0.0;
  int max_iterations = 0;
};

/// Output of run_trials: one StatSample per requested detector, in order.
struct TrialBatch {
  Hypothesis hypothesis = Hypothesis::H0;
  std::size_t requested = 0;
  std::size_t excluded = 0;
  std::vector<StatSample> samples;
  std::vector<EstimatorDiagnostics> estimators;

  const StatSample& at(const DetectorSpec& spec) const {
    for (const StatSample& s : samples)
      if (s.spec == spec) return s;
    throw InvalidArgument("no sample for detector " + spec.name());
  }

  double exclusion_rate() const {
    return requested == 0 ? 0.0 : static_cast<double>(excluded) / static_cast<double>(requested);
  }
  /// At most 0.1% of trials may be dropped for non-convergence.
  bool within_exclusion_budget() const { return excluded * 1000 <= requested; }
};

namespace detail {

/// Runs body(i) for i in [0, count) on up to `threads` workers.
template <class Body>
void parallel_for(std::size_t count, unsigned threads, Body&& body) {
  threads = std::max(1u, threads);
  if (threads == 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  constexpr std::size_t kChunk = 64;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t begin = next.fetch_add(kChunk);
      if (begin >= count) return;
      const std::size_t end = std::min(count, begin + kChunk);
      for (std::size_t i = begin; i < end; ++i) body(i);
    }
  };
  std::vector<std::jthread> pool;
  const unsigned extra = static_cast<unsigned>(std::min<std::size_t>(threads, count)) - 1;
  pool.reserve(extra);
  for (unsigned t = 0; t < extra; ++t) pool.emplace_back(worker);
  worker();
}

struct EstimatorKey {
  EstimatorKind kind;
  double dof_nu;
  bool operator==(const EstimatorKey&) const = default;
};

inline EstimatorKey key_of(const DetectorSpec& d) {
  return {d.estimator, d.estimator == EstimatorKind::StudentT_ML ? d.dof_nu : 0.0};
}

inline WeightFunction weight_for(const EstimatorKey& key, const SimConfig& cfg) {
  switch (key.kind) {
    case EstimatorKind::SCM: return WeightFunction::scm(cfg.p);
    case EstimatorKind::Tyler: return WeightFunction::tyler(cfg.p);
    case EstimatorKind::StudentT_ML: return WeightFunction::student_t(cfg.p, key.dof_nu);
    case EstimatorKind::GG_ML: return WeightFunction::generalized_gaussian(cfg.p, cfg.noise.shape_s);
  }
  throw InvalidArgument("unknown estimator");
}

constexpr std::uint64_t hypothesis_tag(Hypothesis h) { return h == Hypothesis::H0 ? 0x4830 : 0x4831; }

}  // namespace detail

/// Random stream of trial `trial` (absolute index) under `hypothesis`.
inline RngStream trial_stream(const SimConfig& cfg, Hypothesis hypothesis, std::uint64_t trial) {
  return RngStream(derive_seed(cfg.master_seed, detail::hypothesis_tag(hypothesis)), trial);
}

/// Draws the sample matrix of one trial.
inline SampleMatrix draw_trial(const SimConfig& cfg, Hypothesis hypothesis, RngStream& rng) {
  const ChannelVector channel = hypothesis == Hypothesis::H1
                                    ? make_channel(cfg.p, cfg.rho, cfg.noise.sigma2, rng)
                                    : null_channel(cfg.p, cfg.noise.sigma2);
  return sample_hypothesis(cfg.noise, channel, hypothesis, cfg.n, rng);
}

/**
 * Simulates cfg.trials independent trials under one hypothesis.
 *
 * Trial i uses stream (derived seed, first_trial + i), so results do not
 * depend on the number of worker threads.  Each distinct estimator is run
 * once per trial and shared by every statistic built on it.  A trial whose
 * estimator throws or fails to converge is dropped from all samples and
 * counted in `excluded`.
 */
inline TrialBatch run_trials(const SimConfig& cfg, Hypothesis hypothesis, unsigned threads = 1) {
  cfg.validate();
  const std::size_t n_det = cfg.detectors.size();

  std::vector<detail::EstimatorKey> keys;
  std::vector<std::size_t> det_to_est(n_det);
  for (std::size_t k = 0; k < n_det; ++k) {
    const auto key = detail::key_of(cfg.detectors[k]);
    auto it = std::find(keys.begin(), keys.end(), key);
    if (it == keys.end()) it = keys.insert(keys.end(), key);
    det_to_est[k] = static_cast<std::size_t>(it - keys.begin());
  }
  std::vector<WeightFunction> weights;
  for (const auto& key : keys) weights.push_back(detail::weight_for(key, cfg));
  const std::size_t n_est = keys.size();

  const std::size_t trials = cfg.trials;
  std::vector<double> stats(trials * n_det, 0.0);
  std::vector<int> iters(trials * n_est, 0);
  std::vector<std::int8_t> failed_est(trials * n_est, 0);

  detail::parallel_for(trials, threads, [&](std::size_t i) {
    RngStream rng = trial_stream(cfg, hypothesis, cfg.first_trial + i);
    const SampleMatrix x = draw_trial(cfg, hypothesis, rng);
    std::vector<std::optional<ScatterMatrix>> est(n_est);
    for (std::size_t e = 0; e < n_est; ++e) {
      try {
        FixedPointResult r = m_estimate(x, weights[e], cfg.estimator_options);
        iters[i * n_est + e] = r.iterations;
        if (r.converged) est[e] = std::move(r.estimate);
        else failed_est[i * n_est + e] = 1;
      } catch (const Error&) {
        failed_est[i * n_est + e] = 1;
      }
    }
    for (std::size_t k = 0; k < n_det; ++k) {
      const auto& sigma = est[det_to_est[k]];
      if (sigma) stats[i * n_det + k] = evaluate(cfg.detectors[k], *sigma).value;
    }
  });

  TrialBatch batch;
  batch.hypothesis = hypothesis;
  batch.requested = trials;
  batch.samples.resize(n_det);
  for (std::size_t k = 0; k < n_det; ++k) {
    batch.samples[k].spec = cfg.detectors[k];
    batch.samples[k].hypothesis = hypothesis;
    batch.samples[k].by_trial.reserve(trials);
  }
  batch.estimators.resize(n_est);
  for (std::size_t e = 0; e < n_est; ++e) {
    batch.estimators[e].kind = keys[e].kind;
    batch.estimators[e].dof_nu = keys[e].dof_nu;
  }

  for (std::size_t i = 0; i < trials; ++i) {
    bool ok = true;
    for (std::size_t e = 0; e < n_est; ++e) {
      auto& diag = batch.estimators[e];
      ++diag.runs;
      diag.mean_iterations += iters[i * n_est + e];
      diag.max_iterations = std::max(diag.max_iterations, iters[i * n_est + e]);
      if (failed_est[i * n_est + e]) {
        ++diag.failures;
        ok = false;
      }
    }
    if (!ok) {
      ++batch.excluded;
      continue;
    }
    for (std::size_t k = 0; k < n_det; ++k) batch.samples[k].by_trial.push_back(stats[i * n_det + k]);
  }
  for (auto& diag : batch.estimators)
    if (diag.runs > 0) diag.mean_iterations /= static_cast<double>(diag.runs);
  for (auto& s : batch.samples) {
    s.values = s.by_trial;
    std::sort(s.values.begin(), s.values.end());
  }
  return batch;
}

/// Threshold sweep with P(T > t) per grid point; cdf = 1 − pfa.
struct CdfCurve {
  std::vector<double> thresholds;
  std::vector<double> pfa;

  std::vector<double> cdf() const {
    std::vector<double> c(pfa.size());
    std::transform(pfa.begin(), pfa.end(), c.begin(), [](double v) { return 1.0 - v; });
    return c;
  }
};

namespace detail {

inline void require_sorted(std::span<const double> v) {
  if (!std::is_sorted(v.begin(), v.end())) throw PreconditionError("sample values must be sorted ascending");
}

/// #{v > t} / N over an ascending sequence.
inline double exceed_fraction(std::span<const double> sorted, double t) {
  const auto above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), t);
  return static_cast<double>(above) / static_cast<double>(sorted.size());
}

}  // namespace detail

inline CdfCurve empirical_pfa_curve(const StatSample& sample, std::span<const double> grid) {
  if (sample.values.empty()) throw InvalidArgument("empty sample");
  detail::require_sorted(sample.values);
  CdfCurve c;
  c.thresholds.assign(grid.begin(), grid.end());
  c.pfa.reserve(grid.size());
  for (double t : grid) c.pfa.push_back(detail::exceed_fraction(sample.values, t));
  return c;
}

/// `resolution` thresholds taken at evenly spaced ranks of the pooled,
/// sorted values (duplicates removed).
inline std::vector<double> rank_grid(std::vector<double> pooled, std::size_t resolution) {
  if (pooled.empty()) throw InvalidArgument("empty sample");
  if (resolution < 2) throw InvalidArgument("grid resolution must be >= 2");
  std::sort(pooled.begin(), pooled.end());
  const std::size_t m = pooled.size();
  std::vector<double> grid;
  grid.reserve(resolution);
  for (std::size_t k = 0; k < resolution; ++k) {
    const std::size_t r = m == 1 ? 0 : (k * (m - 1)) / (resolution - 1);
    if (grid.empty() || pooled[r] != grid.back()) grid.push_back(pooled[r]);
  }
  return grid;
}

struct Calibration {
  double threshold = 0.0;
  double empirical_pfa = 0.0;
  bool resolvable = true;
  std::optional<std::string> warning;
};

/**
 * Order-statistic threshold for a target false-alarm rate α: the k-th
 * smallest value with k = ⌈(1 − α)·N⌉, so that #{T > t}/N ≤ α.
 */
inline Calibration calibrate_threshold(const StatSample& h0, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("target pfa must lie in (0, 1)");
  if (h0.values.empty()) throw InvalidArgument("empty sample");
  detail::require_sorted(h0.values);
  const std::size_t n = h0.values.size();
  const double nd = static_cast<double>(n);
  // ⌈N − αN⌉ = N − ⌊αN⌋; the slack absorbs rounding in αN (0.05·100 etc.).
  const auto allowed = static_cast<std::size_t>(std::floor(alpha * nd * (1.0 + 1e-12)));
  const std::size_t k = std::max<std::size_t>(1, n - std::min(allowed, n - 1));
  Calibration c;
  c.threshold = h0.values[k - 1];
  c.empirical_pfa = detail::exceed_fraction(h0.values, c.threshold);
  if (alpha * nd < 1.0 || (1.0 - alpha) * nd < 1.0) {
    c.resolvable = false;
    c.warning = "quantile unresolvable: " + std::to_string(n) + " trials cannot resolve target pfa " +
                std::to_string(alpha);
  }
  return c;
}

struct RocPoint {
  double pfa = 0.0;
  double pod = 0.0;
  bool operator==(const RocPoint&) const = default;
};

struct RocCurve {
  std::vector<RocPoint> points;  // ascending in pfa, then pod
  DetectorSpec spec;
};

/**
 * ROC from H0 and H1 samples of the same detector.  Thresholds are taken at
 * `resolution` evenly spaced ranks of the merged support; the (1, 1) point
 * (threshold below everything) is always included.
 */
inline RocCurve roc_curve(const StatSample& h0, const StatSample& h1, std::size_t resolution = 512) {
  if (!(h0.spec == h1.spec)) throw InvalidArgument("ROC needs H0 and H1 samples of the same detector");
  if (h0.values.empty() || h1.values.empty()) throw InvalidArgument("empty sample");
  detail::require_sorted(h0.values);
  detail::require_sorted(h1.values);
  std::vector<double> merged;
  merged.reserve(h0.size() + h1.size());
  std::merge(h0.values.begin(), h0.values.end(), h1.values.begin(), h1.values.end(), std::back_inserter(merged));
  const std::vector<double> grid = rank_grid(std::move(merged), std::max<std::size_t>(2, resolution));

  RocCurve roc;
  roc.spec = h0.spec;
  roc.points.reserve(grid.size() + 1);
  for (auto it = grid.rbegin(); it != grid.rend(); ++it) {
    RocPoint pt{detail::exceed_fraction(h0.values, *it), detail::exceed_fraction(h1.values, *it)};
    if (roc.points.empty() || !(roc.points.back() == pt)) roc.points.push_back(pt);
  }
  if (!(roc.points.back() == RocPoint{1.0, 1.0})) roc.points.push_back({1.0, 1.0});
  return roc;
}

/// Detection probability at `pfa_target`, linearly interpolated; on a
/// vertical segment the highest pod at that pfa is returned.
inline double pod_at_pfa(const RocCurve& curve, double pfa_target) {
  if (!(pfa_target >= 0.0 && pfa_target <= 1.0)) throw InvalidArgument("pfa must lie in [0, 1]");
  const auto& pts = curve.points;
  if (pts.empty()) throw InvalidArgument("empty ROC curve");
  auto it = std::lower_bound(pts.begin(), pts.end(), pfa_target,
                             [](const RocPoint& pt, double v) { return pt.pfa < v; });
  if (it == pts.end()) return pts.back().pod;
  if (it->pfa == pfa_target) {
    while (std::next(it) != pts.end() && std::next(it)->pfa == pfa_target) ++it;
    return it->pod;
  }
  if (it == pts.begin()) return it->pod;
  const RocPoint& hi = *it;
  const RocPoint& lo = *std::prev(it);
  const double w = (pfa_target - lo.pfa) / (hi.pfa - lo.pfa);
  return lo.pod + w * (hi.pod - lo.pod);
}

/// Two-sample Kolmogorov–Smirnov distance sup |F_a − F_b| of sorted samples.
inline double ks_distance(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw InvalidArgument("empty sample");
  detail::require_sorted(a);
  detail::require_sorted(b);
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

/// H0 (and optionally H1) batches plus ROC curves for every detector.
struct ExperimentResult {
  SimConfig config;
  TrialBatch h0;
  std::optional<TrialBatch> h1;
  std::vector<RocCurve> rocs;
  double wall_seconds = 0.0;

  bool within_exclusion_budget() const { return h0.within_exclusion_budget() && (!h1 || h1->within_exclusion_budget()); }
};

inline ExperimentResult run_experiment(const SimConfig& cfg, bool with_h1, unsigned threads = 1,
                                       std::size_t roc_resolution = 512) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentResult res{cfg, run_trials(cfg, Hypothesis::H0, threads), std::nullopt, {}, 0.0};
  if (with_h1) {
    res.h1 = run_trials(cfg, Hypothesis::H1, threads);
    for (std::size_t k = 0; k < cfg.detectors.size(); ++k)
      res.rocs.push_back(roc_curve(res.h0.samples[k], res.h1->samples[k], roc_resolution));
  }
  res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

}  // namespace robsense
