#pragma once

// Run drivers: one-shot and continual execution, the brute-force oracle
// mode, and multi-trial experiments with oracle-scored metrics. Documents
// are JSON with a fixed key order; re-running a document's config
// reproduces it byte for byte (timing is opt-in for that reason).

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "dphh/config.hpp"
#include "dphh/continual.hpp"
#include "dphh/heavy_hitters_l1.hpp"
#include "dphh/heavy_hitters_l2.hpp"
#include "dphh/oracle.hpp"
#include "dphh/report.hpp"
#include "dphh/stream.hpp"

namespace dphh {

using Json = nlohmann::ordered_json;

enum class RunMode { kOneshotL2, kOneshotL1, kContinual, kOracle, kGenerate };

inline std::string mode_name(RunMode m) {
  switch (m) {
    case RunMode::kOneshotL2: return "oneshot-l2";
    case RunMode::kOneshotL1: return "oneshot-l1";
    case RunMode::kContinual: return "continual";
    case RunMode::kOracle: return "oracle";
    case RunMode::kGenerate: return "generate";
  }
  return "?";
}

inline RunMode parse_mode(const std::string& s) {
  if (s == "oneshot-l2") return RunMode::kOneshotL2;
  if (s == "oneshot-l1") return RunMode::kOneshotL1;
  if (s == "continual") return RunMode::kContinual;
  if (s == "oracle") return RunMode::kOracle;
  if (s == "generate") return RunMode::kGenerate;
  throw std::invalid_argument("unknown mode '" + s + "'");
}

struct RunConfig {
  RunMode mode = RunMode::kOneshotL2;
  PrivacyConfig privacy;
  int norm_p = 2;              // oracle mode
  std::string input_path;      // file path, or "-" for stdin
  std::string generator;       // generator spec string
  std::string output_path;     // empty = stdout
  std::string format = "text"; // generate mode output format
  std::uint64_t trials = 0;    // 0 = single run, >= 1 = experiment
  double failure_exponent = 1.0;
  bool emit_timing = false;

  void validate() const {
    privacy.validate();
    if (norm_p != 1 && norm_p != 2) throw std::invalid_argument("norm must be 1 or 2");
    if (failure_exponent <= 0.0) throw std::invalid_argument("failure exponent must be > 0");
    bool has_input = !input_path.empty();
    bool has_gen = !generator.empty();
    if (mode == RunMode::kGenerate) {
      if (!has_gen) throw std::invalid_argument("generate mode needs --generator");
      if (format != "text" && format != "binary") {
        throw std::invalid_argument("format must be text or binary");
      }
      return;
    }
    if (has_input == has_gen) {
      throw std::invalid_argument("exactly one of --input and --generator is required");
    }
    if (has_gen) GeneratorSpec::parse(generator);
  }
};

inline Json config_json(const RunConfig& cfg) {
  const PrivacyConfig& p = cfg.privacy;
  Json j;
  j["mode"] = mode_name(cfg.mode);
  j["alpha"] = p.alpha;
  j["epsilon"] = p.epsilon;
  j["delta"] = p.delta;
  j["window"] = p.window;
  j["universe"] = p.universe;
  j["stream-length"] = p.stream_bound;
  j["kappa"] = p.kappa;
  j["kappa-w"] = p.kappa_w;
  j["noise"] = p.noise;
  j["seed"] = p.seed;
  j["input"] = cfg.input_path;
  j["generator"] = cfg.generator;
  j["trials"] = cfg.trials;
  j["norm"] = cfg.norm_p;
  j["failure-exponent"] = cfg.failure_exponent;
  j["ams-rows"] = p.ams_rows;
  j["ams-reps"] = p.ams_reps;
  j["cs-rows"] = p.cs_rows;
  j["cs-bucket-cap"] = p.cs_bucket_cap;
  j["spawn-every"] = p.spawn_every;
  j["prune-every"] = p.prune_every;
  j["cs-estimator"] =
      p.cs_estimator == CsEstimator::kMedianSigned ? "median" : "mean-abs";
  j["l1-box-noise"] = p.l1_box_noise;
  j["continual-scale"] = p.continual_scale == ContinualNoiseScale::kDerived
                             ? "derived"
                             : (p.continual_scale == ContinualNoiseScale::kBoxSixteen
                                    ? "box16"
                                    : "boxsqrt");
  return j;
}

/// Loads the configured stream; `trial` derives per-trial generator seeds.
inline Stream load_run_stream(const RunConfig& cfg, std::uint64_t trial = 0) {
  if (!cfg.generator.empty()) {
    GeneratorSpec spec = GeneratorSpec::parse(cfg.generator);
    spec.length = cfg.privacy.stream_bound;
    spec.universe = cfg.privacy.universe;
    spec.seed = trial == 0 ? cfg.privacy.seed
                           : derive_seed(cfg.privacy.seed, 0x9e21, trial);
    return generate_stream(spec);
  }
  if (cfg.input_path == "-") return parse_stream(std::cin, cfg.privacy.universe);
  std::ifstream in(cfg.input_path, std::ios::binary);
  if (!in) throw StreamIoError("cannot open input '" + cfg.input_path + "'");
  return parse_stream(in, cfg.privacy.universe);
}

inline Json report_json(const HeavyHitterReport& rep, bool with_norm) {
  Json j;
  j["window"] = rep.window;
  if (with_norm) {
    if (rep.released_norm) {
      j["released-l2"] = *rep.released_norm;
    } else {
      j["released-l2"] = nullptr;
    }
  }
  Json entries = Json::array();
  for (const auto& e : rep.entries) {
    entries.push_back(Json{{"item", e.item}, {"noisy-freq", e.noisy_freq}});
  }
  j["entries"] = std::move(entries);
  return j;
}

namespace harness_detail {

struct OneshotOutcome {
  HeavyHitterReport report;
  Json stats;
};

inline OneshotOutcome run_oneshot_once(const RunConfig& cfg, const Stream& stream) {
  if (stream.empty()) throw std::invalid_argument("empty stream: nothing to query");
  if (cfg.privacy.window > stream.size()) {
    throw std::invalid_argument("window exceeds the stream length");
  }
  OneshotOutcome out;
  if (cfg.mode == RunMode::kOneshotL2) {
    L2HeavyHitter hh(cfg.privacy);
    for (auto x : stream) hh.update(x);
    out.report = hh.query(cfg.privacy.window);
    out.stats["updates"] = hh.updates();
    out.stats["live-instances"] = hh.live_instances();
    out.stats["tracked-counters"] = hh.tracked_counters();
    out.stats["max-counter-timestamps"] = hh.max_counter_timestamps();
    out.stats["warnings"] = hh.warnings();
  } else {
    L1HeavyHitter hh(cfg.privacy);
    for (auto x : stream) hh.update(x);
    out.report = hh.query(cfg.privacy.window);
    out.stats["updates"] = hh.updates();
    out.stats["live-instances"] = hh.live_instances();
    out.stats["tracked-counters"] = hh.tracked_counters();
    out.stats["warnings"] = Json::array();
  }
  return out;
}

struct TrialScore {
  double recall = 1.0;
  double precision = 1.0;  // reported items outside must_not_report
  std::uint64_t violations = 0;
  double max_err_norm = 0.0;
  double mean_err_norm = 0.0;
  bool failure = false;
  std::uint64_t live_instances = 0;
  std::uint64_t tracked_counters = 0;
};

inline TrialScore score_oneshot(const RunConfig& cfg, const Stream& stream,
                                const HeavyHitterReport& rep,
                                std::uint64_t live, std::uint64_t counters) {
  const PrivacyConfig& p = cfg.privacy;
  int norm_p = cfg.mode == RunMode::kOneshotL1 ? 1 : 2;
  auto freqs = oracle::exact_window_freqs(stream, stream.size(), p.window);
  auto cls = oracle::exact_heavy_hitters(freqs, p.alpha, norm_p);
  double denom = norm_p == 1 ? static_cast<double>(p.window)
                             : oracle::exact_lp(freqs, 2);
  if (denom <= 0.0) denom = 1.0;

  TrialScore s;
  s.live_instances = live;
  s.tracked_counters = counters;
  if (!cls.must_report.empty()) {
    std::size_t hit = 0;
    for (auto k : cls.must_report) {
      if (rep.contains(k)) ++hit;
    }
    s.recall = static_cast<double>(hit) / static_cast<double>(cls.must_report.size());
  }
  double err_sum = 0.0;
  for (const auto& e : rep.entries) {
    if (cls.must_not_report.count(e.item)) s.violations += 1;
    auto it = freqs.find(e.item);
    double truth = it == freqs.end() ? 0.0 : static_cast<double>(it->second);
    double err = std::fabs(e.noisy_freq - truth) / denom;
    s.max_err_norm = std::max(s.max_err_norm, err);
    err_sum += err;
  }
  s.mean_err_norm = rep.entries.empty() ? 0.0 : err_sum / double(rep.entries.size());
  s.precision = rep.entries.empty()
                    ? 1.0
                    : 1.0 - double(s.violations) / double(rep.entries.size());
  s.failure = s.recall < 1.0 || s.violations > 0 || s.max_err_norm > p.alpha / 4.0;
  return s;
}

inline TrialScore score_continual(const RunConfig& cfg, const Stream& stream,
                                  std::uint64_t trial_seed) {
  const PrivacyConfig& p = cfg.privacy;
  PrivacyConfig tp = p;
  tp.seed = trial_seed;
  ContinualRelease cr(tp);
  double bound = p.alpha * std::sqrt(static_cast<double>(p.window)) / 2.0;

  std::uint64_t steps = 0, recall_ok = 0, err_ok = 0;
  double worst_err = 0.0;
  for (std::uint64_t t = 1; t <= stream.size(); ++t) {
    auto rep = cr.step(stream[t - 1]);
    if (t < p.window) continue;
    ++steps;
    auto freqs = oracle::exact_window_freqs(stream, t, p.window);
    bool recall = true;
    for (const auto& [k, f] : freqs) {
      if (static_cast<double>(f) >= p.alpha * std::sqrt(double(p.window)) &&
          !rep.contains(k)) {
        recall = false;
      }
    }
    bool err_fine = true;
    for (const auto& e : rep.entries) {
      auto it = freqs.find(e.item);
      double truth = it == freqs.end() ? 0.0 : static_cast<double>(it->second);
      double err = std::fabs(e.noisy_freq - truth);
      worst_err = std::max(worst_err, err / std::max(1.0, bound));
      if (err > bound) err_fine = false;
    }
    recall_ok += recall;
    err_ok += err_fine;
  }
  TrialScore s;
  s.recall = steps ? double(recall_ok) / double(steps) : 1.0;
  s.mean_err_norm = steps ? 1.0 - double(err_ok) / double(steps) : 0.0;
  s.max_err_norm = worst_err;
  s.failure = steps ? (s.recall < 0.95 || double(err_ok) / double(steps) < 0.95) : false;
  s.live_instances = cr.levels();
  return s;
}

inline double quantile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  double idx = q * double(v.size() - 1);
  std::size_t lo = static_cast<std::size_t>(idx);
  std::size_t hi = std::min(lo + 1, v.size() - 1);
  double frac = idx - double(lo);
  return v[lo] * (1 - frac) + v[hi] * frac;
}

}  // namespace harness_detail

/// Single one-shot run: feed the stream, one query at the final position.
inline Json run_oneshot(const RunConfig& cfg) {
  auto t0 = std::chrono::steady_clock::now();
  Stream stream = load_run_stream(cfg);
  auto outcome = harness_detail::run_oneshot_once(cfg, stream);
  Json doc;
  doc["kind"] = mode_name(cfg.mode);
  doc["config"] = config_json(cfg);
  doc["report"] = report_json(outcome.report, cfg.mode == RunMode::kOneshotL2);
  doc["stats"] = outcome.stats;
  if (cfg.emit_timing) {
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                  std::chrono::steady_clock::now() - t0)
                  .count();
    doc["timing"] = Json{{"wall-ms", ms}};
  }
  return doc;
}

/// Continual run: one JSON line per stream position; the first line also
/// carries the config echo. Returns the number of lines written.
inline std::uint64_t run_continual(const RunConfig& cfg, std::ostream& out) {
  Stream stream = load_run_stream(cfg);
  if (stream.empty()) throw std::invalid_argument("empty stream: nothing to release");
  ContinualRelease cr(cfg.privacy);
  std::uint64_t lines = 0;
  for (std::uint64_t t = 1; t <= stream.size(); ++t) {
    auto rep = cr.step(stream[t - 1]);
    Json line;
    line["t"] = t;
    if (t == 1) line["config"] = config_json(cfg);
    Json entries = Json::array();
    for (const auto& e : rep.entries) {
      entries.push_back(Json{{"item", e.item}, {"noisy-freq", e.noisy_freq}});
    }
    line["entries"] = std::move(entries);
    out << line.dump() << '\n';
    ++lines;
  }
  return lines;
}

/// Brute-force reference answers for the configured window.
inline Json run_oracle(const RunConfig& cfg) {
  Stream stream = load_run_stream(cfg);
  if (stream.empty()) throw std::invalid_argument("empty stream: nothing to analyze");
  if (cfg.privacy.window > stream.size()) {
    throw std::invalid_argument("window exceeds the stream length");
  }
  auto freqs = oracle::exact_window_freqs(stream, stream.size(), cfg.privacy.window);
  auto cls = oracle::exact_heavy_hitters(freqs, cfg.privacy.alpha, cfg.norm_p);
  Json doc;
  doc["kind"] = "oracle";
  doc["config"] = config_json(cfg);
  Json o;
  o["position"] = stream.size();
  o["window"] = cfg.privacy.window;
  o["l1"] = oracle::exact_lp(freqs, 1);
  o["l2"] = oracle::exact_lp(freqs, 2);
  Json fr = Json::array();
  for (const auto& [k, v] : freqs) fr.push_back(Json{{"item", k}, {"count", v}});
  o["freqs"] = std::move(fr);
  o["must-report"] = cls.must_report;
  o["must-not-report"] = cls.must_not_report;
  doc["oracle"] = std::move(o);
  return doc;
}

/// Repeats the configured run over derived seeds and scores each trial
/// against the oracle; trials execute in parallel.
inline Json run_experiment(const RunConfig& cfg) {
  if (cfg.trials < 1) throw std::invalid_argument("experiment needs trials >= 1");
  const std::uint64_t n_trials = cfg.trials;
  const bool generated = !cfg.generator.empty();
  Stream shared;
  if (!generated) shared = load_run_stream(cfg);

  auto run_trial = [&](std::uint64_t t) -> harness_detail::TrialScore {
    Stream local = generated ? load_run_stream(cfg, t + 1) : shared;
    std::uint64_t trial_seed = derive_seed(cfg.privacy.seed, 0x7f1a, t + 1);
    if (cfg.mode == RunMode::kContinual) {
      return harness_detail::score_continual(cfg, local, trial_seed);
    }
    RunConfig tc = cfg;
    tc.privacy.seed = trial_seed;
    auto outcome = harness_detail::run_oneshot_once(tc, local);
    std::uint64_t live = outcome.stats["live-instances"].get<std::uint64_t>();
    std::uint64_t counters = outcome.stats.contains("tracked-counters")
                                 ? outcome.stats["tracked-counters"].get<std::uint64_t>()
                                 : 0;
    return harness_detail::score_oneshot(tc, local, outcome.report, live, counters);
  };

  std::vector<harness_detail::TrialScore> scores(n_trials);
  unsigned workers = std::max(1u, std::min<unsigned>(
                                      std::thread::hardware_concurrency(),
                                      static_cast<unsigned>(n_trials)));
  std::vector<std::future<void>> futs;
  std::atomic<std::uint64_t> next{0};
  for (unsigned w = 0; w < workers; ++w) {
    futs.push_back(std::async(std::launch::async, [&] {
      for (;;) {
        std::uint64_t t = next.fetch_add(1);
        if (t >= n_trials) return;
        scores[t] = run_trial(t);
      }
    }));
  }
  for (auto& f : futs) f.get();

  std::vector<double> recalls, precisions, max_errs, mean_errs, lives, counters;
  std::uint64_t violation_trials = 0, failures = 0;
  for (const auto& s : scores) {
    recalls.push_back(s.recall);
    precisions.push_back(s.precision);
    max_errs.push_back(s.max_err_norm);
    mean_errs.push_back(s.mean_err_norm);
    lives.push_back(double(s.live_instances));
    counters.push_back(double(s.tracked_counters));
    violation_trials += s.violations > 0 ? 1 : 0;
    failures += s.failure ? 1 : 0;
  }
  using harness_detail::quantile;
  double m = static_cast<double>(cfg.privacy.stream_bound);

  Json doc;
  doc["kind"] = "experiment";
  doc["config"] = config_json(cfg);
  Json metrics;
  metrics["trials"] = n_trials;
  double recall_sum = 0;
  for (double r : recalls) recall_sum += r;
  metrics["recall-mean"] = recall_sum / double(n_trials);
  metrics["recall-min"] = *std::min_element(recalls.begin(), recalls.end());
  double precision_sum = 0;
  for (double p : precisions) precision_sum += p;
  metrics["precision-mean"] = precision_sum / double(n_trials);
  metrics["precision-min"] = *std::min_element(precisions.begin(), precisions.end());
  metrics["soundness-violation-rate"] = double(violation_trials) / double(n_trials);
  metrics["freq-error-max"] = *std::max_element(max_errs.begin(), max_errs.end());
  double mean_err_sum = 0;
  for (double e : mean_errs) mean_err_sum += e;
  metrics["freq-error-mean"] = mean_err_sum / double(n_trials);
  metrics["failure-rate"] = double(failures) / double(n_trials);
  metrics["failure-target"] = 1.0 / std::pow(m, cfg.failure_exponent);
  metrics["live-instances-p50"] = quantile(lives, 0.5);
  metrics["live-instances-p95"] = quantile(lives, 0.95);
  metrics["live-instances-max"] = *std::max_element(lives.begin(), lives.end());
  metrics["tracked-counters-p50"] = quantile(counters, 0.5);
  metrics["tracked-counters-p95"] = quantile(counters, 0.95);
  doc["metrics"] = std::move(metrics);

  Json per_trial = Json::array();
  for (std::uint64_t t = 0; t < n_trials; ++t) {
    const auto& s = scores[t];
    per_trial.push_back(Json{{"trial", t},
                             {"recall", s.recall},
                             {"violations", s.violations},
                             {"freq-error-max", s.max_err_norm},
                             {"failure", s.failure},
                             {"live-instances", s.live_instances}});
  }
  doc["per-trial"] = std::move(per_trial);
  return doc;
}

}  // namespace dphh
