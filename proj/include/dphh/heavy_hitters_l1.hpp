#pragma once

// One-shot pure-DP L1-heavy hitters over a sliding window.
//
// The L1 norm of a suffix is its length, so the timestamp set is
// deterministic: an interior timestamp survives while the age before it
// exceeds 1.01 times the age after it. Each timestamp runs a Misra-Gries
// summary at threshold alpha/16 and a pool of additive window counters with
// budget (alpha/32) * age. The released frequencies carry Laplace noise of
// scale 2/eps (release sensitivity 2); the literal box scale
// 1/(eps alpha log m) sits behind a config flag.

#include <algorithm>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dphh/config.hpp"
#include "dphh/laplace.hpp"
#include "dphh/misra_gries.hpp"
#include "dphh/report.hpp"
#include "dphh/smooth_histogram.hpp"
#include "dphh/window_counter.hpp"

namespace dphh {

class L1HeavyHitter {
 public:
  // Age-ladder parameter: deletion at ratio 100/101 reproduces the
  // deterministic 1.01 timestamp rule exactly.
  static constexpr double kAgeGap = 2.0 / 101.0;

  explicit L1HeavyHitter(PrivacyConfig cfg)
      : cfg_(std::move(cfg)),
        mg_threshold_(cfg_.alpha / 16.0),
        hist_(AgeBank{}, {.gap = kAgeGap,
                          .spawn_every = cfg_.spawn_every,
                          .prune_every = cfg_.prune_every}),
        noise_(derive_seed(cfg_.seed, 0x11aa)) {
    cfg_.validate();
    hist_.set_on_spawn([this](std::uint64_t start) {
      per_ts_.emplace(start, PerTs{MisraGriesSummary(mg_threshold_), {}});
    });
    hist_.set_on_evict([this](std::uint64_t start) { per_ts_.erase(start); });
  }

  void update(std::uint64_t item) {
    if (item < 1 || item > cfg_.universe) {
      throw std::out_of_range("L1HeavyHitter: item outside universe");
    }
    hist_.update(item);
    ++t_;
    for (auto& [start, ts] : per_ts_) {
      ts.mg.update(item);
      double age = static_cast<double>(t_ - start + 1);
      double budget = cfg_.alpha / 32.0 * age;
      auto it = ts.pool.find(item);
      if (it != ts.pool.end()) {
        it->second.record(t_, budget);
      } else if (static_cast<double>(ts.mg.estimate(item)) >=
                 0.75 * mg_threshold_ * age) {
        auto [jt, inserted] = ts.pool.emplace(item, WindowCounter(item));
        (void)inserted;
        jt->second.record(t_, budget);
      }
    }
  }

  HeavyHitterReport query(std::uint64_t w) {
    if (t_ == 0) throw std::logic_error("L1HeavyHitter: no data");
    if (w < 1 || w > t_) {
      throw std::out_of_range("L1HeavyHitter: window outside [1, updates]");
    }
    auto sel = hist_.query(w);
    PerTs& ts = per_ts_.at(sel.start);
    double age = static_cast<double>(t_ - sel.start + 1);

    std::vector<std::uint64_t> candidates;
    candidates.reserve(ts.pool.size());
    for (const auto& [item, counter] : ts.pool) {
      if (static_cast<double>(ts.mg.estimate(item)) >= 0.75 * mg_threshold_ * age) {
        candidates.push_back(item);
      }
    }
    std::sort(candidates.begin(), candidates.end());

    HeavyHitterReport report;
    report.window = w;
    double cut = 0.75 * cfg_.alpha * static_cast<double>(w);
    for (auto item : candidates) {
      auto& counter = ts.pool.at(item);
      counter.advance_to(t_);
      double noisy = static_cast<double>(counter.query(w)) +
                     (cfg_.noise ? noise_.sample(cfg_.l1_noise_scale()) : 0.0);
      if (noisy >= cut) report.entries.push_back(ReportEntry{item, noisy});
    }
    sort_report_entries(report.entries);
    return report;
  }

  const PrivacyConfig& config() const { return cfg_; }
  std::uint64_t updates() const { return t_; }
  std::size_t live_instances() const { return hist_.live_instances(); }

  std::vector<std::uint64_t> timestamp_starts() const { return hist_.starts(); }

  std::size_t tracked_counters() const {
    std::size_t total = 0;
    for (const auto& [start, ts] : per_ts_) total += ts.pool.size();
    return total;
  }

  /// Pre-noise counter values at the selected timestamp.
  std::map<std::uint64_t, double> pre_noise_frequencies(std::uint64_t w) {
    if (t_ == 0 || w < 1 || w > t_) {
      throw std::out_of_range("L1HeavyHitter: window outside [1, updates]");
    }
    auto sel = hist_.query(w);
    std::map<std::uint64_t, double> out;
    for (auto& [item, counter] : per_ts_.at(sel.start).pool) {
      counter.advance_to(t_);
      out[item] = static_cast<double>(counter.query(w));
    }
    return out;
  }

 private:
  struct PerTs {
    MisraGriesSummary mg;
    std::unordered_map<std::uint64_t, WindowCounter> pool;
  };

  PrivacyConfig cfg_;
  double mg_threshold_;
  SmoothHistogram<AgeBank> hist_;
  LaplaceSampler noise_;
  std::map<std::uint64_t, PerTs> per_ts_;
  std::uint64_t t_ = 0;
};

}  // namespace dphh
