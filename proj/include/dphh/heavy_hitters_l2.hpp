#pragma once

// One-shot differentially private L2-heavy hitters over a sliding window.
//
// A smooth histogram of AMS instances maintains timestamps whose suffix
// norms ladder down geometrically. Each live timestamp carries a CountSketch
// over its suffix (realized as a snapshot against one shared table) and a
// pool of additive-error window counters, one per item the sketch has
// reported at the tracking threshold. A window query selects the timestamp
// straddling the window start, reads the counter values, and privatizes the
// threshold test and the released frequencies with Laplace noise calibrated
// to smooth sensitivity bounds.
//
// For windows below the configured cutoff the exact-window fallback answers
// from a verbatim buffer of recent items, with the same noise pipeline.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dphh/ams.hpp"
#include "dphh/config.hpp"
#include "dphh/count_sketch.hpp"
#include "dphh/laplace.hpp"
#include "dphh/report.hpp"
#include "dphh/smooth_histogram.hpp"
#include "dphh/window_counter.hpp"

namespace dphh {

class L2HeavyHitter {
 public:
  explicit L2HeavyHitter(PrivacyConfig cfg)
      : cfg_(std::move(cfg)),
        theta_(cfg_.tracking_threshold()),
        budget_coeff_(cfg_.counter_budget_coeff()),
        cs_(cfg_.cs_rows, cfg_.derived_cs_buckets(), cfg_.universe, theta_,
            derive_seed(cfg_.seed, 0xc5c5), cfg_.cs_estimator),
        hist_(AmsL2Bank(AmsSketch(cfg_.derived_ams_rows(), cfg_.ams_reps,
                                  cfg_.universe,
                                  derive_seed(cfg_.seed, 0xa5a5))),
              {.gap = cfg_.histogram_gap(),
               .spawn_every = cfg_.spawn_every,
               .prune_every = cfg_.prune_every}),
        noise_(derive_seed(cfg_.seed, 0x7a9e)) {
    cfg_.validate();
    fallback_keep_ = fallback_retention();
    if (!cfg_.epsilon_meets_floor()) {
      warnings_.push_back(cfg_.epsilon_floor_warning());
    }
    hist_.set_on_spawn([this](std::uint64_t start) {
      per_ts_.emplace(start, PerTs{std::move(pending_snap_), 0.0, {}});
    });
    hist_.set_on_evict([this](std::uint64_t start) { per_ts_.erase(start); });
  }

  void update(std::uint64_t item) {
    if (item < 1 || item > cfg_.universe) {
      throw std::out_of_range("L2HeavyHitter: item outside universe");
    }
    std::uint64_t t = t_ + 1;
    bool spawn = (t - 1) % cfg_.spawn_every == 0;
    if (spawn) pending_snap_ = cs_.snapshot();  // suffix starts at t inclusive
    cs_.update(item);
    hist_.update(item);  // spawns and prunes; callbacks keep per_ts_ in sync
    t_ = t;
    if (spawn || t_ % cfg_.prune_every == 0) refresh_cached_norms();

    if (fallback_keep_ > 0) {
      recent_.push_back(item);
      if (recent_.size() > fallback_keep_) recent_.pop_front();
    }

    std::size_t cells_stack[32];
    int signs_stack[32];
    std::vector<std::size_t> cells_heap;
    std::vector<int> signs_heap;
    std::size_t* cells = cells_stack;
    int* signs = signs_stack;
    if (cs_.rows() > 32) {
      cells_heap.resize(cs_.rows());
      signs_heap.resize(cs_.rows());
      cells = cells_heap.data();
      signs = signs_heap.data();
    }
    cs_.hash_item(item, cells, signs);

    for (auto& [start, ts] : per_ts_) {
      double budget = budget_coeff_ * ts.cached_norm;
      auto it = ts.pool.find(item);
      if (it != ts.pool.end()) {
        it->second.record(t_, budget);
        continue;
      }
      // Only the arriving item can newly cross its own tracking threshold.
      double est = cs_.estimate_since_hashed(ts.cs_snap, cells, signs);
      if (est >= 0.75 * theta_ * ts.cached_norm) {
        auto [jt, inserted] = ts.pool.emplace(item, WindowCounter(item));
        (void)inserted;
        jt->second.record(t_, budget);
      }
    }
  }

  /// One-shot release for the window of the last `w` updates.
  HeavyHitterReport query(std::uint64_t w) {
    if (t_ == 0) throw std::logic_error("L2HeavyHitter: no data");
    if (w < 1 || w > t_) {
      throw std::out_of_range("L2HeavyHitter: window outside [1, updates]");
    }
    if (static_cast<double>(w) <= cfg_.fallback_cutoff() && w <= recent_.size()) {
      return query_exact_window(w);
    }

    auto sel = hist_.query(w);
    double norm_est = sel.estimate;
    PerTs& ts = per_ts_.at(sel.start);

    std::vector<std::uint64_t> candidates;
    candidates.reserve(ts.pool.size());
    for (const auto& [item, counter] : ts.pool) {
      if (cs_.estimate_since(ts.cs_snap, item) >= 0.75 * theta_ * norm_est) {
        candidates.push_back(item);
      }
    }
    std::sort(candidates.begin(), candidates.end());

    std::vector<double> freqs;
    freqs.reserve(candidates.size());
    for (auto item : candidates) {
      auto& counter = ts.pool.at(item);
      counter.advance_to(t_);
      freqs.push_back(static_cast<double>(counter.query(w)));
    }
    return release(w, norm_est, candidates, freqs);
  }

  const PrivacyConfig& config() const { return cfg_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  std::uint64_t updates() const { return t_; }
  std::size_t live_instances() const { return hist_.live_instances(); }
  double tracking_threshold() const { return theta_; }

  std::size_t tracked_counters() const {
    std::size_t total = 0;
    for (const auto& [start, ts] : per_ts_) total += ts.pool.size();
    return total;
  }

  std::size_t max_counters_per_timestamp() const {
    std::size_t m = 0;
    for (const auto& [start, ts] : per_ts_) m = std::max(m, ts.pool.size());
    return m;
  }

  std::size_t max_counter_timestamps() const {
    std::size_t m = 0;
    for (const auto& [start, ts] : per_ts_) {
      for (const auto& [item, c] : ts.pool) m = std::max(m, c.timestamp_count());
    }
    return m;
  }

  /// Worst live ratio of timestamp count to occurrences/min-budget; the
  /// space-bound assertions read this directly.
  std::vector<std::pair<std::size_t, double>> counter_space_profile() const {
    std::vector<std::pair<std::size_t, double>> out;
    for (const auto& [start, ts] : per_ts_) {
      for (const auto& [item, c] : ts.pool) {
        double bound = c.min_budget_in_force() > 0.0
                           ? static_cast<double>(c.occurrences()) /
                                     c.min_budget_in_force() +
                                 2.0
                           : static_cast<double>(c.occurrences());
        out.emplace_back(c.timestamp_count(), bound);
      }
    }
    return out;
  }

  /// Pre-noise view for the neighbor-stability checks: selected norm
  /// estimate and counter frequencies, no Laplace draws.
  struct PreNoiseView {
    std::uint64_t start = 0;
    double norm_estimate = 0.0;
    std::map<std::uint64_t, double> frequencies;
  };

  PreNoiseView pre_noise_view(std::uint64_t w) {
    if (t_ == 0 || w < 1 || w > t_) {
      throw std::out_of_range("L2HeavyHitter: window outside [1, updates]");
    }
    auto sel = hist_.query(w);
    PreNoiseView view;
    view.start = sel.start;
    view.norm_estimate = sel.estimate;
    for (auto& [item, counter] : per_ts_.at(sel.start).pool) {
      counter.advance_to(t_);
      view.frequencies[item] = static_cast<double>(counter.query(w));
    }
    return view;
  }

 private:
  struct PerTs {
    CountSketchTable::Snapshot cs_snap;
    double cached_norm = 0.0;
    std::unordered_map<std::uint64_t, WindowCounter> pool;
  };

  std::size_t fallback_retention() const {
    double cutoff = cfg_.fallback_cutoff();
    if (cutoff < 1.0) return 0;
    double keep = std::min(cutoff, static_cast<double>(cfg_.stream_bound));
    return static_cast<std::size_t>(
        std::min(keep, static_cast<double>(std::size_t{1} << 24)));
  }

  void refresh_cached_norms() {
    auto starts = hist_.starts();
    for (std::size_t i = 0; i < starts.size(); ++i) {
      auto it = per_ts_.find(starts[i]);
      if (it != per_ts_.end()) it->second.cached_norm = hist_.estimate_at(i);
    }
  }

  HeavyHitterReport query_exact_window(std::uint64_t w) {
    std::map<std::uint64_t, std::uint64_t> freqs;
    for (std::size_t i = recent_.size() - w; i < recent_.size(); ++i) {
      freqs[recent_[i]] += 1;
    }
    double f2 = 0.0;
    for (const auto& [item, f] : freqs) {
      f2 += static_cast<double>(f) * static_cast<double>(f);
    }
    double norm = std::sqrt(f2);
    std::vector<std::uint64_t> candidates;
    std::vector<double> values;
    for (const auto& [item, f] : freqs) {
      candidates.push_back(item);
      values.push_back(static_cast<double>(f));
    }
    return release(w, norm, candidates, values);
  }

  HeavyHitterReport release(std::uint64_t w, double norm_est,
                            const std::vector<std::uint64_t>& candidates,
                            const std::vector<double>& freqs) {
    double x = draw(cfg_.norm_noise_scale(norm_est));
    double released_norm = norm_est + x;
    HeavyHitterReport report;
    report.window = w;
    report.released_norm = released_norm;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      double y = draw(cfg_.freq_noise_scale(norm_est));
      double z = draw(cfg_.freq_noise_scale(norm_est));
      double noisy = freqs[i] + z;
      if (noisy >= 0.75 * cfg_.alpha * released_norm + y) {
        report.entries.push_back(ReportEntry{candidates[i], noisy});
      }
    }
    sort_report_entries(report.entries);
    return report;
  }

  double draw(double scale) {
    if (!cfg_.noise || scale <= 0.0) return 0.0;
    return noise_.sample(scale);
  }

  PrivacyConfig cfg_;
  double theta_;
  double budget_coeff_;
  CountSketchTable cs_;
  SmoothHistogram<AmsL2Bank> hist_;
  LaplaceSampler noise_;
  std::map<std::uint64_t, PerTs> per_ts_;
  CountSketchTable::Snapshot pending_snap_;
  std::deque<std::uint64_t> recent_;
  std::size_t fallback_keep_ = 0;
  std::uint64_t t_ = 0;
  std::vector<std::string> warnings_;
};

}  // namespace dphh
