#pragma once

// Continual release of heavy hitters over a sliding window: a leveled block
// partition with per-block Misra-Gries summaries, stitched per step through
// a binary-tree cover of at most two blocks per level. Completed blocks draw
// their Laplace noise once and cache it; the at most two still-growing
// blocks in a cover redraw fresh noise each step.
//
// Block lengths double per level off a rounded base length, which keeps the
// boundaries nested; the level count follows the configured formula and is
// additionally capped so no block exceeds the window.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "dphh/config.hpp"
#include "dphh/laplace.hpp"
#include "dphh/misra_gries.hpp"
#include "dphh/report.hpp"

namespace dphh {

class ContinualRelease {
 public:
  explicit ContinualRelease(const PrivacyConfig& cfg)
      : cfg_(cfg), noise_(derive_seed(cfg.seed, 0xc041)) {
    cfg_.validate();
    const double w = static_cast<double>(cfg_.window);
    log_w_ = std::max(1.0, std::log2(w));
    base_len_ = base_block_length(cfg_.alpha, cfg_.window);
    std::uint32_t formula = level_count_formula(cfg_.alpha, cfg_.epsilon, cfg_.window);
    double phi = std::min(cfg_.epsilon, 1.0);
    std::uint64_t len = base_len_;
    for (std::uint32_t l = 1; l <= formula && len <= cfg_.window; ++l) {
      double threshold = phi * cfg_.alpha * std::sqrt(w) /
                         (16.0 * static_cast<double>(len) * std::pow(log_w_, 3));
      threshold = std::min(0.999, std::max(1e-9, threshold));
      std::uint64_t cap = static_cast<std::uint64_t>(std::ceil(1.0 / threshold));
      cap = std::max<std::uint64_t>(1, std::min({cap, len, cfg_.universe}));
      levels_.push_back(Level{len, threshold, cap, 1, {}});
      if (len > cfg_.window / 2) break;  // next doubling would exceed W
      len *= 2;
    }
  }

  /// L = ceil(log2(100 eps/alpha * sqrt(W)) + log2 log2 W) + 2.
  static std::uint32_t level_count_formula(double alpha, double epsilon,
                                           std::uint64_t window) {
    double w = static_cast<double>(window);
    double lw = std::max(1.0, std::log2(w));
    double v = std::log2(std::max(1.0, 100.0 * epsilon / alpha * std::sqrt(w))) +
               std::log2(std::max(1.0, lw));
    double l = std::ceil(v) + 2.0;
    return static_cast<std::uint32_t>(std::max(1.0, l));
  }

  /// Level-1 block length: alpha sqrt(W) / (200 log2 W), rounded, at least 1.
  static std::uint64_t base_block_length(double alpha, std::uint64_t window) {
    double w = static_cast<double>(window);
    double lw = std::max(1.0, std::log2(w));
    double raw = alpha * std::sqrt(w) / (200.0 * lw);
    return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(raw)));
  }

  double noise_scale() const {
    double w = static_cast<double>(cfg_.window);
    double phi = std::min(cfg_.epsilon, 1.0);
    switch (cfg_.continual_scale) {
      case ContinualNoiseScale::kBoxSixteen:
        return cfg_.alpha * std::sqrt(w) / (16.0 * log_w_ * log_w_);
      case ContinualNoiseScale::kBoxSqrtAlpha:
        return std::sqrt(cfg_.alpha * w) / (8.0 * log_w_ * log_w_);
      case ContinualNoiseScale::kDerived:
      default:
        return (phi / cfg_.epsilon) * cfg_.alpha * std::sqrt(w) /
               (8.0 * log_w_ * log_w_);
    }
  }

  /// Absorbs one update and returns the report for the current window.
  HeavyHitterReport step(std::uint64_t item) {
    if (item < 1 || item > cfg_.universe) {
      throw std::out_of_range("ContinualRelease: item outside universe");
    }
    ++t_;
    for (auto& level : levels_) {
      if (level.blocks.empty() || t_ > level.blocks.back().end) {
        level.blocks.push_back(Block{level.next_start,
                                     level.next_start + level.len - 1,
                                     MisraGriesSummary(level.threshold, level.capacity),
                                     {}});
        level.next_start += level.len;
      }
      level.blocks.back().mg.update(item);
      while (!level.blocks.empty() &&
             level.blocks.front().end + cfg_.window <= t_) {
        level.blocks.pop_front();
      }
    }
    return report();
  }

  std::uint64_t now() const { return t_; }
  std::uint32_t levels() const { return static_cast<std::uint32_t>(levels_.size()); }
  std::uint64_t block_length(std::uint32_t level) const {
    return levels_.at(level - 1).len;
  }

  struct CoverBlock {
    std::uint32_t level;  // 1-based
    std::uint64_t start;
    std::uint64_t end;  // block end, may exceed the current time when growing
    bool complete;
  };

  /// The at-most-two-blocks-per-level cover of [lo, t] used by reports.
  std::vector<CoverBlock> current_cover() const {
    std::vector<CoverBlock> cover;
    if (t_ == 0) return cover;
    std::uint64_t lo = cover_start();
    std::uint64_t pos = lo;
    while (pos <= t_) {
      bool took = false;
      for (std::size_t li = levels_.size(); li-- > 0;) {
        std::uint64_t len = levels_[li].len;
        if ((pos - 1) % len == 0 && pos + len - 1 <= t_) {
          cover.push_back(CoverBlock{static_cast<std::uint32_t>(li + 1), pos,
                                     pos + len - 1, true});
          pos += len;
          took = true;
          break;
        }
      }
      if (!took) {
        // The level-1 block containing pos is still growing; it covers
        // through the current time.
        cover.push_back(CoverBlock{1, pos, pos + levels_[0].len - 1, false});
        break;
      }
    }
    return cover;
  }

  /// Stitched pre-noise estimate for one item over the current cover.
  double pre_noise_estimate(std::uint64_t item) const {
    double acc = 0.0;
    for (const auto& cb : current_cover()) {
      acc += static_cast<double>(find_block(cb.level, cb.start).mg.estimate(item));
    }
    return acc;
  }

  /// Noisy value of a completed block; drawn once and cached.
  double sealed_noisy_value(std::uint32_t level, std::uint64_t start,
                            std::uint64_t item) {
    Block& b = find_block(level, start);
    if (b.end > t_) throw std::logic_error("ContinualRelease: block still growing");
    auto it = b.noisy.find(item);
    if (it != b.noisy.end()) return it->second;
    double v = static_cast<double>(b.mg.estimate(item)) +
               (cfg_.noise ? noise_.sample(noise_scale()) : 0.0);
    b.noisy.emplace(item, v);
    return v;
  }

  const PrivacyConfig& config() const { return cfg_; }

 private:
  struct Block {
    std::uint64_t start;
    std::uint64_t end;
    MisraGriesSummary mg;
    std::unordered_map<std::uint64_t, double> noisy;
  };

  struct Level {
    std::uint64_t len;
    double threshold;
    std::uint64_t capacity;
    std::uint64_t next_start;
    std::deque<Block> blocks;
  };

  std::uint64_t cover_start() const {
    if (t_ < cfg_.window) return 1;
    std::uint64_t w0 = t_ - cfg_.window + 1;
    std::uint64_t s1 = levels_[0].len;
    std::uint64_t j = (w0 - 1 + s1 - 1) / s1;  // ceil((w0-1)/s1)
    return 1 + j * s1;
  }

  Block& find_block(std::uint32_t level, std::uint64_t start) {
    return const_cast<Block&>(
        static_cast<const ContinualRelease*>(this)->find_block(level, start));
  }

  const Block& find_block(std::uint32_t level, std::uint64_t start) const {
    const Level& l = levels_.at(level - 1);
    if (l.blocks.empty() || start < l.blocks.front().start) {
      throw std::logic_error("ContinualRelease: block expired");
    }
    std::size_t idx = (start - l.blocks.front().start) / l.len;
    const Block& b = l.blocks.at(idx);
    if (b.start != start) throw std::logic_error("ContinualRelease: unaligned block");
    return b;
  }

  HeavyHitterReport report() {
    auto cover = current_cover();
    std::set<std::uint64_t> candidates;
    for (const auto& cb : cover) {
      for (const auto& [item, c] : find_block(cb.level, cb.start).mg.counters()) {
        (void)c;
        candidates.insert(item);
      }
    }
    HeavyHitterReport rep;
    rep.window = std::min<std::uint64_t>(cfg_.window, t_);
    double cut = cfg_.alpha * std::sqrt(static_cast<double>(cfg_.window)) / 2.0;
    for (std::uint64_t item : candidates) {
      double est = 0.0;
      for (const auto& cb : cover) {
        Block& b = find_block(cb.level, cb.start);
        if (!cfg_.noise) {
          est += static_cast<double>(b.mg.estimate(item));
        } else if (cb.end <= t_) {
          est += sealed_noisy_value(cb.level, cb.start, item);
        } else {
          est += static_cast<double>(b.mg.estimate(item)) +
                 noise_.sample(noise_scale());
        }
      }
      if (est >= cut) rep.entries.push_back(ReportEntry{item, est});
    }
    sort_report_entries(rep.entries);
    return rep;
  }

  PrivacyConfig cfg_;
  double log_w_ = 1.0;
  std::uint64_t base_len_ = 1;
  std::vector<Level> levels_;
  LaplaceSampler noise_;
  std::uint64_t t_ = 0;
};

}  // namespace dphh
