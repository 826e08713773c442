#pragma once

// Misra-Gries summary: deterministic L1 frequent-items sketch with the
// classic k-counter decrement rule. For every item,
// 0 <= f_i - estimate(i) <= threshold * processed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

namespace dphh {

class MisraGriesSummary {
 public:
  explicit MisraGriesSummary(double threshold)
      : MisraGriesSummary(threshold, default_capacity(threshold)) {}

  /// `capacity` overrides k = ceil(1/threshold); used where the nominal k
  /// exceeds the number of distinct items a block can contain.
  MisraGriesSummary(double threshold, std::uint64_t capacity)
      : threshold_(threshold), capacity_(capacity) {
    if (!(threshold_ > 0.0 && threshold_ < 1.0)) {
      throw std::invalid_argument("MisraGriesSummary: threshold must be in (0,1)");
    }
    if (capacity_ == 0) throw std::invalid_argument("MisraGriesSummary: capacity must be >= 1");
  }

  void update(std::uint64_t item) {
    ++processed_;
    auto it = counters_.find(item);
    if (it != counters_.end()) {
      ++it->second;
      return;
    }
    if (counters_.size() < capacity_) {
      counters_.emplace(item, 1);
      return;
    }
    // Decrement everything; the arriving item is dropped.
    for (auto jt = counters_.begin(); jt != counters_.end();) {
      if (--jt->second == 0) {
        jt = counters_.erase(jt);
      } else {
        ++jt;
      }
    }
  }

  std::uint64_t estimate(std::uint64_t item) const {
    auto it = counters_.find(item);
    return it == counters_.end() ? 0 : it->second;
  }

  /// Items with estimate >= (3/4) * threshold * l1_reference, sorted by
  /// estimate descending, ties by item id ascending.
  std::vector<std::pair<std::uint64_t, std::uint64_t>> heavy_hitters(
      double l1_reference) const {
    if (l1_reference < 0.0) {
      throw std::invalid_argument("MisraGriesSummary: l1_reference must be >= 0");
    }
    double cut = 0.75 * threshold_ * l1_reference;
    std::vector<std::pair<std::uint64_t, std::uint64_t>> out;
    for (const auto& [item, c] : counters_) {
      if (static_cast<double>(c) >= cut) out.emplace_back(item, c);
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    return out;
  }

  double threshold() const { return threshold_; }
  std::uint64_t capacity() const { return capacity_; }
  std::uint64_t processed() const { return processed_; }
  std::size_t size() const { return counters_.size(); }
  const std::unordered_map<std::uint64_t, std::uint64_t>& counters() const {
    return counters_;
  }

 private:
  static std::uint64_t default_capacity(double threshold) {
    if (!(threshold > 0.0 && threshold < 1.0)) return 1;
    return static_cast<std::uint64_t>(std::ceil(1.0 / threshold));
  }

  double threshold_;
  std::uint64_t capacity_;
  std::uint64_t processed_ = 0;
  std::unordered_map<std::uint64_t, std::uint64_t> counters_;
};

}  // namespace dphh
