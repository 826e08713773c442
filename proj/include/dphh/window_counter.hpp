#pragma once

// Additive-error sliding-window counter for a single tracked item. Every
// occurrence starts a timestamp; an interior timestamp is dropped once the
// occurrence gap between its neighbors is within the additive budget M, so
// at most f/M + O(1) timestamps survive and any window count is answered
// with 0 <= exact - answer <= max budget in force.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace dphh {

class WindowCounter {
 public:
  explicit WindowCounter(std::uint64_t tracked_item) : tracked_(tracked_item) {}

  /// Stream-driven surface: advances time by one; a matching item is
  /// recorded with the budget currently in force.
  void update(std::uint64_t item, double budget) {
    std::uint64_t t = now_ + 1;
    if (item == tracked_) {
      record(t, budget);
    } else {
      now_ = t;
    }
  }

  /// Time advances lazily between occurrences; nothing structural changes
  /// while the tracked item is absent.
  void advance_to(std::uint64_t t) { now_ = std::max(now_, t); }

  /// Occurrence of the tracked item at time t (strictly increasing). The
  /// budget applies at its integer floor: occurrence gaps are integral, so a
  /// fractional budget merges exactly as its floor does, and the floored
  /// value is what the space bound f/M + 2 is measured against.
  void record(std::uint64_t t, double budget) {
    if (t <= now_ && total_ > 0 && t <= entries_.back().time) {
      throw std::invalid_argument("WindowCounter: time must be increasing");
    }
    now_ = std::max(now_, t);
    ++total_;
    entries_.push_back(Entry{t, total_});
    double effective = budget < 0.0 ? 0.0 : std::floor(budget + 1e-9);
    if (total_ == 1 || effective < min_budget_) min_budget_ = effective;
    if (effective > max_budget_) max_budget_ = effective;
    prune(effective);
  }

  /// Count over the window [now - w + 1, now]: the count from the oldest
  /// surviving timestamp inside the window, 0 if none.
  std::uint64_t query(std::uint64_t w) const {
    if (w < 1) throw std::invalid_argument("WindowCounter: window must be >= 1");
    if (entries_.empty()) return 0;
    std::uint64_t lo = now_ >= w ? now_ - w + 1 : 1;
    auto it = std::lower_bound(
        entries_.begin(), entries_.end(), lo,
        [](const Entry& e, std::uint64_t v) { return e.time < v; });
    if (it == entries_.end()) return 0;
    return total_ - it->prefix + 1;
  }

  std::uint64_t tracked_item() const { return tracked_; }
  std::uint64_t now() const { return now_; }
  std::uint64_t occurrences() const { return total_; }
  std::size_t timestamp_count() const { return entries_.size(); }
  double min_budget_in_force() const { return total_ ? min_budget_ : 0.0; }
  double max_budget_in_force() const { return total_ ? max_budget_ : 0.0; }

  std::vector<std::uint64_t> timestamps() const {
    std::vector<std::uint64_t> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(e.time);
    return out;
  }

 private:
  struct Entry {
    std::uint64_t time;    // occurrence position
    std::uint64_t prefix;  // occurrences up to and including this one
  };

  // Greedy fixpoint: an interior timestamp dies when merging it leaves its
  // neighbors at most M occurrences apart. Gaps are fixed once both
  // neighbors exist, so scanning on occurrences only is exhaustive.
  void prune(double budget) {
    bool changed = true;
    while (changed && entries_.size() >= 3) {
      changed = false;
      for (std::size_t i = 1; i + 1 < entries_.size();) {
        double gap = static_cast<double>(entries_[i + 1].prefix -
                                         entries_[i - 1].prefix);
        if (gap <= budget + 1e-9) {
          entries_.erase(entries_.begin() + static_cast<std::ptrdiff_t>(i));
          changed = true;
          if (i > 1) --i;
        } else {
          ++i;
        }
      }
    }
  }

  std::uint64_t tracked_;
  std::uint64_t now_ = 0;
  std::uint64_t total_ = 0;
  double min_budget_ = 0.0;
  double max_budget_ = 0.0;
  std::vector<Entry> entries_;
};

}  // namespace dphh
