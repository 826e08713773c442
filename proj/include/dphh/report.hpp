#pragma once

// Released output of every heavy-hitter algorithm: (item, noisy frequency)
// pairs with a deterministic ordering.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <vector>

namespace dphh {

struct ReportEntry {
  std::uint64_t item = 0;
  double noisy_freq = 0.0;

  friend bool operator==(const ReportEntry&, const ReportEntry&) = default;
};

struct HeavyHitterReport {
  std::vector<ReportEntry> entries;
  std::uint64_t window = 0;
  std::optional<double> released_norm;  // L2 variant only

  bool contains(std::uint64_t item) const {
    for (const auto& e : entries) {
      if (e.item == item) return true;
    }
    return false;
  }

  std::optional<double> frequency_of(std::uint64_t item) const {
    for (const auto& e : entries) {
      if (e.item == item) return e.noisy_freq;
    }
    return std::nullopt;
  }
};

/// Descending noisy frequency, ties broken by ascending item id.
inline void sort_report_entries(std::vector<ReportEntry>& entries) {
  std::sort(entries.begin(), entries.end(),
            [](const ReportEntry& a, const ReportEntry& b) {
              if (a.noisy_freq != b.noisy_freq) return a.noisy_freq > b.noisy_freq;
              return a.item < b.item;
            });
}

}  // namespace dphh
