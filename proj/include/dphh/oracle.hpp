#pragma once

// Exact brute-force references used by the test and acceptance suites:
// window frequencies, Lp norms, heavy-hitter classification, and
// neighboring-stream generation. Retains the full stream; correctness over
// space by design.

#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dphh/prng.hpp"

namespace dphh::oracle {

using Stream = std::vector<std::uint64_t>;
using FreqMap = std::map<std::uint64_t, std::uint64_t>;

/// Exact item counts over the window [max(1, t - w + 1), t] of the stream
/// (positions are 1-based). Requires 1 <= t <= |stream|.
inline FreqMap exact_window_freqs(const Stream& stream, std::uint64_t t,
                                  std::uint64_t w) {
  if (t < 1 || t > stream.size()) {
    throw std::out_of_range("exact_window_freqs: position out of range");
  }
  if (w < 1) throw std::invalid_argument("exact_window_freqs: w must be >= 1");
  std::uint64_t lo = t >= w ? t - w + 1 : 1;
  FreqMap freqs;
  for (std::uint64_t i = lo; i <= t; ++i) freqs[stream[i - 1]] += 1;
  return freqs;
}

/// Exact Lp norm of a frequency map, p in {1, 2}.
inline double exact_lp(const FreqMap& freqs, int p) {
  if (p != 1 && p != 2) throw std::invalid_argument("exact_lp: p must be 1 or 2");
  double acc = 0.0;
  for (const auto& [item, f] : freqs) {
    (void)item;
    double v = static_cast<double>(f);
    acc += p == 1 ? v : v * v;
  }
  return p == 1 ? acc : std::sqrt(acc);
}

struct HeavyHitterClassification {
  std::set<std::uint64_t> must_report;      // f_k >= alpha * Lp
  std::set<std::uint64_t> must_not_report;  // f_k <= (alpha/2) * Lp
};

/// Two-sided classification with the (alpha/2, alpha) gray zone in neither set.
inline HeavyHitterClassification exact_heavy_hitters(const FreqMap& freqs,
                                                     double alpha, int p) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("exact_heavy_hitters: alpha must be in (0,1)");
  }
  double norm = exact_lp(freqs, p);
  HeavyHitterClassification out;
  for (const auto& [item, f] : freqs) {
    double v = static_cast<double>(f);
    if (v >= alpha * norm) out.must_report.insert(item);
    if (v <= 0.5 * alpha * norm) out.must_not_report.insert(item);
  }
  return out;
}

/// Streams differing in exactly one update's item id.
inline std::vector<std::pair<Stream, Stream>> neighbor_pairs(
    const Stream& stream, std::size_t count, Splitmix64& rng,
    std::uint64_t universe) {
  if (stream.empty()) throw std::invalid_argument("neighbor_pairs: empty stream");
  if (universe < 2) throw std::invalid_argument("neighbor_pairs: universe < 2");
  std::vector<std::pair<Stream, Stream>> pairs;
  pairs.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::size_t pos = static_cast<std::size_t>(rng.next_below(stream.size()));
    std::uint64_t old_item = stream[pos];
    std::uint64_t new_item = 1 + rng.next_below(universe - 1);
    if (new_item >= old_item) ++new_item;  // uniform over [1,n] \ {old}
    Stream other = stream;
    other[pos] = new_item;
    pairs.emplace_back(stream, std::move(other));
  }
  return pairs;
}

}  // namespace dphh::oracle
