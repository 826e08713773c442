#pragma once

// AMS sketch for second frequency moment (F2) and L2 norm estimation on
// insertion-only streams. Per repetition, `rows` 4-wise independent sign
// accumulators are averaged; the estimate is the median across repetitions.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "dphh/prng.hpp"

namespace dphh {

namespace detail {

inline double median_inplace(double* v, std::size_t n) {
  if (n == 0) return 0.0;
  std::size_t mid = n / 2;
  std::nth_element(v, v + mid, v + n);
  double hi = v[mid];
  if (n % 2 == 1) return hi;
  double lo = *std::max_element(v, v + mid);
  return 0.5 * (lo + hi);
}

inline double median_of(std::vector<double>& v) {
  return median_inplace(v.data(), v.size());
}

}  // namespace detail

class AmsSketch {
 public:
  /// Direct sizing. `rows` sign accumulators per repetition, `reps`
  /// median-boost repetitions.
  AmsSketch(std::uint32_t rows, std::uint32_t reps, std::uint64_t universe,
            std::uint64_t seed)
      : rows_(rows), reps_(reps), universe_(universe) {
    if (rows_ == 0 || reps_ == 0) {
      throw std::invalid_argument("AmsSketch: rows and reps must be positive");
    }
    if (universe_ == 0) throw std::invalid_argument("AmsSketch: universe must be >= 1");
    std::size_t total = static_cast<std::size_t>(rows_) * reps_;
    accum_.assign(total, 0);
    signs_.reserve(total);
    for (std::size_t k = 0; k < total; ++k) {
      signs_.push_back(FourWisePoly::seeded(derive_seed(seed, 0x5151, k)));
    }
    init_cache();
  }

  /// Accuracy-driven sizing: rows = ceil(6 / alpha^2), reps = ceil(48 ln(1/delta)).
  /// The constants make Chebyshev plus the median Chernoff boost deliver a
  /// (1 +- alpha) F2 estimate with probability >= 1 - delta.
  static AmsSketch with_accuracy(double alpha, double delta,
                                 std::uint64_t universe, std::uint64_t seed) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
      throw std::invalid_argument("AmsSketch: accuracy must be in (0,1)");
    }
    if (!(delta > 0.0 && delta < 1.0)) {
      throw std::invalid_argument("AmsSketch: failure probability must be in (0,1)");
    }
    auto rows = static_cast<std::uint32_t>(std::ceil(6.0 / (alpha * alpha)));
    auto reps = static_cast<std::uint32_t>(std::ceil(48.0 * std::log(1.0 / delta)));
    return AmsSketch(rows, reps, universe, seed);
  }

  void update(std::uint64_t item) { update_many(item, 1); }

  /// Equivalent to `count` repeated updates; the accumulator arithmetic is
  /// identical because updates are commutative integer additions.
  void update_many(std::uint64_t item, std::uint64_t count) {
    if (item < 1 || item > universe_) {
      throw std::out_of_range("AmsSketch: item outside universe");
    }
    const std::int64_t c = static_cast<std::int64_t>(count);
    const std::size_t total = accum_.size();
    if (!cache_words_) {
      for (std::size_t k = 0; k < total; ++k) {
        accum_[k] += signs_[k].sign(item) * c;
      }
    } else {
      const std::uint64_t* bits = cached_signs(item);
      for (std::size_t k = 0; k < total; ++k) {
        std::int64_t s = ((bits[k >> 6] >> (k & 63)) & 1) ? c : -c;
        accum_[k] += s;
      }
    }
    updates_ += count;
  }

  /// Median over repetitions of the per-repetition mean of squared sums.
  double estimate_f2() const { return estimate_f2_diff(nullptr); }

  /// L2 estimate: square root of the F2 estimate. A sketch whose F2 estimate
  /// is (1 +- a)-accurate yields an L2 estimate at least as accurate, since
  /// sqrt(1 +- a) lies within (1 +- a).
  double estimate_l2() const { return std::sqrt(estimate_f2()); }

  using Snapshot = std::vector<std::int64_t>;

  /// Copy of the accumulator state; used to read suffix estimates later.
  Snapshot snapshot() const { return accum_; }

  /// F2 of the updates applied since `base` was snapshotted from this sketch.
  double estimate_f2_since(const Snapshot& base) const {
    if (base.size() != accum_.size()) {
      throw std::invalid_argument("AmsSketch: snapshot shape mismatch");
    }
    return estimate_f2_diff(base.data());
  }

  double estimate_l2_since(const Snapshot& base) const {
    return std::sqrt(estimate_f2_since(base));
  }

  std::uint32_t rows() const { return rows_; }
  std::uint32_t reps() const { return reps_; }
  std::uint64_t universe() const { return universe_; }
  std::uint64_t update_count() const { return updates_; }
  std::span<const std::int64_t> accumulators() const { return accum_; }

 private:
  double estimate_f2_diff(const std::int64_t* base) const {
    double stack_buf[32];
    std::vector<double> heap_buf;
    double* means = reps_ <= 32 ? stack_buf
                                : (heap_buf.resize(reps_), heap_buf.data());
    std::size_t k = 0;
    for (std::uint32_t j = 0; j < reps_; ++j) {
      double sum = 0.0;
      for (std::uint32_t i = 0; i < rows_; ++i, ++k) {
        double z = static_cast<double>(base ? accum_[k] - base[k] : accum_[k]);
        sum += z * z;
      }
      means[j] = sum / rows_;
    }
    return detail::median_inplace(means, reps_);
  }

  void init_cache() {
    // Lazily memoized sign bits per item; bounded to ~8 MB.
    constexpr std::uint64_t kCacheBitBudget = std::uint64_t{1} << 26;
    std::size_t total = accum_.size();
    std::uint64_t need = static_cast<std::uint64_t>(total) * universe_;
    if (need == 0 || need > kCacheBitBudget) return;
    cache_words_ = (total + 63) / 64;
    cache_.assign(cache_words_ * universe_, 0);
    cache_filled_.assign(universe_, 0);
  }

  const std::uint64_t* cached_signs(std::uint64_t item) const {
    std::uint64_t* slot = cache_.data() + (item - 1) * cache_words_;
    if (!cache_filled_[item - 1]) {
      const std::size_t total = accum_.size();
      for (std::size_t k = 0; k < total; ++k) {
        if (signs_[k].sign(item) > 0) slot[k >> 6] |= std::uint64_t{1} << (k & 63);
      }
      cache_filled_[item - 1] = 1;
    }
    return slot;
  }

  std::uint32_t rows_;
  std::uint32_t reps_;
  std::uint64_t universe_;
  std::uint64_t updates_ = 0;
  std::vector<std::int64_t> accum_;       // reps x rows, row-major
  std::vector<FourWisePoly> signs_;       // one per accumulator
  std::size_t cache_words_ = 0;
  mutable std::vector<std::uint64_t> cache_;
  mutable std::vector<std::uint8_t> cache_filled_;
};

}  // namespace dphh
