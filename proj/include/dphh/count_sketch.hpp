#pragma once

// CountSketch table for L2-heavy-hitter detection: per row a pairwise
// independent bucket hash and a 4-wise independent sign. The default
// estimator is the per-row median of signed counters; the literal
// mean-of-absolute-values rule is available behind a flag (it is biased
// upward by the mass of colliding items).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dphh/ams.hpp"
#include "dphh/prng.hpp"

namespace dphh {

enum class CsEstimator { kMedianSigned, kMeanAbsolute };

class CountSketchTable {
 public:
  CountSketchTable(std::uint32_t rows, std::uint32_t buckets,
                   std::uint64_t universe, double threshold, std::uint64_t seed,
                   CsEstimator estimator = CsEstimator::kMedianSigned)
      : rows_(rows),
        buckets_(buckets),
        universe_(universe),
        threshold_(threshold),
        estimator_(estimator) {
    if (rows_ == 0 || buckets_ == 0) {
      throw std::invalid_argument("CountSketchTable: rows and buckets must be positive");
    }
    if (universe_ == 0) throw std::invalid_argument("CountSketchTable: universe must be >= 1");
    if (!(threshold_ > 0.0 && threshold_ < 1.0)) {
      throw std::invalid_argument("CountSketchTable: threshold must be in (0,1)");
    }
    counters_.assign(static_cast<std::size_t>(rows_) * buckets_, 0);
    bucket_hash_.reserve(rows_);
    sign_hash_.reserve(rows_);
    for (std::uint32_t j = 0; j < rows_; ++j) {
      bucket_hash_.push_back(PairwisePoly::seeded(derive_seed(seed, 0xb0c4, j)));
      sign_hash_.push_back(FourWisePoly::seeded(derive_seed(seed, 0x51f7, j)));
    }
  }

  /// Spec sizing: rows = ceil(8 log2(n/delta)), buckets = ceil(6 / alpha^2).
  static CountSketchTable with_params(double alpha, double delta,
                                      std::uint64_t universe, std::uint64_t seed,
                                      CsEstimator est = CsEstimator::kMedianSigned) {
    if (!(alpha > 0.0 && alpha < 1.0) || !(delta > 0.0 && delta < 1.0)) {
      throw std::invalid_argument("CountSketchTable: alpha and delta must be in (0,1)");
    }
    if (universe == 0) throw std::invalid_argument("CountSketchTable: universe must be >= 1");
    double rows_raw = 8.0 * std::log2(static_cast<double>(universe) / delta);
    auto rows = static_cast<std::uint32_t>(std::ceil(std::max(1.0, rows_raw)));
    auto buckets = static_cast<std::uint32_t>(std::ceil(6.0 / (alpha * alpha)));
    return CountSketchTable(rows, buckets, universe, alpha, seed, est);
  }

  void update(std::uint64_t item) { update_many(item, 1); }

  void update_many(std::uint64_t item, std::uint64_t count) {
    if (item < 1 || item > universe_) {
      throw std::out_of_range("CountSketchTable: item outside universe");
    }
    std::int64_t c = static_cast<std::int64_t>(count);
    for (std::uint32_t j = 0; j < rows_; ++j) {
      counters_[cell(j, item)] += sign_hash_[j].sign(item) * c;
    }
    updates_ += count;
  }

  double estimate(std::uint64_t item) const { return estimate_diff(item, nullptr); }

  using Snapshot = std::vector<std::int64_t>;
  Snapshot snapshot() const { return counters_; }

  /// Estimate of the updates applied since `base` was snapshotted.
  double estimate_since(const Snapshot& base, std::uint64_t item) const {
    if (base.size() != counters_.size()) {
      throw std::invalid_argument("CountSketchTable: snapshot shape mismatch");
    }
    return estimate_diff(item, base.data());
  }

  /// Items with estimate >= (3/4) * threshold * l2_reference, sorted by
  /// estimate descending, ties by item id ascending.
  std::vector<std::pair<std::uint64_t, double>> heavy_hitters(
      double l2_reference) const {
    if (l2_reference < 0.0) {
      throw std::invalid_argument("CountSketchTable: l2_reference must be >= 0");
    }
    double cut = 0.75 * threshold_ * l2_reference;
    std::vector<std::pair<std::uint64_t, double>> out;
    for (std::uint64_t k = 1; k <= universe_; ++k) {
      double est = estimate(k);
      if (est >= cut && est > 0.0) out.emplace_back(k, est);
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    return out;
  }

  /// Precomputed per-row cells and signs for one item; lets callers that
  /// read many snapshots of this table hash the item once.
  void hash_item(std::uint64_t item, std::size_t* cells, int* signs) const {
    for (std::uint32_t j = 0; j < rows_; ++j) {
      cells[j] = cell(j, item);
      signs[j] = sign_hash_[j].sign(item);
    }
  }

  double estimate_since_hashed(const Snapshot& base, const std::size_t* cells,
                               const int* signs) const {
    double stack_buf[32];
    std::vector<double> heap_buf;
    double* per_row = rows_ <= 32 ? stack_buf
                                  : (heap_buf.resize(rows_), heap_buf.data());
    for (std::uint32_t j = 0; j < rows_; ++j) {
      std::int64_t v = counters_[cells[j]] - base[cells[j]];
      per_row[j] = estimator_ == CsEstimator::kMedianSigned
                       ? static_cast<double>(signs[j] * v)
                       : std::fabs(static_cast<double>(v));
    }
    if (estimator_ == CsEstimator::kMeanAbsolute) {
      double sum = 0.0;
      for (std::uint32_t j = 0; j < rows_; ++j) sum += per_row[j];
      return sum / rows_;
    }
    return detail::median_inplace(per_row, rows_);
  }

  std::uint32_t rows() const { return rows_; }
  std::uint32_t buckets() const { return buckets_; }
  std::uint64_t universe() const { return universe_; }
  double threshold() const { return threshold_; }
  std::uint64_t update_count() const { return updates_; }
  std::span<const std::int64_t> counters() const { return counters_; }
  std::uint64_t bucket_of(std::uint32_t row, std::uint64_t item) const {
    return bucket_hash_[row].bucket(item, buckets_);
  }

 private:
  std::size_t cell(std::uint32_t row, std::uint64_t item) const {
    return static_cast<std::size_t>(row) * buckets_ +
           static_cast<std::size_t>(bucket_hash_[row].bucket(item, buckets_));
  }

  double estimate_diff(std::uint64_t item, const std::int64_t* base) const {
    if (item < 1 || item > universe_) {
      throw std::out_of_range("CountSketchTable: item outside universe");
    }
    double stack_buf[32];
    std::vector<double> heap_buf;
    double* per_row = rows_ <= 32 ? stack_buf
                                  : (heap_buf.resize(rows_), heap_buf.data());
    for (std::uint32_t j = 0; j < rows_; ++j) {
      std::size_t idx = cell(j, item);
      std::int64_t v = base ? counters_[idx] - base[idx] : counters_[idx];
      if (estimator_ == CsEstimator::kMedianSigned) {
        per_row[j] = static_cast<double>(sign_hash_[j].sign(item) * v);
      } else {
        per_row[j] = std::fabs(static_cast<double>(v));
      }
    }
    if (estimator_ == CsEstimator::kMeanAbsolute) {
      double sum = 0.0;
      for (std::uint32_t j = 0; j < rows_; ++j) sum += per_row[j];
      return sum / rows_;
    }
    return detail::median_inplace(per_row, rows_);
  }

  std::uint32_t rows_;
  std::uint32_t buckets_;
  std::uint64_t universe_;
  double threshold_;
  CsEstimator estimator_;
  std::uint64_t updates_ = 0;
  std::vector<std::int64_t> counters_;  // rows x buckets, row-major
  std::vector<PairwisePoly> bucket_hash_;
  std::vector<FourWisePoly> sign_hash_;
};

}  // namespace dphh
