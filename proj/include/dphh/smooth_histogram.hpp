#pragma once

// Smooth-histogram framework: timestamped suffix-estimator instances with
// the redundancy deletion rule. An interior timestamp is dropped once the
// estimate of the suffix after it reaches (1 - gap/2) of the estimate of
// the suffix before it, so surviving estimates ladder down geometrically
// and two timestamps always sandwich any window start.
//
// Instances are managed through an estimator bank so that sketches whose
// state is a running prefix (AMS, CountSketch) can share one accumulator
// and represent each instance as a snapshot.

#include <concepts>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dphh/ams.hpp"

namespace dphh {

template <typename B>
concept EstimatorBank = requires(B b, const B cb, std::uint64_t item,
                                 const typename B::Snapshot& s) {
  typename B::Snapshot;
  b.absorb(item);
  { b.snapshot() } -> std::convertible_to<typename B::Snapshot>;
  { cb.estimate(s) } -> std::convertible_to<double>;
};

template <EstimatorBank Bank>
class SmoothHistogram {
 public:
  struct Options {
    double gap = 0.5;               // beta in the deletion rule
    std::uint32_t spawn_every = 1;  // start a new instance every g updates
    std::uint32_t prune_every = 1;  // run the deletion pass every K updates
  };

  struct Selection {
    std::size_t index;        // 0-based position among live timestamps
    std::uint64_t start;      // t_a
    std::uint64_t next_start; // t_{a+1}, or current_time + 1 when a is last
    double estimate;          // fresh estimate of instance a
  };

  SmoothHistogram(Bank bank, Options opt)
      : bank_(std::move(bank)), opt_(opt) {
    if (!(opt_.gap > 0.0 && opt_.gap < 1.0)) {
      throw std::invalid_argument("SmoothHistogram: gap must be in (0,1)");
    }
    if (opt_.spawn_every == 0 || opt_.prune_every == 0) {
      throw std::invalid_argument("SmoothHistogram: cadences must be >= 1");
    }
  }

  void set_on_spawn(std::function<void(std::uint64_t)> fn) { on_spawn_ = std::move(fn); }
  void set_on_evict(std::function<void(std::uint64_t)> fn) { on_evict_ = std::move(fn); }

  void update(std::uint64_t item) {
    std::uint64_t t = now_ + 1;
    // An instance starting at t covers the suffix from t inclusive, so its
    // snapshot captures the bank state before this update.
    bool spawn = (t - 1) % opt_.spawn_every == 0;
    if (spawn) entries_.push_back(Entry{t, bank_.snapshot()});
    bank_.absorb(item);
    now_ = t;
    if (spawn && on_spawn_) on_spawn_(t);
    if (now_ % opt_.prune_every == 0) prune_pass();
  }

  /// Largest timestamp t_a <= current_time - w + 1 plus a fresh estimate of
  /// its suffix. Requires 1 <= w <= current_time.
  Selection query(std::uint64_t w) const {
    if (now_ == 0) throw std::logic_error("SmoothHistogram: no data");
    if (w < 1 || w > now_) {
      throw std::out_of_range("SmoothHistogram: window outside [1, current_time]");
    }
    std::uint64_t cutoff = now_ - w + 1;
    // t_1 = 1 is never pruned, so a valid index always exists.
    std::size_t a = 0;
    for (std::size_t i = entries_.size(); i-- > 0;) {
      if (entries_[i].start <= cutoff) {
        a = i;
        break;
      }
    }
    return Selection{
        a, entries_[a].start,
        a + 1 < entries_.size() ? entries_[a + 1].start : now_ + 1,
        bank_.estimate(entries_[a].snap)};
  }

  std::uint64_t current_time() const { return now_; }
  std::size_t live_instances() const { return entries_.size(); }

  std::vector<std::uint64_t> starts() const {
    std::vector<std::uint64_t> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(e.start);
    return out;
  }

  double estimate_at(std::size_t index) const {
    return bank_.estimate(entries_.at(index).snap);
  }

  const typename Bank::Snapshot& snapshot_at(std::size_t index) const {
    return entries_.at(index).snap;
  }

  Bank& bank() { return bank_; }
  const Bank& bank() const { return bank_; }
  const Options& options() const { return opt_; }

 private:
  struct Entry {
    std::uint64_t start;
    typename Bank::Snapshot snap;
  };

  void prune_pass() {
    if (entries_.size() < 3) return;
    std::vector<double> est(entries_.size());
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      est[i] = bank_.estimate(entries_[i].snap);
    }
    double keep = 1.0 - opt_.gap / 2.0;
    for (std::size_t i = 1; i + 1 < entries_.size();) {
      if (est[i + 1] >= keep * est[i - 1]) {
        evict(i);
        est.erase(est.begin() + static_cast<std::ptrdiff_t>(i));
        if (i > 1) --i;
      } else {
        ++i;
      }
    }
  }

  void evict(std::size_t i) {
    if (on_evict_) on_evict_(entries_[i].start);
    if constexpr (requires(Bank b, const typename Bank::Snapshot& s) { b.discard(s); }) {
      bank_.discard(entries_[i].snap);
    }
    entries_.erase(entries_.begin() + static_cast<std::ptrdiff_t>(i));
  }

  Bank bank_;
  Options opt_;
  std::uint64_t now_ = 0;
  std::vector<Entry> entries_;
  std::function<void(std::uint64_t)> on_spawn_;
  std::function<void(std::uint64_t)> on_evict_;
};

/// Bank over one shared AMS sketch; an instance is a snapshot of the
/// accumulators and estimates the L2 norm of the suffix after it.
class AmsL2Bank {
 public:
  using Snapshot = AmsSketch::Snapshot;

  explicit AmsL2Bank(AmsSketch sketch) : sketch_(std::move(sketch)) {}

  void absorb(std::uint64_t item) { sketch_.update(item); }
  Snapshot snapshot() const { return sketch_.snapshot(); }
  double estimate(const Snapshot& s) const { return sketch_.estimate_l2_since(s); }

  AmsSketch& sketch() { return sketch_; }
  const AmsSketch& sketch() const { return sketch_; }

 private:
  AmsSketch sketch_;
};

/// Deterministic bank whose estimate is the exact suffix length, i.e. the
/// L1 norm of the suffix frequency vector. The snapshot is the number of
/// updates absorbed before the instance started.
class AgeBank {
 public:
  using Snapshot = std::uint64_t;

  void absorb(std::uint64_t) { ++now_; }
  Snapshot snapshot() const { return now_; }
  double estimate(const Snapshot& s) const {
    return static_cast<double>(now_ - s);
  }
  std::uint64_t now() const { return now_; }

 private:
  std::uint64_t now_ = 0;
};

/// Literal one-instance-per-timestamp bank driven by a seeded factory;
/// matches the framework contract without state sharing.
template <typename Alg>
class IndependentBank {
 public:
  using Snapshot = std::uint64_t;
  using Factory = std::function<Alg(std::uint64_t)>;
  using EstimateFn = std::function<double(const Alg&)>;

  IndependentBank(Factory factory, EstimateFn estimate)
      : factory_(std::move(factory)), estimate_(std::move(estimate)) {}

  void absorb(std::uint64_t item) {
    for (auto& [id, alg] : live_) alg.update(item);
  }

  Snapshot snapshot() {
    std::uint64_t id = next_id_++;
    live_.emplace(id, factory_(id));
    return id;
  }

  double estimate(const Snapshot& s) const { return estimate_(live_.at(s)); }
  void discard(const Snapshot& s) { live_.erase(s); }

  Alg& instance(Snapshot s) { return live_.at(s); }
  std::size_t size() const { return live_.size(); }

 private:
  Factory factory_;
  EstimateFn estimate_;
  std::uint64_t next_id_ = 0;
  std::unordered_map<std::uint64_t, Alg> live_;
};

}  // namespace dphh
