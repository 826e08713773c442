#include <catch2/catch.hpp>

#include <cmath>
#include <cstdint>
#include <vector>

#include "dphh/ams.hpp"
#include "dphh/oracle.hpp"
#include "dphh/smooth_histogram.hpp"

using namespace dphh;

namespace {

SmoothHistogram<AmsL2Bank> make_ams_hist(double gap, std::uint64_t universe,
                                         std::uint64_t seed,
                                         std::uint32_t spawn = 1,
                                         std::uint32_t prune = 1) {
  AmsSketch sketch(96, 5, universe, seed);
  return SmoothHistogram<AmsL2Bank>(
      AmsL2Bank(std::move(sketch)),
      {.gap = gap, .spawn_every = spawn, .prune_every = prune});
}

double oracle_window_l2(const oracle::Stream& s, std::uint64_t w) {
  return oracle::exact_lp(oracle::exact_window_freqs(s, s.size(), w), 2);
}

}  // namespace

TEST_CASE("construction validates the gap") {
  REQUIRE_THROWS(make_ams_hist(1.0, 10, 0));
  REQUIRE_THROWS(make_ams_hist(0.0, 10, 0));
}

TEST_CASE("query before any update is an error") {
  auto h = make_ams_hist(0.5, 10, 0);
  REQUIRE_THROWS_AS(h.query(1), std::logic_error);
}

TEST_CASE("first update creates the timestamp t1 = 1") {
  auto h = make_ams_hist(0.5, 10, 0);
  h.update(3);
  REQUIRE(h.live_instances() == 1);
  REQUIRE(h.starts() == std::vector<std::uint64_t>{1});
  auto sel = h.query(1);
  REQUIRE(sel.start == 1);
  REQUIRE(sel.estimate == Approx(1.0));
}

TEST_CASE("never more instances than updates") {
  auto h = make_ams_hist(0.5, 10, 1);
  for (int i = 0; i < 3; ++i) {
    h.update(1 + i);
    REQUIRE(h.live_instances() <= std::uint64_t(i) + 1);
  }
}

TEST_CASE("query window validation") {
  auto h = make_ams_hist(0.5, 10, 0);
  for (int i = 0; i < 10; ++i) h.update(1);
  REQUIRE_THROWS(h.query(0));
  REQUIRE_THROWS(h.query(11));
  REQUIRE_NOTHROW(h.query(10));
}

TEST_CASE("full-window query selects the first instance") {
  auto h = make_ams_hist(0.4, 10, 5);
  for (int i = 0; i < 200; ++i) h.update(1 + (i % 7));
  auto sel = h.query(200);
  REQUIRE(sel.index == 0);
  REQUIRE(sel.start == 1);
}

TEST_CASE("W = 1 selects the newest or second-newest instance") {
  auto h = make_ams_hist(0.4, 10, 5);
  for (int i = 0; i < 50; ++i) h.update(1 + (i % 3));
  auto sel = h.query(1);
  REQUIRE(sel.start == h.current_time());  // spawn cadence 1: t_s = t
}

TEST_CASE("survival invariant holds after every update") {
  // After each pruning pass, no interior timestamp may have its outer
  // neighbors within the (1 - gap/2) ladder ratio.
  const double gap = 0.4;
  Splitmix64 g(8);
  auto h = make_ams_hist(gap, 20, 17);
  for (int i = 0; i < 400; ++i) {
    h.update(1 + g.next_below(20));
    auto starts = h.starts();
    for (std::size_t i2 = 1; i2 + 1 < starts.size(); ++i2) {
      double prev = h.estimate_at(i2 - 1);
      double next = h.estimate_at(i2 + 1);
      bool adjacent = starts[i2 + 1] == starts[i2] + 1;
      bool separated = next < (1.0 - gap / 2.0) * prev;
      REQUIRE((adjacent || separated));
    }
  }
}

TEST_CASE("constant stream keeps a geometric ladder of estimates") {
  const double gap = 0.4;
  auto h = make_ams_hist(gap, 4, 3);
  for (int i = 0; i < 600; ++i) h.update(2);
  // Estimates are exact on a single-item stream: suffix lengths.
  auto starts = h.starts();
  for (std::size_t i = 1; i + 1 < starts.size(); ++i) {
    double prev = h.estimate_at(i - 1);
    double next = h.estimate_at(i + 1);
    if (starts[i + 1] != starts[i] + 1) {
      REQUIRE(prev > next / (1.0 - gap / 2.0) - 1e-9);
    }
  }
  // and the instance count stays logarithmic
  REQUIRE(h.live_instances() <= std::size_t(16.0 * (1.0 / gap) * std::log2(600.0)));
}

TEST_CASE("sandwich property at every query") {
  Splitmix64 g(29);
  auto h = make_ams_hist(0.5, 50, 23);
  oracle::Stream s;
  for (int i = 0; i < 1500; ++i) {
    auto x = 1 + g.next_below(50);
    s.push_back(x);
    h.update(x);
  }
  for (std::uint64_t w : {std::uint64_t{1}, std::uint64_t{10}, std::uint64_t{100},
                          std::uint64_t{700}, std::uint64_t{1500}}) {
    auto sel = h.query(w);
    std::uint64_t cutoff = h.current_time() - w + 1;
    REQUIRE(sel.start <= cutoff);
    REQUIRE(sel.next_start > cutoff);
  }
}

TEST_CASE("window estimates track the oracle L2") {
  Splitmix64 g(41);
  int ok = 0, total = 0;
  for (int trial = 0; trial < 8; ++trial) {
    auto h = make_ams_hist(0.5, 40, derive_seed(7, trial));
    oracle::Stream s;
    for (int i = 0; i < 2000; ++i) {
      std::uint64_t r = 1 + g.next_below(1600);
      auto x = 1 + std::uint64_t(std::sqrt(double(r))) % 40;
      s.push_back(x);
      h.update(x);
    }
    for (std::uint64_t w : {std::uint64_t{50}, std::uint64_t{400}, std::uint64_t{2000}}) {
      double est = h.query(w).estimate;
      double truth = oracle_window_l2(s, w);
      if (est >= (1 - 0.5) * truth && est <= (1 + 2 * 0.5) * truth) ++ok;
      ++total;
    }
  }
  REQUIRE(ok >= total * 90 / 100);
}

TEST_CASE("state is a pure function of stream and seed") {
  Splitmix64 g(4);
  oracle::Stream s;
  for (int i = 0; i < 300; ++i) s.push_back(1 + g.next_below(12));
  auto a = make_ams_hist(0.4, 12, 99);
  auto b = make_ams_hist(0.4, 12, 99);
  for (auto x : s) {
    a.update(x);
    b.update(x);
  }
  REQUIRE(a.starts() == b.starts());
  for (std::size_t i = 0; i < a.live_instances(); ++i) {
    REQUIRE(a.estimate_at(i) == b.estimate_at(i));
  }
}

TEST_CASE("batched spawning still sandwiches the window start") {
  Splitmix64 g(50);
  auto h = make_ams_hist(0.5, 20, 31, /*spawn=*/4, /*prune=*/8);
  for (int i = 0; i < 1000; ++i) h.update(1 + g.next_below(20));
  for (std::uint64_t w : {std::uint64_t{3}, std::uint64_t{64}, std::uint64_t{999}}) {
    auto sel = h.query(w);
    std::uint64_t cutoff = h.current_time() - w + 1;
    REQUIRE(sel.start <= cutoff);
    REQUIRE(sel.next_start > cutoff);
  }
}

TEST_CASE("independent-instance bank matches the shared-prefix bank") {
  // Same seeds, same stream: the snapshot-diff estimates must coincide with
  // literal per-timestamp AMS instances.
  const std::uint64_t universe = 15;
  const std::uint64_t seed = 12345;
  AmsSketch shared(64, 3, universe, seed);
  SmoothHistogram<AmsL2Bank> a(AmsL2Bank(std::move(shared)), {.gap = 0.4});

  using Bank = IndependentBank<AmsSketch>;
  Bank bank(
      [&](std::uint64_t) { return AmsSketch(64, 3, universe, seed); },
      [](const AmsSketch& s) { return s.estimate_l2(); });
  SmoothHistogram<Bank> b(std::move(bank), {.gap = 0.4});

  Splitmix64 g(9);
  for (int i = 0; i < 250; ++i) {
    auto x = 1 + g.next_below(universe);
    a.update(x);
    b.update(x);
  }
  REQUIRE(a.starts() == b.starts());
  for (std::size_t i = 0; i < a.live_instances(); ++i) {
    REQUIRE(a.estimate_at(i) == Approx(b.estimate_at(i)));
  }
}

TEST_CASE("age bank reproduces the deterministic 1.01 timestamp rule") {
  // Deletion with gap 2/101 keeps exactly the timestamps whose ages satisfy
  // age(i-1) > 1.01 * age(i+1) for interior i.
  SmoothHistogram<AgeBank> h(AgeBank{}, {.gap = 2.0 / 101.0});
  for (int i = 0; i < 3000; ++i) h.update(1);
  auto starts = h.starts();
  std::uint64_t t = h.current_time();
  for (std::size_t i = 1; i + 1 < starts.size(); ++i) {
    double older = double(t - starts[i - 1] + 1);
    double newer = double(t - starts[i + 1] + 1);
    REQUIRE(older > 1.01 * newer - 1e-9);
  }
  REQUIRE(h.live_instances() < 3000);
}
