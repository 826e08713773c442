#include <catch2/catch.hpp>

#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "dphh/continual.hpp"
#include "dphh/oracle.hpp"

using namespace dphh;

namespace {

PrivacyConfig cr_cfg(double alpha, double eps, std::uint64_t w, std::uint64_t n,
                     std::uint64_t seed, bool noise) {
  PrivacyConfig cfg;
  cfg.alpha = alpha;
  cfg.epsilon = eps;
  cfg.delta = 1e-6;
  cfg.window = w;
  cfg.universe = n;
  cfg.stream_bound = std::max<std::uint64_t>(4 * w, 16);
  cfg.noise = noise;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("level formula matches the pinned example") {
  REQUIRE(ContinualRelease::level_count_formula(0.5, 1.0, 1024) == 18);
}

TEST_CASE("base block length formula") {
  // alpha sqrt(W) / (200 log2 W), rounded, floored at 1
  REQUIRE(ContinualRelease::base_block_length(0.5, 1024) == 1);
  // 0.9 * 32768 / (200 * 30) = 4.9152 -> 5
  REQUIRE(ContinualRelease::base_block_length(0.9, std::uint64_t{1} << 30) == 5);
}

TEST_CASE("degenerate window clamps every block length to one level of 1") {
  ContinualRelease cr(cr_cfg(0.5, 1.0, 1, 4, 0, false));
  REQUIRE(cr.levels() >= 1);
  for (std::uint32_t l = 1; l <= cr.levels(); ++l) {
    REQUIRE(cr.block_length(l) == 1);
  }
}

TEST_CASE("block lengths double per level and never exceed the window") {
  ContinualRelease cr(cr_cfg(0.5, 1.0, 4096, 16, 1, false));
  for (std::uint32_t l = 1; l <= cr.levels(); ++l) {
    REQUIRE(cr.block_length(l) ==
            ContinualRelease::base_block_length(0.5, 4096) * (1ull << (l - 1)));
    REQUIRE(cr.block_length(l) <= 4096);
  }
  REQUIRE(cr.levels() <=
          ContinualRelease::level_count_formula(0.5, 1.0, 4096));
}

TEST_CASE("update validates the universe") {
  ContinualRelease cr(cr_cfg(0.5, 1.0, 16, 4, 0, false));
  REQUIRE_THROWS(cr.step(0));
  REQUIRE_THROWS(cr.step(5));
}

TEST_CASE("cover uses at most two disjoint blocks per level") {
  ContinualRelease cr(cr_cfg(0.5, 1.0, 64, 8, 2, false));
  Splitmix64 g(5);
  for (int t = 1; t <= 300; ++t) {
    cr.step(1 + g.next_below(8));
    auto cover = cr.current_cover();
    REQUIRE_FALSE(cover.empty());
    std::map<std::uint32_t, int> per_level;
    std::uint64_t expect = cover.front().start;
    std::uint64_t covered_end = 0;
    for (const auto& cb : cover) {
      per_level[cb.level] += 1;
      REQUIRE(cb.start == expect);  // disjoint and contiguous
      expect = cb.end + 1;
      covered_end = cb.end;
      REQUIRE((cb.start - 1) % cr.block_length(cb.level) == 0);
    }
    REQUIRE(covered_end >= std::uint64_t(t));
    for (auto& [lvl, cnt] : per_level) REQUIRE(cnt <= 2);
    // uncovered prefix shorter than a level-1 block
    std::uint64_t w0 = t >= 64 ? std::uint64_t(t) - 64 + 1 : 1;
    REQUIRE(cover.front().start >= w0);
    REQUIRE(cover.front().start - w0 < cr.block_length(1));
  }
}

TEST_CASE("pre-noise stitched estimate is close to the exact window count") {
  const std::uint64_t w = 256;
  auto cfg = cr_cfg(0.5, 1.0, w, 6, 3, false);
  ContinualRelease cr(cfg);
  Splitmix64 g(9);
  oracle::Stream s;
  double slack = cfg.alpha * std::sqrt(double(w)) / 16.0 +
                 double(ContinualRelease::base_block_length(cfg.alpha, w));
  for (int t = 1; t <= 1000; ++t) {
    auto x = 1 + g.next_below(6);
    s.push_back(x);
    cr.step(x);
    if (t % 37 != 0) continue;
    auto freqs = oracle::exact_window_freqs(s, t, w);
    for (std::uint64_t k = 1; k <= 6; ++k) {
      auto it = freqs.find(k);
      double truth = it == freqs.end() ? 0.0 : double(it->second);
      REQUIRE(std::fabs(cr.pre_noise_estimate(k) - truth) <= slack + 1e-9);
    }
  }
}

TEST_CASE("sealed blocks draw noise exactly once") {
  ContinualRelease cr(cr_cfg(0.5, 1.0, 64, 4, 7, true));
  for (int t = 1; t <= 200; ++t) cr.step(1 + (t % 4));
  auto cover = cr.current_cover();
  bool found_sealed = false;
  for (const auto& cb : cover) {
    if (!cb.complete) continue;
    found_sealed = true;
    double a = cr.sealed_noisy_value(cb.level, cb.start, 2);
    double b = cr.sealed_noisy_value(cb.level, cb.start, 2);
    REQUIRE(a == b);
  }
  REQUIRE(found_sealed);
}

TEST_CASE("noise-off reports match the oracle threshold classification") {
  // Randomized small-instance sweep with W = 16 over universe 4, checked at
  // every step of every stream.
  const std::uint64_t w = 16;
  const double alpha = 0.5;
  double cut = alpha * std::sqrt(double(w)) / 2.0;        // 1
  double slack = alpha * std::sqrt(double(w)) / 8.0 + 1;  // deterministic slack
  Splitmix64 g(21);
  for (int trial = 0; trial < 120; ++trial) {
    auto cfg = cr_cfg(alpha, 1.0, w, 4, derive_seed(70, trial), false);
    ContinualRelease cr(cfg);
    oracle::Stream s;
    for (int t = 1; t <= 64; ++t) {
      auto x = 1 + g.next_below(4);
      s.push_back(x);
      auto rep = cr.step(x);
      auto freqs = oracle::exact_window_freqs(s, t, w);
      for (std::uint64_t k = 1; k <= 4; ++k) {
        auto it = freqs.find(k);
        double truth = it == freqs.end() ? 0.0 : double(it->second);
        if (truth >= cut + slack) REQUIRE(rep.contains(k));
        if (rep.contains(k)) {
          REQUIRE(truth >= cut - slack);
          REQUIRE(std::fabs(*rep.frequency_of(k) - truth) <= slack);
        }
      }
    }
  }
}

TEST_CASE("constant stream reports the item with bounded error once warm") {
  const std::uint64_t w = 1024;
  auto cfg = cr_cfg(0.5, 1.0, w, 8, 11, true);
  ContinualRelease cr(cfg);
  double bound = cfg.alpha * std::sqrt(double(w)) / 2.0;
  int steps = 0, ok = 0;
  for (std::uint64_t t = 1; t <= 2 * w; ++t) {
    auto rep = cr.step(5);
    if (t < w) continue;
    ++steps;
    if (rep.contains(5) && std::fabs(*rep.frequency_of(5) - double(w)) <= bound) ++ok;
  }
  REQUIRE(ok >= steps * 95 / 100);
}

TEST_CASE("all-distinct stream stays quiet") {
  const std::uint64_t w = 1024;
  auto cfg = cr_cfg(0.5, 1.0, w, 4096, 13, true);
  ContinualRelease cr(cfg);
  int nonempty = 0;
  for (std::uint64_t t = 1; t <= 2048; ++t) {
    if (!cr.step(1 + ((t - 1) % 4096)).entries.empty()) ++nonempty;
  }
  REQUIRE(nonempty <= 2048 / 20);
}

TEST_CASE("same seed reproduces the full report stream") {
  auto cfg = cr_cfg(0.4, 0.8, 128, 8, 17, true);
  ContinualRelease a(cfg), b(cfg);
  Splitmix64 g(3);
  for (int t = 1; t <= 400; ++t) {
    auto x = 1 + g.next_below(8);
    auto ra = a.step(x);
    auto rb = b.step(x);
    REQUIRE(ra.entries == rb.entries);
  }
}

TEST_CASE("warm-up keeps reports well-defined before a full window") {
  ContinualRelease cr(cr_cfg(0.5, 1.0, 256, 4, 19, false));
  for (int t = 1; t <= 10; ++t) {
    auto rep = cr.step(2);
    REQUIRE(rep.window == std::uint64_t(t));
  }
}
