#include <catch2/catch.hpp>

#include <cstdint>
#include <map>
#include <vector>

#include "dphh/prng.hpp"

using namespace dphh;

TEST_CASE("mulmod61 matches wide arithmetic") {
  Splitmix64 g(7);
  for (int i = 0; i < 1000; ++i) {
    std::uint64_t a = g.next_field();
    std::uint64_t b = g.next_field();
    unsigned __int128 ref = static_cast<unsigned __int128>(a) * b % kMersenne61;
    REQUIRE(mulmod61(a, b) == static_cast<std::uint64_t>(ref));
  }
}

TEST_CASE("seed derivation is deterministic and tag-sensitive") {
  REQUIRE(derive_seed(42, 1, 2, 3) == derive_seed(42, 1, 2, 3));
  REQUIRE(derive_seed(42, 1, 2, 3) != derive_seed(42, 1, 2, 4));
  REQUIRE(derive_seed(42, 1, 2, 3) != derive_seed(43, 1, 2, 3));
}

TEST_CASE("four-wise sign hash is unbiased and reproducible") {
  auto h = FourWisePoly::seeded(derive_seed(9, 1));
  auto h2 = FourWisePoly::seeded(derive_seed(9, 1));
  long sum = 0;
  for (std::uint64_t x = 1; x <= 20000; ++x) {
    int s = h.sign(x);
    REQUIRE((s == 1 || s == -1));
    REQUIRE(s == h2.sign(x));
    sum += s;
  }
  REQUIRE(std::abs(sum) < 600);  // ~4 sigma for 20k fair signs
}

TEST_CASE("pairwise bucket hash covers the range roughly uniformly") {
  auto h = PairwisePoly::seeded(derive_seed(11, 2));
  const std::uint64_t buckets = 16;
  std::map<std::uint64_t, int> counts;
  for (std::uint64_t x = 1; x <= 16000; ++x) counts[h.bucket(x, buckets)] += 1;
  REQUIRE(counts.size() == buckets);
  for (const auto& [b, c] : counts) {
    REQUIRE(b < buckets);
    REQUIRE(c > 600);
    REQUIRE(c < 1400);
  }
}

TEST_CASE("next_below stays in range") {
  Splitmix64 g(3);
  for (int i = 0; i < 10000; ++i) {
    REQUIRE(g.next_below(7) < 7);
  }
}
