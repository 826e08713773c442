#pragma once

// Seeded pseudorandomness: splitmix64 counter generator, seed derivation,
// and k-wise independent hash families over the Mersenne field 2^61 - 1.

#include <cstdint>
#include <vector>

namespace dphh {

inline constexpr std::uint64_t kMersenne61 = (std::uint64_t{1} << 61) - 1;

/// splitmix64 finalizer; the building block for all seed derivation.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives an independent stream seed from a master seed and up to three tags.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t s = mix64(master ^ 0xd1b54a32d192ed03ULL);
  s = mix64(s ^ (a * 0x8cb92ba72f3d8dd7ULL));
  s = mix64(s ^ (b * 0xaef17502108ef2d9ULL));
  s = mix64(s ^ (c * 0x9fb21c651e98df25ULL));
  return s;
}

/// Counter-mode splitmix64 generator. Cheap to copy, trivially seedable.
class Splitmix64 {
 public:
  explicit Splitmix64(std::uint64_t seed = 0) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in (0, 1).
  double next_unit() {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform integer in [0, bound), bound > 0.
  std::uint64_t next_below(std::uint64_t bound) {
    // Multiply-shift range reduction; bias is negligible for bound << 2^64.
    unsigned __int128 m = static_cast<unsigned __int128>(next()) * bound;
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Uniform element of the Mersenne field [0, 2^61 - 1).
  std::uint64_t next_field() {
    for (;;) {
      std::uint64_t v = next() & kMersenne61;
      if (v != kMersenne61) return v;
    }
  }

 private:
  std::uint64_t state_;
};

inline std::uint64_t mulmod61(std::uint64_t a, std::uint64_t b) {
  unsigned __int128 z = static_cast<unsigned __int128>(a) * b;
  std::uint64_t lo = static_cast<std::uint64_t>(z) & kMersenne61;
  std::uint64_t hi = static_cast<std::uint64_t>(z >> 61);
  std::uint64_t s = lo + hi;
  if (s >= kMersenne61) s -= kMersenne61;
  return s;
}

inline std::uint64_t addmod61(std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = a + b;
  if (s >= kMersenne61) s -= kMersenne61;
  return s;
}

/// Degree-3 polynomial over GF(2^61 - 1): 4-wise independent values.
struct FourWisePoly {
  std::uint64_t c0 = 0, c1 = 0, c2 = 0, c3 = 0;

  static FourWisePoly seeded(std::uint64_t seed) {
    Splitmix64 g(seed);
    return {g.next_field(), g.next_field(), g.next_field(), g.next_field()};
  }

  std::uint64_t eval(std::uint64_t x) const {
    x %= kMersenne61;
    std::uint64_t h = mulmod61(c3, x);
    h = mulmod61(addmod61(h, c2), x);
    h = mulmod61(addmod61(h, c1), x);
    return addmod61(h, c0);
  }

  /// 4-wise independent sign in {-1, +1}.
  int sign(std::uint64_t x) const { return (eval(x) & 1) ? 1 : -1; }
};

/// Degree-1 polynomial over GF(2^61 - 1): pairwise independent values.
struct PairwisePoly {
  std::uint64_t c0 = 0, c1 = 0;

  static PairwisePoly seeded(std::uint64_t seed) {
    Splitmix64 g(seed);
    return {g.next_field(), g.next_field()};
  }

  std::uint64_t eval(std::uint64_t x) const {
    x %= kMersenne61;
    return addmod61(mulmod61(c1, x), c0);
  }

  /// Bucket index in [0, buckets).
  std::uint64_t bucket(std::uint64_t x, std::uint64_t buckets) const {
    return eval(x) % buckets;
  }
};

}  // namespace dphh
