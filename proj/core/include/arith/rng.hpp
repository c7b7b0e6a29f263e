#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <random>
#include <sstream>
#include <string>
#include <string_view>

namespace arith {

// Generator family: "arithlab-pcg-mt19937_64-v1".
//
// Backing engine is std::mt19937_64, whose output sequence is fully
// specified by the standard, so identical seeds yield identical streams
// on every platform. Bounded draws go through uniform_below() rather
// than std::uniform_int_distribution (whose mapping is
// implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Unbiased draw in [0, bound) via rejection on the top of the range.
  std::uint64_t uniform_below(std::uint64_t bound) {
    if (bound <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % bound;
  }

  // [lo, hi] inclusive.
  std::uint64_t uniform_in(std::uint64_t lo, std::uint64_t hi) {
    return lo + uniform_below(hi - lo + 1);
  }

  double uniform_unit() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double normal(double mean, double stddev) {
    // Box-Muller on our own uniforms; std::normal_distribution is
    // implementation-defined.
    if (have_spare_) {
      have_spare_ = false;
      return mean + stddev * spare_;
    }
    double u1, u2;
    do {
      u1 = uniform_unit();
    } while (u1 <= 0.0);
    u2 = uniform_unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return mean + stddev * r * std::cos(theta);
  }

  std::string serialize() const {
    std::ostringstream os;
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(spare_));
    std::memcpy(&bits, &spare_, sizeof(bits));
    os << engine_ << ' ' << (have_spare_ ? 1 : 0) << ' ' << bits;
    return os.str();
  }

  [[nodiscard]] static Rng deserialize(const std::string& s) {
    Rng r(0);
    std::istringstream is(s);
    int hs = 0;
    std::uint64_t bits = 0;
    is >> r.engine_ >> hs >> bits;
    r.have_spare_ = hs != 0;
    std::memcpy(&r.spare_, &bits, sizeof(bits));
    return r;
  }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// SplitMix64 finalizer, used for stream splitting and hashing.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
  return mix64(a ^ mix64(b));
}

// Derive an independent stream seed from (seed, purpose-tag, index).
inline std::uint64_t stream_seed(std::uint64_t seed, std::string_view purpose,
                                 std::uint64_t index = 0) {
  std::uint64_t h = mix64(seed);
  for (char c : purpose) h = hash_combine(h, static_cast<std::uint64_t>(c));
  return hash_combine(h, index);
}

inline Rng split_stream(std::uint64_t seed, std::string_view purpose,
                        std::uint64_t index = 0) {
  return Rng(stream_seed(seed, purpose, index));
}

}  // namespace arith
