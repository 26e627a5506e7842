// Counter-based pseudo-random stream.
//
// Every draw is a pure function of (seed, stream_id, counter), so replicas can
// be generated in any order, on any thread, and still be bit-identical.  The
// mixer is the splitmix64 finalizer (Steele/Vigna), applied to
// key + counter*golden-gamma, i.e. the SplittableRandom construction.
#pragma once

#include <cmath>
#include <cstdint>

namespace pcf {

namespace detail {

inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace detail

class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream_id)
      : key_(detail::mix64(detail::mix64(seed) ^ detail::mix64(~stream_id))) {}

  // i-th raw 64-bit word of the stream (order-independent access).
  std::uint64_t word(std::uint64_t counter) const {
    return detail::mix64(key_ + counter * 0x9e3779b97f4a7c15ull);
  }

  // Uniform on the open interval (0,1): (w>>11 + 0.5) / 2^53.
  double uniform(std::uint64_t counter) const {
    return (static_cast<double>(word(counter) >> 11) + 0.5) * 0x1.0p-53;
  }

  // Inverse-CDF exponential with the given rate; strictly positive.
  double exponential(std::uint64_t counter, double rate) const {
    return -std::log(uniform(counter)) / rate;
  }

  // Sequential-draw convenience for consumers that do not need random access.
  std::uint64_t next_word() { return word(cursor_++); }
  double next_uniform() { return uniform(cursor_++); }
  double next_exponential(double rate) { return exponential(cursor_++, rate); }

  // Marsaglia polar method; caches the second deviate.
  double next_normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * next_uniform() - 1.0;
      v = 2.0 * next_uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    have_spare_ = true;
    return u * m;
  }

  std::uint64_t cursor() const { return cursor_; }

 private:
  std::uint64_t key_;
  std::uint64_t cursor_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace pcf
