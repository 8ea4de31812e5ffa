#pragma once

#include <cmath>
#include <cstdint>

namespace lpl {

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// xoshiro256++ with Box-Muller normals. One instance per Monte Carlo task,
/// derived from (master seed, task index) so batches are order-independent.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& w : s_) w = splitmix64_next(sm);
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform on (0,1), never returning 0 or 1.
  double uniform() {
    const double u = static_cast<double>(next() >> 11) * 0x1.0p-53;
    return u > 0.0 ? u : 0x1.0p-53;
  }

  double exponential(double rate) { return -std::log(uniform()) / rate; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // Marsaglia polar method: two normals per accepted uniform pair.
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double r = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * r;
    has_spare_ = true;
    return u * r;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Named stream for task `index` of a batch with the given master seed.
inline Rng substream(std::uint64_t master, std::uint64_t index) {
  std::uint64_t sm = master ^ (0xa0761d6478bd642full * (index + 1));
  const std::uint64_t a = splitmix64_next(sm);
  const std::uint64_t b = splitmix64_next(sm);
  return Rng(a ^ (b << 1));
}

/// Plain 64-bit seed for task `index` (for nesting substreams).
inline std::uint64_t subseed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t sm = master ^ (0xe7037ed1a0b428dbull * (index + 1));
  splitmix64_next(sm);
  return splitmix64_next(sm);
}

}  // namespace lpl
