#pragma once

// Counter-based draws: every geometric variable is a pure function of
// (seed, replica, level, index, half-step counter), so a trajectory does not
// depend on how replicas are scheduled across threads.

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace wallsim {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct DrawKey {
  std::uint64_t seed = 0;
  std::uint64_t replica = 0;
  std::uint32_t level = 0;
  std::uint32_t index = 0;
  std::uint64_t half_step = 0; // 2n+1 for time n+1/2, 2n+2 for time n+1
};

constexpr std::uint64_t hash_key(const DrawKey &key) {
  std::uint64_t h = splitmix64(key.seed);
  h = splitmix64(h ^ key.replica);
  h = splitmix64(h ^ ((static_cast<std::uint64_t>(key.level) << 32) | key.index));
  h = splitmix64(h ^ key.half_step);
  return h;
}

/// Uniform in (0, 1] with 53 random bits.
constexpr double uniform_open_closed(std::uint64_t bits) {
  return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

/// Inverse transform floor(log U / log q); P(x) = (1-q) q^x.
inline int geometric_from_uniform(double u, double log_q) {
  return static_cast<int>(std::floor(std::log(u) / log_q));
}

inline void check_q(double q) {
  if (!(q > 0.0 && q < 1.0))
    throw std::invalid_argument("q must lie in (0,1)");
}

/// Sequential uniform stream for a fixed (seed, stream id).
class UniformStream {
public:
  explicit UniformStream(std::uint64_t seed, std::uint64_t stream = 0) : seed_(seed), stream_(stream) {}

  double next() {
    const DrawKey key{seed_, stream_, 0, 0, counter_++};
    return uniform_open_closed(hash_key(key));
  }

private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
};

inline int sample_geometric(double q, UniformStream &stream) {
  check_q(q);
  return geometric_from_uniform(stream.next(), std::log(q));
}

} // namespace wallsim
