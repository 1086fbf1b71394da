#pragma once

// Two half-step update of the particle array: left jumps at time n, right
// jumps at time n+1/2, with pushing from below-right, blocking from
// below-left, and the partially reflecting wall for the last particle of each
// odd level.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "lattice.hpp"
#include "rng.hpp"

namespace wallsim {

enum class DrawTag { half, full };

struct RunConfig {
  double q = 0.5;
  int depth = 4; // K
  std::int64_t steps = 0;
  std::int64_t replicas = 1;
  std::uint64_t seed = 0;
  /// Wall particle on odd levels reflects from its time n+1/2 position and
  /// is capped by the level below at n+1/2. Off: the literal time-n reading.
  bool odd_wall_uses_half_time = true;
  /// Assert interlacing after every half step.
  bool check_interlacing = false;

  void validate() const {
    check_q(q);
    if (depth < 1)
      throw std::invalid_argument("K must be >= 1");
    if (steps < 0)
      throw std::invalid_argument("steps must be >= 0");
    if (replicas < 1)
      throw std::invalid_argument("replicas must be >= 1");
  }
};

/// RNG-backed draws, keyed by (seed, replica, level, index, half-step).
class RandomDraws {
public:
  RandomDraws(double q, std::uint64_t seed, std::uint64_t replica)
      : log_q_((check_q(q), std::log(q))), seed_(seed), replica_(replica) {}

  int operator()(int k, int i, DrawTag tag, std::int64_t step) const {
    const std::uint64_t half_step = 2 * static_cast<std::uint64_t>(step) + (tag == DrawTag::half ? 1 : 2);
    const DrawKey key{seed_, replica_, static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(i), half_step};
    return geometric_from_uniform(uniform_open_closed(hash_key(key)), log_q_);
  }

private:
  double log_q_;
  std::uint64_t seed_;
  std::uint64_t replica_;
};

/// Draw table replacing the RNG. JSON form:
///   [{"k":2,"i":1,"tag":"half","value":3}, {"k":1,"i":1,"tag":"full","n":0,"value":3}, ...]
/// "n" defaults to 0 (the step whose draws these are).
class InjectedDraws {
public:
  void set(int k, int i, DrawTag tag, std::int64_t step, int value) {
    if (value < 0)
      throw std::invalid_argument("injected draw must be >= 0");
    table_[{k, i, tag == DrawTag::half ? 0 : 1, step}] = value;
  }

  int operator()(int k, int i, DrawTag tag, std::int64_t step) const {
    auto it = table_.find({k, i, tag == DrawTag::half ? 0 : 1, step});
    if (it == table_.end())
      throw std::invalid_argument("missing draw xi(k=" + std::to_string(k) + ", i=" + std::to_string(i) +
                                  ", " + (tag == DrawTag::half ? "half" : "full") +
                                  ", n=" + std::to_string(step) + ")");
    return it->second;
  }

  static InjectedDraws from_json(const nlohmann::json &j) {
    InjectedDraws d;
    for (const auto &e : j) {
      const std::string tag = e.at("tag").get<std::string>();
      if (tag != "half" && tag != "full")
        throw std::invalid_argument("draw tag must be \"half\" or \"full\"");
      d.set(e.at("k").get<int>(), e.at("i").get<int>(), tag == "half" ? DrawTag::half : DrawTag::full,
            e.value("n", std::int64_t{0}), e.at("value").get<int>());
    }
    return d;
  }

private:
  std::map<std::tuple<int, int, int, std::int64_t>, int> table_;
};

/// Flat particle storage for fast stepping. Level k (1-based), index i
/// (1-based) lives at offset(k) + i - 1.
class ParticleArray {
public:
  explicit ParticleArray(int depth) : depth_(depth), offsets_(depth + 2, 0) {
    for (int k = 1; k <= depth; ++k)
      offsets_[k + 1] = offsets_[k] + particles_on_level(k);
    pos_.assign(offsets_[depth + 1], 0);
  }

  static ParticleArray from_state(const InterlacingState &s) {
    ParticleArray a(s.depth());
    for (int k = 1; k <= s.depth(); ++k)
      for (int i = 1; i <= particles_on_level(k); ++i)
        a.at(k, i) = s.level(k)[i - 1];
    return a;
  }

  InterlacingState to_state(std::int64_t t_half) const {
    InterlacingState s;
    s.t_half = t_half;
    for (int k = 1; k <= depth_; ++k)
      s.levels.emplace_back(k, std::vector<int>(pos_.begin() + offsets_[k], pos_.begin() + offsets_[k + 1]));
    return s;
  }

  int depth() const { return depth_; }
  int &at(int k, int i) { return pos_[offsets_[k] + i - 1]; }
  int at(int k, int i) const { return pos_[offsets_[k] + i - 1]; }
  const int *level_begin(int k) const { return pos_.data() + offsets_[k]; }

  bool is_interlaced() const {
    for (int k = 1; k <= depth_; ++k) {
      const int r = particles_on_level(k);
      for (int i = 1; i <= r; ++i) {
        if (at(k, i) < 0 || (i > 1 && at(k, i) > at(k, i - 1)))
          return false;
        if (k < depth_) {
          const int ru = particles_on_level(k + 1);
          if (at(k, i) > at(k + 1, i))
            return false;
          if (i + 1 <= ru && at(k + 1, i + 1) > at(k, i))
            return false;
        }
      }
    }
    return true;
  }

  friend bool operator==(const ParticleArray &, const ParticleArray &) = default;

private:
  int depth_;
  std::vector<int> offsets_;
  std::vector<int> pos_;
};

namespace detail {
constexpr int kInfinity = std::numeric_limits<int>::max() / 4;
}

/// Left jumps at time n: `now` holds X(n); returns X(n+1/2).
template <typename Draws>
ParticleArray left_half_step(const ParticleArray &now, const Draws &draws, std::int64_t step) {
  using detail::kInfinity;
  ParticleArray half = now;
  for (int k = 1; k <= now.depth(); ++k) {
    const int r = particles_on_level(k);
    for (int i = 1; i <= r; ++i) {
      if (k % 2 == 1 && i == r) {
        // Wall particle: only moves when pushed by the level below.
        const int push = k > 1 ? half.at(k - 1, r - 1) : kInfinity;
        half.at(k, i) = std::min(now.at(k, i), push);
        continue;
      }
      const int push = i == 1 ? kInfinity : half.at(k - 1, i - 1);
      const int block = now.at(k - 1, i);
      half.at(k, i) = std::max(block, std::min(now.at(k, i), push) - draws(k, i, DrawTag::half, step));
    }
  }
  return half;
}

/// Right jumps at time n+1/2: needs X(n) and X(n+1/2); returns X(n+1).
template <typename Draws>
ParticleArray right_half_step(const ParticleArray &now, const ParticleArray &half, const Draws &draws,
                              std::int64_t step, bool odd_wall_uses_half_time = true) {
  using detail::kInfinity;
  ParticleArray next = half;
  for (int k = 1; k <= now.depth(); ++k) {
    const int r = particles_on_level(k);
    for (int i = 1; i <= r; ++i) {
      if (k % 2 == 1 && i == r) {
        const ParticleArray &ref = odd_wall_uses_half_time ? half : now;
        const long long moved = static_cast<long long>(ref.at(k, r)) + draws(k, r, DrawTag::full, step) -
                                draws(k, r, DrawTag::half, step);
        const int cap = k > 1 ? ref.at(k - 1, r - 1) : kInfinity;
        next.at(k, i) = static_cast<int>(std::min<long long>(modified_abs(moved), cap));
        continue;
      }
      const int cap = i == 1 ? kInfinity : half.at(k - 1, i - 1);
      const int start = k > 1 ? std::max(half.at(k, i), next.at(k - 1, i)) : half.at(k, i);
      next.at(k, i) = std::min(cap, start + draws(k, i, DrawTag::full, step));
    }
  }
  return next;
}

inline InterlacingState left_half_step(const InterlacingState &now, const InjectedDraws &draws,
                                       std::int64_t step = 0) {
  auto half = left_half_step(ParticleArray::from_state(now), draws, step);
  return half.to_state(now.t_half + 1);
}

inline InterlacingState right_half_step(const InterlacingState &now, const InterlacingState &half,
                                        const InjectedDraws &draws, std::int64_t step = 0,
                                        bool odd_wall_uses_half_time = true) {
  auto next = right_half_step(ParticleArray::from_state(now), ParticleArray::from_state(half), draws, step,
                              odd_wall_uses_half_time);
  return next.to_state(now.t_half + 2);
}

/// Thrown by the interlacing assertion of long runs.
class InterlacingViolation : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

enum class RecordMode { half_times, integer_times, final_only };

/// Advances one replica from the packed state for `config.steps` steps,
/// calling `sink(const ParticleArray&, t_half)` at the recorded times.
template <typename Draws, typename Sink>
void run_replica(const RunConfig &config, const Draws &draws, RecordMode mode, Sink &&sink) {
  ParticleArray now(config.depth);
  if (mode != RecordMode::final_only || config.steps == 0)
    sink(now, std::int64_t{0});
  for (std::int64_t n = 0; n < config.steps; ++n) {
    ParticleArray half = left_half_step(now, draws, n);
    if (config.check_interlacing && !half.is_interlaced())
      throw InterlacingViolation("interlacing broken at t_half=" + std::to_string(2 * n + 1));
    if (mode == RecordMode::half_times)
      sink(half, 2 * n + 1);
    ParticleArray next = right_half_step(now, half, draws, n, config.odd_wall_uses_half_time);
    if (config.check_interlacing && !next.is_interlaced())
      throw InterlacingViolation("interlacing broken at t_half=" + std::to_string(2 * n + 2));
    now = std::move(next);
    if (mode != RecordMode::final_only || n + 1 == config.steps)
      sink(now, 2 * n + 2);
  }
}

/// Trajectory of replica `replica` as InterlacingStates.
inline std::vector<InterlacingState> run_trajectory(const RunConfig &config, std::uint64_t replica,
                                                    RecordMode mode = RecordMode::integer_times) {
  config.validate();
  std::vector<InterlacingState> out;
  RandomDraws draws(config.q, config.seed, replica);
  run_replica(config, draws, mode, [&](const ParticleArray &a, std::int64_t t) { out.push_back(a.to_state(t)); });
  return out;
}

} // namespace wallsim
