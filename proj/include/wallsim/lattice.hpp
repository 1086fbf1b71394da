#pragma once

// State space of the interlacing particle array: one Signature per level,
// level k carrying floor((k+1)/2) particles, adjacent levels interlaced.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace wallsim {

/// Number of particles on level k.
constexpr int particles_on_level(int k) { return (k + 1) / 2; }

/// {x}: x for x >= 0, -x-1 for x < 0. A jump to -x lands on x-1.
constexpr long long modified_abs(long long x) { return x >= 0 ? x : -x - 1; }

/// lower ≺ upper for part lists of equal length or upper one longer:
/// upper[i+1] <= lower[i] <= upper[i] wherever the indices exist.
inline bool interlaces(std::span<const int> lower, std::span<const int> upper) {
  if (upper.size() != lower.size() && upper.size() != lower.size() + 1)
    throw std::invalid_argument("interlaces: upper must have the same length as lower or one more");
  for (std::size_t i = 0; i < lower.size(); ++i) {
    if (lower[i] > upper[i])
      return false;
    if (i + 1 < upper.size() && upper[i + 1] > lower[i])
      return false;
  }
  return true;
}

/// Particle positions of a single level, weakly decreasing.
class Signature {
public:
  Signature() = default;
  Signature(int level, std::vector<int> parts) : level_(level), parts_(std::move(parts)) {
    if (level_ < 1)
      throw std::invalid_argument("Signature: level must be >= 1");
    if (static_cast<int>(parts_.size()) != particles_on_level(level_))
      throw std::invalid_argument("Signature: level " + std::to_string(level_) + " needs " +
                                  std::to_string(particles_on_level(level_)) + " parts");
    for (std::size_t i = 0; i < parts_.size(); ++i) {
      if (parts_[i] < 0)
        throw std::invalid_argument("Signature: negative part");
      if (i > 0 && parts_[i] > parts_[i - 1])
        throw std::invalid_argument("Signature: parts must be weakly decreasing");
    }
  }

  /// Densely packed level: every particle at 0.
  static Signature packed(int level) {
    return Signature(level, std::vector<int>(particles_on_level(level), 0));
  }

  int level() const { return level_; }
  int length() const { return static_cast<int>(parts_.size()); }
  const std::vector<int> &parts() const { return parts_; }
  int operator[](std::size_t i) const { return parts_[i]; }
  int max_part() const { return parts_.empty() ? 0 : parts_.front(); }

  /// Shifted coordinates λ_i + r - i (1-based i); strictly decreasing.
  std::vector<int> shifted() const {
    std::vector<int> out(parts_.size());
    const int r = length();
    for (int i = 0; i < r; ++i)
      out[i] = parts_[i] + r - (i + 1);
    return out;
  }

  std::string to_string(char sep = '.') const {
    std::string out;
    for (std::size_t i = 0; i < parts_.size(); ++i) {
      if (i)
        out += sep;
      out += std::to_string(parts_[i]);
    }
    return out;
  }

  friend bool operator==(const Signature &, const Signature &) = default;
  friend auto operator<=>(const Signature &a, const Signature &b) {
    if (auto c = a.level_ <=> b.level_; c != 0)
      return c;
    return a.parts_ <=> b.parts_;
  }

private:
  int level_ = 1;
  std::vector<int> parts_{0};
};

inline bool interlaces(const Signature &lower, const Signature &upper) {
  return interlaces(std::span<const int>(lower.parts()), std::span<const int>(upper.parts()));
}

/// Full configuration X^1 ≺ X^2 ≺ ... ≺ X^K at time t_half / 2.
struct InterlacingState {
  std::vector<Signature> levels;
  std::int64_t t_half = 0;

  int depth() const { return static_cast<int>(levels.size()); }
  const Signature &level(int k) const { return levels.at(k - 1); }

  static InterlacingState packed(int depth) {
    InterlacingState s;
    for (int k = 1; k <= depth; ++k)
      s.levels.push_back(Signature::packed(k));
    return s;
  }

  /// Validity of the whole array reduces to the consecutive pairs.
  bool is_interlaced() const {
    for (std::size_t k = 0; k + 1 < levels.size(); ++k)
      if (!interlaces(levels[k], levels[k + 1]))
        return false;
    return true;
  }

  friend bool operator==(const InterlacingState &, const InterlacingState &) = default;
};

/// Shifted, simple coordinates X̃^k_i = X^k_i + r_k - i for every level.
inline std::vector<std::vector<int>> to_simple(const InterlacingState &state) {
  std::vector<std::vector<int>> out;
  out.reserve(state.levels.size());
  for (const auto &sig : state.levels)
    out.push_back(sig.shifted());
  return out;
}

inline InterlacingState from_simple(const std::vector<std::vector<int>> &simple, std::int64_t t_half = 0) {
  InterlacingState s;
  s.t_half = t_half;
  for (std::size_t k = 0; k < simple.size(); ++k) {
    const int r = static_cast<int>(simple[k].size());
    std::vector<int> parts(r);
    for (int i = 0; i < r; ++i)
      parts[i] = simple[k][i] - (r - (i + 1));
    s.levels.emplace_back(static_cast<int>(k) + 1, std::move(parts));
  }
  return s;
}

/// All level-k signatures with parts <= cap, in lexicographic order of the
/// (descending) part lists. Kernel matrices index rows and columns this way.
inline std::vector<Signature> enumerate_states(int k, int cap) {
  if (cap < 0)
    throw std::invalid_argument("enumerate_states: cap must be >= 0");
  const int r = particles_on_level(k);
  std::vector<Signature> out;
  std::vector<int> parts(r, 0);
  // parts[0] is the most significant digit; parts[i] <= parts[i-1].
  auto rec = [&](auto &&self, int i, int upper) -> void {
    if (i == r) {
      out.emplace_back(k, parts);
      return;
    }
    for (int v = 0; v <= upper; ++v) {
      parts[i] = v;
      self(self, i + 1, v);
    }
  };
  rec(rec, 0, cap);
  return out;
}

/// Same-level pairs (z, y) with z ≺ y.
struct LevelPairState {
  Signature z;
  Signature y;

  LevelPairState(Signature z_, Signature y_) : z(std::move(z_)), y(std::move(y_)) {
    if (z.level() != y.level() || !interlaces(z, y))
      throw std::invalid_argument("LevelPairState: need z ≺ y on the same level");
  }
  friend bool operator==(const LevelPairState &, const LevelPairState &) = default;
};

inline nlohmann::json to_json(const InterlacingState &state) {
  nlohmann::json levels = nlohmann::json::array();
  for (const auto &sig : state.levels)
    levels.push_back(sig.parts());
  return {{"t_half", state.t_half}, {"levels", levels}};
}

inline InterlacingState state_from_json(const nlohmann::json &j) {
  InterlacingState s;
  s.t_half = j.at("t_half").get<std::int64_t>();
  int k = 1;
  for (const auto &lvl : j.at("levels"))
    s.levels.emplace_back(k++, lvl.get<std::vector<int>>());
  if (!s.is_interlaced())
    throw std::invalid_argument("state_from_json: levels do not interlace");
  return s;
}

} // namespace wallsim
