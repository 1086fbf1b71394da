#pragma once

// Two-time level kernels S_k, the Gibbs link L_k, the joint kernel Q_k of
// (level k-1, level k), and the intertwining L_k Q_k = S_k L_k that makes
// each level Markov on its own.
//
// Convention on odd levels k = 2r-1: the half-time coordinate z'_r of the
// wall particle is recorded as the previous integer-time position y_r, and
// the interlacing indicator of S_k constrains only z'_1..z'_{r-1}. This is
// what makes the z'-marginal of S_k equal to P_k.

#include <algorithm>
#include <climits>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "kernels.hpp"
#include "lattice.hpp"
#include "rational.hpp"

namespace wallsim {

/// Cap value standing for +∞ (the absent particle X^{k-1}_0).
constexpr long long kNoCap = LLONG_MAX;

enum class OneStepKind { left_capped, right_capped, reflect_capped };

/// Law of max(a, x - ξ) at y. Zero outside a <= y <= x.
template <typename Scalar> Scalar left_capped_law(long long a, long long x, long long y, const Scalar &q) {
  if (!(a <= y && y <= x))
    return Scalar(0);
  if (y >= a + 1)
    return (Scalar(1) - q) * ipow(q, x - y);
  return ipow(q, x - a);
}

/// Law of min(b, x + ξ) at y. Zero outside x <= y <= b. b = kNoCap: uncapped.
template <typename Scalar> Scalar right_capped_law(long long b, long long x, long long y, const Scalar &q) {
  if (!(x <= y && y <= b))
    return Scalar(0);
  if (b == kNoCap || y <= b - 1)
    return (Scalar(1) - q) * ipow(q, y - x);
  return ipow(q, b - x);
}

/// Law of min(b, {x + ξ1 - ξ2}) at y. Zero unless 0 <= y <= b and x <= b.
template <typename Scalar> Scalar reflect_capped_law(long long b, long long x, long long y, const Scalar &q) {
  if (y < 0 || x < 0 || y > b || x > b)
    return Scalar(0);
  if (b == kNoCap || y <= b - 1)
    return r_kernel(x, y, q);
  return ipow(q, b) * (ipow(q, -x) + ipow(q, x + 1)) / (Scalar(1) + q);
}

template <typename Scalar>
Scalar one_step_law(OneStepKind kind, long long barrier, long long x, long long y, const Scalar &q) {
  switch (kind) {
  case OneStepKind::left_capped:
    return left_capped_law(barrier, x, y, q);
  case OneStepKind::right_capped:
    return right_capped_law(barrier, x, y, q);
  case OneStepKind::reflect_capped:
    return reflect_capped_law(barrier, x, y, q);
  }
  return Scalar(0);
}

namespace detail {
/// c ≺ y (length r or r+1) restricted to the first n coordinates of c.
inline bool prefix_interlaces(const std::vector<int> &c, std::size_t n, const std::vector<int> &y) {
  for (std::size_t i = 0; i < n; ++i) {
    if (c[i] > y[i])
      return false;
    if (i + 1 < y.size() && y[i + 1] > c[i])
      return false;
  }
  return true;
}
} // namespace detail

/// Whether (z', y') is a two-time state of level k under the convention
/// above: full equal-length interlacing on even levels, interlacing of the
/// first r-1 coordinates on odd levels.
inline bool is_pair_state(const Signature &z, const Signature &y) {
  if (z.level() != y.level())
    return false;
  const std::size_t r = y.length();
  const std::size_t n = y.level() % 2 == 0 ? r : r - 1;
  return detail::prefix_interlaces(z.parts(), n, y.parts());
}

/// S_k(y, (z', y')); independent of the previous half-time state z.
template <typename Scalar>
Scalar s_kernel(const Signature &y, const Signature &zp, const Signature &yp, const Scalar &q) {
  const int k = y.level();
  if (zp.level() != k || yp.level() != k)
    throw std::invalid_argument("s_kernel: level mismatch");
  const int r = y.length();
  const int n = k % 2 == 0 ? r : r - 1;
  if (k % 2 == 1 && zp[r - 1] != y[r - 1])
    return Scalar(0);
  if (!detail::prefix_interlaces(zp.parts(), n, y.parts()) || !detail::prefix_interlaces(zp.parts(), n, yp.parts()))
    return Scalar(0);
  long long exponent = 0;
  for (int i = 0; i < n; ++i)
    exponent += static_cast<long long>(y[i]) + yp[i] - 2LL * zp[i];
  Scalar value = ipow(Scalar(1) - q, 2LL * n) * from_rational<Scalar>(s_dim(yp) / s_dim(y)) * ipow(q, exponent);
  if (k % 2 == 1)
    value *= r_kernel(y[r - 1], yp[r - 1], q);
  return value;
}

template <typename Scalar>
Scalar s_kernel(const LevelPairState &from, const LevelPairState &to, const Scalar &q) {
  return s_kernel(from.y, to.z, to.y, q);
}

/// L_k((z0,y0), (x,z,y)) = 1{(z0,y0)=(z,y)} s_{k-1}(x)/s_k(y) 1{x ≺ y}.
inline Rational l_kernel(const LevelPairState &from, const Signature &x, const LevelPairState &to) {
  if (!(from == to) || x.level() + 1 != to.y.level() || !interlaces(x, to.y))
    return Rational(0);
  return s_dim(x) / s_dim(to.y);
}

/// Q_k((u,z,y), (x,z',y')): level k-1 moves by S_{k-1} from u to (v,x), then
/// level k makes its capped left jumps (floors u_i, pushes v_{i-1}) and
/// capped right jumps (caps v_{i-1}); on odd k the wall particle moves by the
/// capped reflection law. v_0 = ∞.
template <typename Scalar>
Scalar q_kernel(const Signature &u, const Signature &y, const Signature &x, const Signature &zp, const Signature &yp,
                const Scalar &q) {
  const int k = y.level();
  if (k < 2)
    throw std::invalid_argument("q_kernel: k >= 2 required");
  if (u.level() != k - 1 || x.level() != k - 1 || zp.level() != k || yp.level() != k)
    throw std::invalid_argument("q_kernel: level mismatch");
  if (!interlaces(u, y) || !interlaces(x, yp))
    return Scalar(0);
  const int r = y.length();
  const bool odd = k % 2 == 1;
  if (odd && zp[r - 1] != y[r - 1])
    return Scalar(0);
  const int free_v = r - 1; // summed coordinates of v
  const int lower_len = u.length();

  std::vector<int> v(lower_len, 0);
  if (!odd)
    v[r - 1] = u[r - 1]; // half-time wall coordinate of the odd level below
  Scalar total(0);

  auto cap_at = [&](int i) -> long long { return i == 0 ? kNoCap : v[i - 1]; }; // v_{i}, 0-based i -> v_{i}
  auto rec = [&](auto &&self, int i) -> void {
    if (i == free_v) {
      if (!std::is_sorted(v.begin(), v.end(), std::greater<int>()))
        return;
      Scalar term = s_kernel(u, Signature(k - 1, v), x, q);
      if (term == Scalar(0))
        return;
      const int jumps = odd ? r - 1 : r;
      for (int j = 0; j < jumps && term != Scalar(0); ++j) {
        const long long start_left = std::min<long long>(y[j], cap_at(j));
        term *= left_capped_law<Scalar>(u[j], start_left, zp[j], q);
        if (term == Scalar(0))
          break;
        const long long start_right = std::max(zp[j], x[j]);
        term *= right_capped_law<Scalar>(cap_at(j), start_right, yp[j], q);
      }
      if (odd && term != Scalar(0)) {
        const long long cap = cap_at(r - 1);
        term *= reflect_capped_law<Scalar>(cap, std::min<long long>(y[r - 1], cap), yp[r - 1], q);
      }
      total += term;
      return;
    }
    const int lo = i + 1 < yp.length() ? yp[i + 1] : 0;
    const int hi = std::min(x[i], zp[i]);
    for (int val = lo; val <= hi; ++val) {
      v[i] = val;
      self(self, i + 1);
    }
  };
  // v must be weakly decreasing; S_{k-1} enforces it through v ≺ u, x.
  rec(rec, 0);
  return total;
}

// ---------------------------------------------------------------------------
// Identity checks

struct KeyIdentityArgs {
  long long x = 0, y = 0, z = 0, a = 0, yp = 0;
};

/// |LHS - RHS| of the four summation identities for the capped laws.
/// (1) x, y, z with 0 < z <= y;  (2) a <= y <= x;  (3) x <= y <= a;
/// (4) y >= 0, 1 <= y' <= a.
template <typename Scalar> Scalar keyidentity_check(int id, const KeyIdentityArgs &p, const Scalar &q) {
  Scalar lhs(0), rhs(0);
  switch (id) {
  case 1:
    if (!(p.x >= 0 && 0 < p.z && p.z <= p.y))
      throw std::invalid_argument("identity 1 needs x >= 0 and 0 < z <= y");
    for (long long u = 0; u <= p.z; ++u)
      lhs += r_kernel(u, p.x, q) * left_capped_law(u, p.y, p.z, q);
    rhs = (Scalar(1) - q) * ipow(q, std::max(p.x, p.z) + p.y - 2 * p.z);
    break;
  case 2:
    if (!(0 <= p.a && p.a <= p.y && p.y <= p.x))
      throw std::invalid_argument("identity 2 needs 0 <= a <= y <= x");
    for (long long u = p.a; u <= p.y; ++u)
      lhs += ipow(q, u) * left_capped_law(u, p.x, p.y, q);
    rhs = ipow(q, p.x - p.y + p.a);
    break;
  case 3:
    if (!(0 <= p.x && p.x <= p.y && p.y <= p.a))
      throw std::invalid_argument("identity 3 needs 0 <= x <= y <= a");
    for (long long v = p.y; v <= p.a; ++v)
      lhs += ipow(q, -v) * right_capped_law(v, p.x, p.y, q);
    rhs = ipow(q, p.y - p.x - p.a);
    break;
  case 4:
    if (!(p.y >= 0 && 1 <= p.yp && p.yp <= p.a))
      throw std::invalid_argument("identity 4 needs y >= 0 and 1 <= y' <= a");
    for (long long v = p.yp; v <= p.a; ++v)
      lhs += ipow(q, std::max(v, p.y) - 2 * v) * reflect_capped_law(v, std::min(p.y, v), p.yp, q);
    rhs = ipow(q, -p.a) * r_kernel(p.y, p.yp, q) / (Scalar(1) - q);
    break;
  default:
    throw std::invalid_argument("identity id must be 1..4");
  }
  Scalar diff = lhs - rhs;
  return diff < Scalar(0) ? Scalar(-diff) : diff;
}

/// Runs every admissible parameter combination with all entries <= bound.
/// Returns the maximum residual and the number of cases checked.
template <typename Scalar> std::pair<Scalar, long long> keyidentity_grid(int id, int bound, const Scalar &q) {
  Scalar worst(0);
  long long cases = 0;
  auto take = [&](const KeyIdentityArgs &p) {
    Scalar r = keyidentity_check(id, p, q);
    if (r > worst)
      worst = r;
    ++cases;
  };
  for (long long s = 0; s <= bound; ++s)
    for (long long t = 0; t <= bound; ++t)
      for (long long w = 0; w <= bound; ++w) {
        switch (id) {
        case 1:
          if (0 < w && w <= t)
            take({s, t, w, 0, 0});
          break;
        case 2:
          if (w <= t && t <= s)
            take({s, t, 0, w, 0});
          break;
        case 3:
          if (s <= t && t <= w)
            take({s, t, 0, w, 0});
          break;
        case 4:
          if (1 <= t && t <= w)
            take({0, s, 0, w, t});
          break;
        }
      }
  return {worst, cases};
}

/// Σ_{z'} S_k(y, (z', y')) - P_k(y, y'), exactly.
inline Rational sp_check(const Signature &y, const Signature &yp, const Rational &q) {
  Rational sum(0);
  const int k = y.level();
  const int cap = std::max(y.max_part(), yp.max_part());
  for (const auto &zp : enumerate_states(k, cap))
    sum += s_kernel(y, zp, yp, q);
  Rational diff = sum - p_kernel(y, yp, q);
  return diff < 0 ? Rational(-diff) : diff;
}

struct IntertwiningReport {
  int k = 0;
  int cap = 0;
  Rational q;
  Rational max_residual;         // over every computed entry
  Rational max_residual_conclusive;
  long long rows = 0;
  long long conclusive_rows = 0; // rows whose captured S_k L_k mass >= 1 - tail_tolerance
  long long entries = 0;
  double worst_tail = 0.0;       // largest 1 - captured mass over all rows
  double best_tail = 1.0;        // smallest 1 - captured mass over all rows
  double tail_tolerance = 1e-8;

  nlohmann::json to_json() const {
    return {{"check", "intertwining"},
            {"params", {{"k", k}, {"M", cap}, {"q", q.str()}}},
            {"residual", to_double(max_residual)},
            {"residual_exact", max_residual.str()},
            {"residual_conclusive", to_double(max_residual_conclusive)},
            {"rows", rows},
            {"entries", entries},
            {"conclusive_rows", conclusive_rows},
            {"tail_bound", worst_tail}};
  }
};

/// Builds L_k Q_k and S_k L_k on all states with parts <= cap and compares
/// them entrywise in exact arithmetic. Each entry is a finite sum, so the
/// truncation only limits which columns are inspected; the captured row mass
/// of S_k L_k is still reported so rows can be graded by the tail criterion.
/// Rows are indexed by y alone because neither side depends on z. With
/// require_conclusive set, a truncation leaving every row below the mass
/// threshold raises InconclusiveResult.
inline IntertwiningReport intertwining_check(int k, int cap, const Rational &q, double tail_tolerance = 1e-8,
                                             bool require_conclusive = true) {
  if (k < 2)
    throw std::invalid_argument("intertwining_check: k >= 2 required");
  IntertwiningReport rep;
  rep.k = k;
  rep.cap = cap;
  rep.q = q;
  rep.tail_tolerance = tail_tolerance;

  const auto upper = enumerate_states(k, cap);
  const auto lower = enumerate_states(k - 1, cap);
  std::map<Signature, Rational> sdim;
  for (const auto &s : upper)
    sdim[s] = s_dim(s);
  for (const auto &s : lower)
    sdim[s] = s_dim(s);

  for (const auto &y : upper) {
    ++rep.rows;
    Rational row_max(0), mass(0);
    std::vector<Signature> below_y;
    for (const auto &u : lower)
      if (interlaces(u, y))
        below_y.push_back(u);
    for (const auto &yp : upper) {
      for (const auto &zp : upper) {
        if (!is_pair_state(zp, yp))
          continue;
        const Rational s_val = s_kernel(y, zp, yp, q);
        mass += s_val;
        for (const auto &x : lower) {
          if (!interlaces(x, yp))
            continue;
          Rational lq(0);
          for (const auto &u : below_y)
            lq += sdim[u] / sdim[y] * q_kernel(u, y, x, zp, yp, q);
          const Rational sl = s_val * sdim[x] / sdim[yp];
          Rational d = lq - sl;
          if (d < 0)
            d = -d;
          if (d > row_max)
            row_max = d;
          ++rep.entries;
        }
      }
    }
    const double tail = 1.0 - to_double(mass);
    rep.worst_tail = std::max(rep.worst_tail, tail);
    rep.best_tail = std::min(rep.best_tail, tail);
    if (row_max > rep.max_residual)
      rep.max_residual = row_max;
    if (tail <= tail_tolerance) {
      ++rep.conclusive_rows;
      if (row_max > rep.max_residual_conclusive)
        rep.max_residual_conclusive = row_max;
    }
  }
  if (require_conclusive && rep.conclusive_rows == 0)
  {
    std::ostringstream msg;
    msg << "intertwining: no row of the M=" << cap << " truncation reaches mass 1 - " << tail_tolerance
        << " (smallest tail " << rep.best_tail << ")";
    throw InconclusiveResult(msg.str());
  }
  return rep;
}

} // namespace wallsim
