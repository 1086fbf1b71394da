#pragma once

// Monte Carlo estimators over independent replicas and their exact
// Markov-chain counterparts.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/special_functions/erf.hpp>

#include "correlation.hpp"
#include "dynamics.hpp"
#include "kernels.hpp"
#include "lattice.hpp"
#include "projection.hpp"

namespace wallsim {

/// Worker threads: $WALLSIM_THREADS if set, else the hardware concurrency.
inline int default_thread_count() {
  if (const char *env = std::getenv("WALLSIM_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0)
      return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(acc, replica) for every replica, one accumulator per thread,
/// then folds them with acc.merge(other). Replica streams are keyed by the
/// replica index, so any integer-count accumulator gives identical results
/// for any thread count.
template <typename Acc, typename Body>
Acc parallel_replicas(std::int64_t replicas, Body &&body, int threads = default_thread_count()) {
  threads = static_cast<int>(std::max<std::int64_t>(1, std::min<std::int64_t>(threads, replicas)));
  std::vector<Acc> accs(threads);
  auto work = [&](int t) {
    const std::int64_t lo = replicas * t / threads, hi = replicas * (t + 1) / threads;
    for (std::int64_t rep = lo; rep < hi; ++rep)
      body(accs[t], rep);
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
      pool.emplace_back(work, t);
    for (auto &th : pool)
      th.join();
  }
  for (int t = 1; t < threads; ++t)
    accs[0].merge(accs[t]);
  return std::move(accs[0]);
}

/// Two-sided normal threshold z with P(|Z| > z) = alpha / m, so that m
/// simultaneous comparisons exceed it with total probability at most alpha.
inline double familywise_threshold(std::int64_t m, double alpha = 0.0027) {
  if (m < 1 || !(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("familywise_threshold: need m >= 1 and alpha in (0,1)");
  return std::sqrt(2.0) * boost::math::erfc_inv(alpha / static_cast<double>(m));
}

// ---------------------------------------------------------------------------
// One-level laws

using Distribution = std::map<std::vector<int>, double>;

/// (P_k)^n δ_0 in double precision. Targets are enumerated up to
/// max_part + ⌈log(prune)/log q⌉ + 2 per row and states carrying less than
/// `prune` mass are dropped; the mass lost is returned in `lost`.
inline Distribution level_law_exact(int k, int n, double q, double prune = 1e-15, double *lost = nullptr) {
  check_q(q);
  Distribution dist{{std::vector<int>(particles_on_level(k), 0), 1.0}};
  std::map<std::vector<int>, double> dims;
  auto dim = [&](const Signature &s) {
    auto it = dims.find(s.parts());
    if (it == dims.end())
      it = dims.emplace(s.parts(), to_double(s_dim(s))).first;
    return it->second;
  };
  const int reach = static_cast<int>(std::ceil(std::log(prune) / std::log(q))) + 2;
  for (int step = 0; step < n; ++step) {
    Distribution next;
    for (const auto &[parts, mass] : dist) {
      const Signature from(k, parts);
      const double d_from = dim(from);
      for (const auto &to : enumerate_states(k, from.max_part() + reach)) {
        const double p = p_kernel_bare<double>(from, to, q);
        if (p == 0.0)
          continue;
        const double m = mass * p * dim(to) / d_from;
        if (m > prune)
          next[to.parts()] += m;
      }
    }
    dist = std::move(next);
  }
  double total = 0.0;
  for (const auto &[t, p] : dist)
    total += p;
  if (lost)
    *lost = 1.0 - total;
  return dist;
}

struct CountTable {
  std::map<std::vector<int>, std::int64_t> counts;
  std::int64_t total = 0;
  void add(std::vector<int> key) {
    ++counts[std::move(key)];
    ++total;
  }
  void merge(const CountTable &o) {
    for (const auto &[k, c] : o.counts)
      counts[k] += c;
    total += o.total;
  }
};

struct LawComparison {
  double total_variation = 0.0;
  double max_abs_z = 0.0;
  int compared_states = 0;   // states with expected count >= min_expected
  std::vector<int> worst_state;
};

/// Per-state z-scores (states with expected count >= min_expected; the rest
/// pooled into one tail bin) and the total variation distance.
inline LawComparison compare_law(const CountTable &emp, const Distribution &exact, double min_expected = 10.0) {
  LawComparison out;
  const double n = static_cast<double>(emp.total);
  std::set<std::vector<int>> keys;
  for (const auto &[k, c] : emp.counts)
    keys.insert(k);
  for (const auto &[k, p] : exact)
    keys.insert(k);
  double tail_p = 0.0, tail_c = 0.0, tv = 0.0, exact_mass = 0.0;
  for (const auto &key : keys) {
    const auto ie = exact.find(key);
    const double p = ie == exact.end() ? 0.0 : ie->second;
    const auto ic = emp.counts.find(key);
    const double c = ic == emp.counts.end() ? 0.0 : static_cast<double>(ic->second);
    exact_mass += p;
    tv += std::abs(c / n - p);
    if (n * p >= min_expected) {
      const double z = (c - n * p) / std::sqrt(n * p * (1.0 - p));
      ++out.compared_states;
      if (std::abs(z) > out.max_abs_z) {
        out.max_abs_z = std::abs(z);
        out.worst_state = key;
      }
    } else {
      tail_p += p;
      tail_c += c;
    }
  }
  // mass the exact law lost to pruning is unaccounted for in `exact`
  tv += std::max(0.0, 1.0 - exact_mass);
  tail_p += std::max(0.0, 1.0 - exact_mass);
  if (n * tail_p >= min_expected) {
    const double z = (tail_c - n * tail_p) / std::sqrt(n * tail_p * (1.0 - tail_p));
    if (std::abs(z) > out.max_abs_z) {
      out.max_abs_z = std::abs(z);
      out.worst_state = {-1};
    }
  } else if (tail_c > min_expected + 4.0 * std::sqrt(min_expected)) {
    out.max_abs_z = std::max(out.max_abs_z, (tail_c - n * tail_p) / std::sqrt(std::max(n * tail_p, 1.0)));
  }
  out.total_variation = 0.5 * tv;
  return out;
}

/// Empirical laws of X^k(n) for n = 1..steps from `replicas` runs.
inline std::vector<CountTable> empirical_level_laws(const RunConfig &config, int k) {
  config.validate();
  struct Acc {
    std::vector<CountTable> tables;
    void merge(const Acc &o) {
      if (tables.empty()) {
        tables = o.tables;
        return;
      }
      for (std::size_t i = 0; i < o.tables.size(); ++i)
        tables[i].merge(o.tables[i]);
    }
  };
  Acc acc = parallel_replicas<Acc>(config.replicas, [&](Acc &a, std::int64_t rep) {
    if (a.tables.empty())
      a.tables.resize(config.steps);
    RandomDraws draws(config.q, config.seed, static_cast<std::uint64_t>(rep));
    run_replica(config, draws, RecordMode::integer_times, [&](const ParticleArray &arr, std::int64_t t) {
      if (t == 0)
        return;
      const int *b = arr.level_begin(k);
      a.tables[t / 2 - 1].add(std::vector<int>(b, b + particles_on_level(k)));
    });
  });
  if (acc.tables.empty())
    acc.tables.resize(config.steps);
  return acc.tables;
}

// ---------------------------------------------------------------------------
// Two-time transitions

/// Key: (y, z', y') flattened with separators. z' follows the odd-level
/// convention: the wall coordinate is the previous integer-time position.
struct TransitionTable {
  // step index n (1-based) -> from y -> (z', y') -> count
  std::map<std::vector<int>, std::map<std::pair<std::vector<int>, std::vector<int>>, std::int64_t>> counts;
  std::map<std::vector<int>, std::int64_t> from_counts;
  void merge(const TransitionTable &o) {
    for (const auto &[y, row] : o.counts)
      for (const auto &[t, c] : row)
        counts[y][t] += c;
    for (const auto &[y, c] : o.from_counts)
      from_counts[y] += c;
  }
};

/// Empirical transitions y = X^k(n-1) -> (z', y') = (X^k(n-1/2), X^k(n)) at a
/// fixed step n.
inline TransitionTable empirical_transitions(const RunConfig &config, int k, std::int64_t n) {
  config.validate();
  if (n < 1 || n > config.steps)
    throw std::invalid_argument("transition step out of range");
  const int r = particles_on_level(k);
  return parallel_replicas<TransitionTable>(config.replicas, [&](TransitionTable &tab, std::int64_t rep) {
    RandomDraws draws(config.q, config.seed, static_cast<std::uint64_t>(rep));
    std::vector<int> y, zp;
    RunConfig cfg = config;
    cfg.steps = n;
    run_replica(cfg, draws, RecordMode::half_times, [&](const ParticleArray &arr, std::int64_t t) {
      const int *b = arr.level_begin(k);
      std::vector<int> cur(b, b + r);
      if (t == 2 * n - 2) {
        y = cur;
      } else if (t == 2 * n - 1) {
        zp = cur;
        if (k % 2 == 1)
          zp[r - 1] = y[r - 1];
      } else if (t == 2 * n) {
        ++tab.counts[y][{zp, cur}];
        ++tab.from_counts[y];
      }
    });
  });
}

struct TransitionComparison {
  double max_abs_z = 0.0;
  int compared_entries = 0;
  int exceed_3sigma = 0;
  std::int64_t impossible_count = 0; // observed transitions with S_k = 0
};

inline TransitionComparison compare_transitions(const TransitionTable &tab, int k, double q,
                                                double min_expected = 30.0) {
  TransitionComparison out;
  auto tally = [&](double c, double expected, double p) {
    if (expected < min_expected)
      return;
    const double z = (c - expected) / std::sqrt(expected * (1.0 - p));
    ++out.compared_entries;
    out.max_abs_z = std::max(out.max_abs_z, std::abs(z));
    if (std::abs(z) > 3.0)
      ++out.exceed_3sigma;
  };
  for (const auto &[y, row] : tab.counts) {
    const double ny = static_cast<double>(tab.from_counts.at(y));
    const Signature ys(k, y);
    // entries with expected count below min_expected, observed or not, form
    // one pooled bin
    double common_mass = 0.0, rare_count = ny;
    for (const auto &[target, c] : row) {
      const auto &zp = target.first;
      double s = 0.0;
      if (std::is_sorted(zp.begin(), zp.end(), std::greater<int>()))
        s = s_kernel<double>(ys, Signature(k, zp), Signature(k, target.second), q);
      if (s == 0.0) {
        out.impossible_count += c;
        rare_count -= static_cast<double>(c);
        continue;
      }
      if (ny * s >= min_expected) {
        common_mass += s;
        rare_count -= static_cast<double>(c);
        tally(static_cast<double>(c), ny * s, s);
      }
    }
    const double rare = std::max(0.0, 1.0 - common_mass);
    tally(rare_count, ny * rare, rare);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Correlation functions

struct CorrelationEstimate {
  double mean = 0.0;
  double sigma = 0.0;
  std::int64_t hits = 0;
  std::int64_t replicas = 0;
};

/// Fraction of replicas whose shifted configuration X̃ at time T occupies
/// every point of each set, with its binomial standard error.
inline std::vector<CorrelationEstimate>
empirical_correlation(const RunConfig &config, std::int64_t T, const std::vector<std::vector<SpacePoint>> &sets) {
  if (config.replicas < 1)
    throw std::invalid_argument("empirical_correlation: empty ensemble");
  int depth = 1;
  for (const auto &set : sets)
    for (const auto &p : set)
      depth = std::max(depth, p.k);
  RunConfig cfg = config;
  cfg.steps = T;
  cfg.depth = std::max(cfg.depth, depth);
  cfg.validate();
  struct Acc {
    std::vector<std::int64_t> hits;
    void merge(const Acc &o) {
      if (hits.empty())
        hits = o.hits;
      else
        for (std::size_t i = 0; i < o.hits.size(); ++i)
          hits[i] += o.hits[i];
    }
  };
  Acc acc = parallel_replicas<Acc>(cfg.replicas, [&](Acc &a, std::int64_t rep) {
    if (a.hits.empty())
      a.hits.assign(sets.size(), 0);
    RandomDraws draws(cfg.q, cfg.seed, static_cast<std::uint64_t>(rep));
    run_replica(cfg, draws, RecordMode::final_only, [&](const ParticleArray &arr, std::int64_t) {
      auto occupied = [&](const SpacePoint &p) {
        const int r = particles_on_level(p.k);
        for (int i = 1; i <= r; ++i)
          if (arr.at(p.k, i) + r - i == p.s)
            return true;
        return false;
      };
      for (std::size_t s = 0; s < sets.size(); ++s)
        if (std::all_of(sets[s].begin(), sets[s].end(), occupied))
          ++a.hits[s];
    });
  });
  if (acc.hits.empty())
    acc.hits.assign(sets.size(), 0);
  std::vector<CorrelationEstimate> out;
  for (auto h : acc.hits) {
    CorrelationEstimate e;
    e.hits = h;
    e.replicas = cfg.replicas;
    e.mean = static_cast<double>(h) / static_cast<double>(cfg.replicas);
    e.sigma = std::sqrt(e.mean * (1.0 - e.mean) / static_cast<double>(cfg.replicas));
    out.push_back(e);
  }
  return out;
}

} // namespace wallsim
