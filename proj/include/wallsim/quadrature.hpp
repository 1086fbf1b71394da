#pragma once

#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace wallsim {

/// Node counts and tolerances for one-dimensional integrals.
struct QuadratureSpec {
  int nodes = 256;
  int max_doublings = 3;
  double tolerance = 1e-12; // relative to max(1, |value|)
};

struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1] by Newton iteration on P_n.
inline GaussRule compute_gauss_legendre(int n) {
  if (n < 1)
    throw std::invalid_argument("Gauss-Legendre rule needs n >= 1");
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16)
        break;
    }
    // recompute derivative at the converged node
    double p0 = 1.0, p1 = 0.0;
    for (int j = 1; j <= n; ++j) {
      const double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
    }
    dp = n * (z * p0 - p1) / (z * z - 1.0);
    rule.nodes[i] = -z;
    rule.nodes[n - 1 - i] = z;
    rule.weights[i] = rule.weights[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return rule;
}

/// Cached rules; safe to call from several threads.
inline const GaussRule &gauss_legendre(int n) {
  static std::mutex mutex;
  static std::map<int, GaussRule> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end())
    it = cache.emplace(n, compute_gauss_legendre(n)).first;
  return it->second;
}

template <typename T> struct QuadResult {
  T value{};
  double error = 0.0;
  int nodes = 0;
};

/// Fixed n-point rule on [a, b].
template <typename F> auto gauss_fixed(F &&f, double a, double b, int n) {
  const GaussRule &rule = gauss_legendre(n);
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  using T = decltype(f(a));
  T sum{};
  for (int i = 0; i < n; ++i)
    sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
  return sum * half;
}

/// Gauss-Legendre on [a, b], doubling the node count until two successive
/// values agree within the requested tolerance. The error estimate is the last
/// difference.
template <typename F> auto integrate(F &&f, double a, double b, const QuadratureSpec &spec) {
  using T = decltype(f(a));
  int n = spec.nodes;
  T prev = gauss_fixed(f, a, b, n);
  for (int d = 0; d < std::max(1, spec.max_doublings); ++d) {
    n *= 2;
    T cur = gauss_fixed(f, a, b, n);
    const double err = std::abs(cur - prev);
    if (err <= spec.tolerance * std::max(1.0, std::abs(cur)))
      return QuadResult<T>{cur, err, n};
    prev = cur;
  }
  throw NumericalFailure("quadrature did not converge on [" + std::to_string(a) + ", " + std::to_string(b) +
                         "] with " + std::to_string(n) + " nodes");
}

} // namespace wallsim
