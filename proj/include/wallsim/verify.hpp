#pragma once

// Grid sweeps over the exact identities, shared by the command line tool and
// the test suites.

#include <algorithm>
#include <functional>
#include <string>
#include <vector>

#include "kernels.hpp"
#include "lattice.hpp"
#include "projection.hpp"
#include "rational.hpp"

namespace wallsim {

struct PsameRow {
  int k = 0;
  Signature lambda;
  Signature beta;
  double p = 0.0;
  double t_closed = 0.0;
  double t_quad = 0.0;
};

struct PsameSummary {
  Rational max_exact_diff;   // max |P - T(closed)|, rational
  double max_quad_diff = 0.0; // max |T(closed) - T(quadrature)|
  double max_quad_error = 0.0;
  long long cases = 0;
};

/// P_k against T_k^φ on all pairs with parts <= cap, k = 1..k_max.
inline PsameSummary psame_grid(int k_max, int cap, const std::vector<Rational> &qs, const QuadratureSpec &spec = {},
                               const std::function<void(const PsameRow &)> &row_sink = {}) {
  PsameSummary out;
  for (const auto &q : qs) {
    const double qd = to_double(q);
    for (int k = 1; k <= k_max; ++k) {
      const auto states = enumerate_states(k, cap);
      const int max_degree = cap + particles_on_level(k) - 1;
      InnerProductTable table(qd, jacobi_param_for_level(k), max_degree, spec);
      out.max_quad_error = std::max(out.max_quad_error, table.max_error());
      for (const auto &lambda : states)
        for (const auto &beta : states) {
          const Rational p = p_kernel(lambda, beta, q);
          const Rational tc = t_kernel_closed(lambda, beta, q);
          Rational d = p - tc;
          if (d < 0)
            d = -d;
          if (d > out.max_exact_diff)
            out.max_exact_diff = d;
          const double tcd = to_double(tc);
          const double tq = t_kernel_quadrature(lambda, beta, table);
          out.max_quad_diff = std::max(out.max_quad_diff, std::abs(tcd - tq));
          ++out.cases;
          if (row_sink)
            row_sink({k, lambda, beta, to_double(p), tcd, tq});
        }
    }
  }
  return out;
}

struct ExactSummary {
  Rational max_residual;
  long long cases = 0;
};

/// Σ_{λ≺μ} s_{k-1}(λ) = s_k(μ) for k = 2..k_max, parts <= cap.
inline ExactSummary branching_grid(int k_max, int cap) {
  ExactSummary out;
  for (int k = 2; k <= k_max; ++k)
    for (const auto &mu : enumerate_states(k, cap)) {
      const Rational r = branching_check(mu);
      if (r > out.max_residual)
        out.max_residual = r;
      ++out.cases;
    }
  return out;
}

/// Σ_{z'} S_k(y, (z', y')) = P_k(y, y') for k = 1..k_max, parts <= cap.
inline ExactSummary sp_grid(int k_max, int cap, const Rational &q) {
  ExactSummary out;
  for (int k = 1; k <= k_max; ++k) {
    const auto states = enumerate_states(k, cap);
    for (const auto &y : states)
      for (const auto &yp : states) {
        const Rational r = sp_check(y, yp, q);
        if (r > out.max_residual)
          out.max_residual = r;
        ++out.cases;
      }
  }
  return out;
}

/// All four summation identities over every q.
inline ExactSummary keyidentity_all(int bound, const std::vector<Rational> &qs, std::vector<long long> *per_id = nullptr) {
  ExactSummary out;
  if (per_id)
    per_id->assign(4, 0);
  for (const auto &q : qs)
    for (int id = 1; id <= 4; ++id) {
      auto [worst, cases] = keyidentity_grid(id, bound, q);
      if (worst > out.max_residual)
        out.max_residual = worst;
      out.cases += cases;
      if (per_id)
        (*per_id)[id - 1] += cases;
    }
  return out;
}

} // namespace wallsim
