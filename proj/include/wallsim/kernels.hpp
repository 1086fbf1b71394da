#pragma once

// Single-level transition kernels. Everything that is a finite sum or a
// closed form is templated on the scalar, so the identities between the
// Pieri-sum kernel P_k and the Jacobi determinant kernel T_k can be checked
// exactly with Rational and approximately with double.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <numbers>
#include <stdexcept>
#include <type_traits>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "lattice.hpp"
#include "linalg.hpp"
#include "quadrature.hpp"
#include "rational.hpp"

namespace wallsim {

/// a_k: -1/2 on odd levels, +1/2 on even levels.
enum class JacobiParam { minus_half, plus_half };

constexpr JacobiParam jacobi_param_for_level(int k) {
  return k % 2 == 1 ? JacobiParam::minus_half : JacobiParam::plus_half;
}

constexpr double jacobi_a(JacobiParam a) { return a == JacobiParam::minus_half ? -0.5 : 0.5; }

/// q together with α = 2q/(1-q).
struct AlphaParam {
  double q;
  explicit AlphaParam(double q_) : q(q_) {
    if (!(q > 0.0 && q < 1.0))
      throw std::invalid_argument("q must lie in (0,1)");
  }
  double alpha() const { return 2.0 * q / (1.0 - q); }
  static AlphaParam from_alpha(double alpha) { return AlphaParam(alpha / (2.0 + alpha)); }
};

template <typename Scalar> Scalar from_rational(const Rational &r) {
  if constexpr (std::is_same_v<Scalar, Rational>)
    return r;
  else
    return static_cast<Scalar>(to_double(r));
}

// ---------------------------------------------------------------------------
// Reflection kernel

/// R(x,y) = (1-q)/(1+q) (q^|x-y| + q^(x+y+1)), the law of {x + ξ1 - ξ2}.
template <typename Scalar> Scalar r_kernel(long long x, long long y, const Scalar &q) {
  return (Scalar(1) - q) / (Scalar(1) + q) * (ipow(q, std::llabs(x - y)) + ipow(q, x + y + 1));
}

// ---------------------------------------------------------------------------
// Dimension functions

/// s_k(λ), exact. Half-integer l', m' are handled as doubled odd integers.
inline Rational s_dim(const Signature &lambda) {
  const int k = lambda.level();
  const int r = lambda.length();
  Rational result(1);
  if (k % 2 == 0) {
    for (int i = 0; i < r; ++i) {
      const long long li = lambda[i] + (r - (i + 1)) + 1;
      const long long mi = (r - (i + 1)) + 1;
      for (int j = i + 1; j < r; ++j) {
        const long long lj = lambda[j] + (r - (j + 1)) + 1;
        const long long mj = (r - (j + 1)) + 1;
        result *= Rational(li * li - lj * lj) / Rational(mi * mi - mj * mj);
      }
      result *= Rational(li) / Rational(mi);
    }
  } else {
    for (int i = 0; i < r; ++i) {
      const long long li = 2 * (lambda[i] + (r - (i + 1)) + 1) - 1;
      const long long mi = 2 * ((r - (i + 1)) + 1) - 1;
      for (int j = i + 1; j < r; ++j) {
        const long long lj = 2 * (lambda[j] + (r - (j + 1)) + 1) - 1;
        const long long mj = 2 * ((r - (j + 1)) + 1) - 1;
        result *= Rational(li * li - lj * lj) / Rational(mi * mi - mj * mj);
      }
    }
  }
  return result;
}

/// Calls f(λ) for every level-(k-1) signature λ ≺ μ, where μ is on level k.
template <typename F> void for_each_interlacing_below(const Signature &mu, F &&f) {
  const int k = mu.level();
  if (k < 2)
    throw std::invalid_argument("no level below level 1");
  const int r = particles_on_level(k - 1);
  std::vector<int> parts(r);
  auto rec = [&](auto &&self, int i) -> void {
    if (i == r) {
      f(Signature(k - 1, parts));
      return;
    }
    const int lo = i + 1 < mu.length() ? mu[i + 1] : 0;
    for (int v = lo; v <= mu[i]; ++v) {
      parts[i] = v;
      self(self, i + 1);
    }
  };
  rec(rec, 0);
}

/// |Σ_{λ≺μ} s_{k-1}(λ) - s_k(μ)|, exactly.
inline Rational branching_check(const Signature &mu) {
  Rational sum(0);
  for_each_interlacing_below(mu, [&](const Signature &lambda) { sum += s_dim(lambda); });
  Rational diff = sum - s_dim(mu);
  return diff < 0 ? Rational(-diff) : diff;
}

// ---------------------------------------------------------------------------
// Interlacing determinant

/// det[1{λ_j - j + r >= c_i - i + r}]; equals 1 iff c ≺ λ (equal lengths).
inline int interlacing_det(std::span<const int> c, std::span<const int> lambda) {
  if (c.size() != lambda.size())
    throw std::invalid_argument("interlacing_det: equal lengths required");
  const std::size_t r = c.size();
  SquareMatrix<Rational> m(r);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < r; ++j)
      m(i, j) = (lambda[j] - static_cast<int>(j)) >= (c[i] - static_cast<int>(i)) ? 1 : 0;
  return determinant(m).convert_to<int>();
}

// ---------------------------------------------------------------------------
// Pieri-sum kernel

/// P_k(λ, β) without the factor s_k(β)/s_k(λ). The sum over c ≺ λ, β
/// factorizes because the admissible range of c_i is
/// [max(λ_{i+1}, β_{i+1}), min(λ_i, β_i)] independently of the other
/// coordinates. On odd levels the last parts move by R.
template <typename Scalar> Scalar p_kernel_bare(const Signature &lambda, const Signature &beta, const Scalar &q) {
  const int k = lambda.level();
  if (beta.level() != k)
    throw std::invalid_argument("p_kernel: signatures on different levels");
  const int rk = lambda.length();
  const int r = k % 2 == 0 ? rk : rk - 1; // number of summed coordinates
  Scalar sum(1);
  for (int i = 0; i < r; ++i) {
    const int hi = std::min(lambda[i], beta[i]);
    const int lo = i + 1 < rk ? std::max(lambda[i + 1], beta[i + 1]) : 0;
    if (lo > hi)
      return Scalar(0);
    Scalar term(0);
    for (int c = lo; c <= hi; ++c)
      term += ipow(q, static_cast<long long>(lambda[i]) + beta[i] - 2LL * c);
    sum *= term;
  }
  Scalar result = ipow(Scalar(1) - q, 2LL * r) * sum;
  if (k % 2 == 1)
    result *= r_kernel(lambda[rk - 1], beta[rk - 1], q);
  return result;
}

/// P_k(λ, β).
template <typename Scalar> Scalar p_kernel(const Signature &lambda, const Signature &beta, const Scalar &q) {
  Scalar bare = p_kernel_bare(lambda, beta, q);
  if (bare == Scalar(0))
    return bare;
  return bare * from_rational<Scalar>(s_dim(beta) / s_dim(lambda));
}

/// Both sides of (1-q)^2 Σ_{c=0}^{min(λ,β)} q^{λ+β-2c} = (1-q)/(1+q)(q^|λ-β| - q^{λ+β+2}).
template <typename Scalar>
std::pair<Scalar, Scalar> geometric_sum_identity(long long lambda, long long beta, const Scalar &q) {
  Scalar lhs(0);
  for (long long c = 0; c <= std::min(lambda, beta); ++c)
    lhs += ipow(q, lambda + beta - 2 * c);
  lhs *= (Scalar(1) - q) * (Scalar(1) - q);
  Scalar rhs = (Scalar(1) - q) / (Scalar(1) + q) * (ipow(q, std::llabs(lambda - beta)) - ipow(q, lambda + beta + 2));
  return {lhs, rhs};
}

// ---------------------------------------------------------------------------
// Jacobi polynomials and the weight

/// J_{s,a}(x) by J_{n+1} = 2x J_n - J_{n-1}; J_0 = 1, J_1 = 2x (a = 1/2) or
/// 2x - 1 (a = -1/2). Works for real and complex x.
template <typename T> T jacobi_eval(int s, JacobiParam a, const T &x) {
  if (s < 0)
    throw std::invalid_argument("jacobi_eval: degree must be >= 0");
  T prev = T(1);
  if (s == 0)
    return prev;
  T cur = T(2) * x - (a == JacobiParam::minus_half ? T(1) : T(0));
  for (int n = 1; n < s; ++n) {
    T next = T(2) * x * cur - prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

/// φ(x) = (1-q)^2 / (1 + q^2 - 2qx).
template <typename T> T phi_alpha(const T &x, double q) {
  const T denom = T(1 + q * q) - T(2 * q) * x;
  if (std::abs(denom) < 1e-300)
    throw std::invalid_argument("phi_alpha: pole at x = (1+q^2)/(2q)");
  return T((1 - q) * (1 - q)) / denom;
}

/// Closed form of <J_{s,a}, J_{t,a} φ>_a.
template <typename Scalar> Scalar inner_product_closed(long long s, long long t, JacobiParam a, const Scalar &q) {
  const Scalar pre = (Scalar(1) - q) / (Scalar(1) + q);
  if (a == JacobiParam::minus_half)
    return pre * (ipow(q, s + t + 1) + ipow(q, std::llabs(s - t)));
  return pre * (ipow(q, std::llabs(s - t)) - ipow(q, s + t + 2));
}

/// (2^{a+1/2}/π)(1-x)^a(1+x)^{1/2} dx/dθ at x = cos θ, for a = ±1/2.
/// Both are smooth in θ: (1 + cos θ)/π and (2/π) sin^2 θ.
inline double theta_weight(JacobiParam a, double theta) {
  if (a == JacobiParam::minus_half)
    return (1.0 + std::cos(theta)) / std::numbers::pi;
  const double s = std::sin(theta);
  return 2.0 / std::numbers::pi * s * s;
}

/// <f, g>_a = (2^{a+1/2}/π) ∫_{-1}^1 f g (1-x)^a (1+x)^{1/2} dx via x = cos θ.
template <typename F, typename G>
QuadResult<double> weighted_inner_product(F &&f, G &&g, JacobiParam a, const QuadratureSpec &spec = {}) {
  auto integrand = [&](double theta) {
    const double x = std::cos(theta);
    return f(x) * g(x) * theta_weight(a, theta);
  };
  return integrate(integrand, 0.0, std::numbers::pi, spec);
}

// ---------------------------------------------------------------------------
// Determinantal kernel

enum class TMode { closed, quadrature };

/// T_k^φ(λ, μ) with closed-form inner products.
template <typename Scalar> Scalar t_kernel_closed(const Signature &lambda, const Signature &mu, const Scalar &q) {
  const int k = lambda.level();
  const JacobiParam a = jacobi_param_for_level(k);
  const auto ls = lambda.shifted(), ms = mu.shifted();
  const std::size_t r = ls.size();
  SquareMatrix<Scalar> m(r);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < r; ++j)
      m(i, j) = inner_product_closed<Scalar>(ls[i], ms[j], a, q);
  return determinant(m) * from_rational<Scalar>(s_dim(mu) / s_dim(lambda));
}

/// Table of <J_s, J_t φ>_a by quadrature, for s, t <= max_degree.
class InnerProductTable {
public:
  InnerProductTable(double q, JacobiParam a, int max_degree, const QuadratureSpec &spec = {})
      : size_(max_degree + 1), values_(size_ * size_) {
    for (int s = 0; s <= max_degree; ++s)
      for (int t = s; t <= max_degree; ++t) {
        auto res = weighted_inner_product([&](double x) { return jacobi_eval(s, a, x); },
                                          [&](double x) { return jacobi_eval(t, a, x) * phi_alpha(x, q); }, a, spec);
        values_[s * size_ + t] = values_[t * size_ + s] = res.value;
        max_error_ = std::max(max_error_, res.error);
      }
  }
  double operator()(int s, int t) const { return values_.at(s * size_ + t); }
  int max_degree() const { return size_ - 1; }
  double max_error() const { return max_error_; }

private:
  int size_;
  std::vector<double> values_;
  double max_error_ = 0.0;
};

/// T_k^φ(λ, μ) with quadrature inner products from a precomputed table.
inline double t_kernel_quadrature(const Signature &lambda, const Signature &mu, const InnerProductTable &table) {
  const auto ls = lambda.shifted(), ms = mu.shifted();
  const std::size_t r = ls.size();
  SquareMatrix<double> m(r);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < r; ++j)
      m(i, j) = table(ls[i], ms[j]);
  return determinant(m) * to_double(s_dim(mu) / s_dim(lambda));
}

/// T_k^φ(λ, μ) in double precision, either mode.
inline double t_kernel(const Signature &lambda, const Signature &mu, double q, TMode mode,
                       const QuadratureSpec &spec = {}) {
  if (mode == TMode::closed)
    return t_kernel_closed<double>(lambda, mu, q);
  const int deg = std::max(lambda.shifted().front(), mu.shifted().front());
  InnerProductTable table(q, jacobi_param_for_level(lambda.level()), deg, spec);
  return t_kernel_quadrature(lambda, mu, table);
}

} // namespace wallsim
