#pragma once

// Correlation kernel K_T of the fixed-time point process {(X̃^k_i(T), k)}.
//
//   K_T((s,k),(t,m)) = c_k (1/2πi) ∫_{-1}^{1} ∮ (φ(x)/φ(u))^T J_{s,a_k}(x) J_{t,a_m}(u)
//                        (1-x)^{r_k} / (1-u)^{r_m} w_k(x) / (x-u) du dx
//                    + 1{k>=m} c_k ∫ J_{s,a_k} J_{t,a_m} (1-x)^{r_k-r_m} w_k(x) dx
//
// with c_k w_k(x) dx = (2^{a_k+1/2}/π)(1-x)^{a_k}(1+x)^{1/2} dx and the
// u-contour a counterclockwise circle enclosing [-1, 1].
//
// Two evaluation routes:
//  * contour: both integrals by quadrature (trapezoid on the circle,
//    Gauss-Legendre in θ = arccos x). Loses all digits once (φ(x)/φ(u))^T
//    spans more than ~1e15, so it is for small T only.
//  * residue: the u-integral is done exactly. With g(u) = J_t(u) φ(u)^{-T},
//    a polynomial, (1/2πi)∮ g(u)/((1-u)^{r}(x-u)) du = -(g(x) - G_{r-1}(x))/(1-x)^{r}
//    where G_{r-1} is the degree r-1 Taylor polynomial of g at u = 1. The
//    -g(x) part cancels the indicator term for k >= m. Writing φ^{-1} = 1 + βw,
//    w = 1-x, β = 2q/(1-q)^2, what is left are binomial(T, βw/(1+βw))
//    probabilities, so the integrand is O(1) for every T.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "kernels.hpp"
#include "linalg.hpp"
#include "quadrature.hpp"

namespace wallsim {

/// A site (s, k): shifted coordinate s on level k.
struct SpacePoint {
  int s = 0;
  int k = 1;

  int r() const { return particles_on_level(k); }
  JacobiParam a() const { return jacobi_param_for_level(k); }
  std::string to_string() const { return "(" + std::to_string(s) + "," + std::to_string(k) + ")"; }
  friend bool operator==(const SpacePoint &, const SpacePoint &) = default;
};

inline void validate_point(const SpacePoint &p) {
  if (p.s < 0 || p.k < 1)
    throw std::invalid_argument("space point needs s >= 0 and k >= 1");
}

/// Parses "(s,k);(t,m);..." (parentheses and spaces optional).
inline std::vector<SpacePoint> parse_points(const std::string &text) {
  std::vector<SpacePoint> out;
  std::string cleaned;
  for (char c : text)
    if (c != '(' && c != ')' && c != ' ')
      cleaned += c;
  std::size_t start = 0;
  while (start < cleaned.size()) {
    std::size_t end = cleaned.find(';', start);
    if (end == std::string::npos)
      end = cleaned.size();
    const std::string item = cleaned.substr(start, end - start);
    const auto comma = item.find(',');
    if (comma == std::string::npos)
      throw std::invalid_argument("malformed point '" + item + "', expected s,k");
    SpacePoint p{std::stoi(item.substr(0, comma)), std::stoi(item.substr(comma + 1))};
    validate_point(p);
    out.push_back(p);
    start = end + 1;
  }
  return out;
}

enum class KernelRoute { residue, contour };

struct ContourSpec {
  double radius = 2.0;
  int x_nodes = 128;
  int u_nodes = 128;
  int max_doublings = 4;
  double tolerance = 1e-11;
  KernelRoute route = KernelRoute::residue;
};

struct KernelValue {
  std::complex<double> value;
  double error = 0.0;
};

namespace detail {

/// Coefficients of J_{t,a}(u) in powers of w = 1 - u. They alternate in sign
/// and grow like 4^i, hence the extended precision.
inline std::vector<long double> jacobi_coefficients_in_w(int t, JacobiParam a) {
  // J_{n+1} = 2(1-w) J_n - J_{n-1}
  std::vector<long double> prev{1.0L};
  if (t == 0)
    return prev;
  std::vector<long double> cur{a == JacobiParam::minus_half ? 1.0L : 2.0L, -2.0L};
  for (int n = 1; n < t; ++n) {
    std::vector<long double> next(cur.size() + 1, 0.0L);
    for (std::size_t i = 0; i < cur.size(); ++i) {
      next[i] += 2.0L * cur[i];
      next[i + 1] -= 2.0L * cur[i];
    }
    for (std::size_t i = 0; i < prev.size(); ++i)
      next[i] -= prev[i];
    prev = std::move(cur);
    cur = std::move(next);
  }
  return cur;
}

/// Σ_i c_i Σ_{n in range(i)} C(T,n) p^n (1-p)^{T-n} w^{i+shift}, where the
/// n-range is n < limit - i (lower part) or n >= limit - i (upper part).
/// Evaluated in log space so that negative shifts with tiny w stay finite.
inline double binomial_projection(const std::vector<long double> &coeffs, std::int64_t T, double w, double beta,
                                  long long limit, long long shift, bool lower) {
  if (w <= 0.0)
    return 0.0;
  const long double wl = w, bw = static_cast<long double>(beta) * wl;
  const long double log_bw = std::log(bw);
  const long double log_1pbw = std::log1p(bw);
  const long double log_w = std::log(wl);
  const long double Tl = static_cast<long double>(T);
  const long double lgT = std::lgamma(Tl + 1.0L);
  long double total = 0.0L;
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    if (coeffs[i] == 0.0L)
      continue;
    const long long cut = limit - static_cast<long long>(i);
    const long long n_lo = lower ? 0 : std::max<long long>(cut, 0);
    const long long n_hi = lower ? std::min<long long>(cut - 1, T) : T;
    long double partial = 0.0L;
    for (long long n = n_lo; n <= n_hi; ++n) {
      const long double nl = static_cast<long double>(n);
      const long double log_term = lgT - std::lgamma(nl + 1.0L) - std::lgamma(Tl - nl + 1.0L) + nl * log_bw -
                                   Tl * log_1pbw + static_cast<long double>(static_cast<long long>(i) + shift) * log_w;
      partial += std::exp(log_term);
    }
    total += coeffs[i] * partial;
  }
  return static_cast<double>(total);
}

inline KernelValue kernel_residue(std::int64_t T, const SpacePoint &p1, const SpacePoint &p2, double q,
                                  const ContourSpec &spec) {
  const JacobiParam ak = p1.a(), am = p2.a();
  const long long rk = p1.r(), rm = p2.r();
  const double beta = 2.0 * q / ((1.0 - q) * (1.0 - q));
  const auto coeffs = jacobi_coefficients_in_w(p2.s, am);
  const bool lower = p1.k >= p2.k;
  const double sign = lower ? 1.0 : -1.0;
  auto integrand = [&](double theta) {
    const double x = std::cos(theta);
    const double s = std::sin(0.5 * theta);
    const double w = 2.0 * s * s; // 1 - cos θ without cancellation
    return sign * theta_weight(ak, theta) * jacobi_eval(p1.s, ak, x) *
           binomial_projection(coeffs, T, w, beta, rm, rk - rm, lower);
  };
  QuadratureSpec qs{spec.x_nodes, spec.max_doublings, spec.tolerance};
  auto res = integrate(integrand, 0.0, std::numbers::pi, qs);
  return {res.value, res.error};
}

/// Contour route at fixed node counts.
inline std::complex<double> kernel_contour_fixed(std::int64_t T, const SpacePoint &p1, const SpacePoint &p2,
                                                 double q, double radius, int nx, int nu) {
  using cd = std::complex<double>;
  const JacobiParam ak = p1.a(), am = p2.a();
  const int rk = p1.r(), rm = p2.r();
  // u-contour samples (trapezoid on the circle)
  std::vector<cd> us(nu), gu(nu);
  for (int j = 0; j < nu; ++j) {
    const double psi = 2.0 * std::numbers::pi * (j + 0.5) / nu;
    const cd u = std::polar(radius, psi);
    us[j] = u;
    // g(u) u / (1-u)^{r_m}; du = i u dψ, 1/(2πi) du = u dψ / (2π)
    gu[j] = jacobi_eval(p2.s, am, u) * std::pow(phi_alpha(u, q), -static_cast<double>(T)) * u /
            std::pow(cd(1.0) - u, rm) / static_cast<double>(nu);
  }
  const GaussRule &rule = gauss_legendre(nx);
  const double half = 0.5 * std::numbers::pi;
  cd total = 0.0;
  for (int i = 0; i < nx; ++i) {
    const double theta = half + half * rule.nodes[i];
    const double x = std::cos(theta);
    cd inner = 0.0;
    for (int j = 0; j < nu; ++j)
      inner += gu[j] / (x - us[j]);
    double outer = std::pow(phi_alpha(x, q), static_cast<double>(T)) * jacobi_eval(p1.s, ak, x) *
                   std::pow(1.0 - x, rk) * theta_weight(ak, theta);
    double single = 0.0;
    if (p1.k >= p2.k)
      single = jacobi_eval(p1.s, ak, x) * jacobi_eval(p2.s, am, x) * std::pow(1.0 - x, rk - rm) *
               theta_weight(ak, theta);
    total += rule.weights[i] * half * (outer * inner + single);
  }
  return total;
}

inline KernelValue kernel_contour(std::int64_t T, const SpacePoint &p1, const SpacePoint &p2, double q,
                                  const ContourSpec &spec) {
  if (!(spec.radius > 1.0))
    throw std::invalid_argument("contour radius must exceed 1 to enclose [-1,1]");
  int nx = spec.x_nodes, nu = spec.u_nodes;
  auto prev = kernel_contour_fixed(T, p1, p2, q, spec.radius, nx, nu);
  for (int d = 0; d < std::max(1, spec.max_doublings); ++d) {
    nx *= 2;
    nu *= 2;
    auto cur = kernel_contour_fixed(T, p1, p2, q, spec.radius, nx, nu);
    const double err = std::abs(cur - prev);
    if (err <= spec.tolerance * std::max(1.0, std::abs(cur)))
      return {cur, err};
    prev = cur;
  }
  throw NumericalFailure("contour kernel did not converge for " + p1.to_string() + "," + p2.to_string() +
                         " T=" + std::to_string(T));
}

} // namespace detail

/// K_T((s,k),(t,m)). The residue route returns a real value (imaginary part
/// 0); the contour route reports whatever imaginary residue quadrature leaves.
inline KernelValue correlation_kernel(std::int64_t T, const SpacePoint &p1, const SpacePoint &p2, double q,
                                      const ContourSpec &spec = {}) {
  if (T < 0)
    throw std::invalid_argument("T must be >= 0");
  validate_point(p1);
  validate_point(p2);
  if (!(q > 0.0 && q < 1.0))
    throw std::invalid_argument("q must lie in (0,1)");
  if (spec.route == KernelRoute::contour)
    return detail::kernel_contour(T, p1, p2, q, spec);
  return detail::kernel_residue(T, p1, p2, q, spec);
}

/// Kernel matrix [K_T(p_i, p_j)] (real parts) and the largest error estimate.
inline std::pair<SquareMatrix<double>, double> kernel_matrix(std::int64_t T, const std::vector<SpacePoint> &points,
                                                             double q, const ContourSpec &spec = {}) {
  SquareMatrix<double> m(points.size());
  double err = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = 0; j < points.size(); ++j) {
      auto kv = correlation_kernel(T, points[i], points[j], q, spec);
      m(i, j) = kv.value.real();
      err = std::max(err, kv.error);
    }
  return {m, err};
}

/// det[K_T(p_i, p_j)]: the probability that every point is occupied.
inline double correlation_det(std::int64_t T, const std::vector<SpacePoint> &points, double q,
                              const ContourSpec &spec = {}) {
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j)
      if (points[i] == points[j])
        throw std::invalid_argument("correlation_det: points must be distinct");
  return determinant(kernel_matrix(T, points, q, spec).first);
}

} // namespace wallsim
