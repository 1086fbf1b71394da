#pragma once

// Limit kernels near the wall (symmetric Pearcey) and at fixed lattice
// positions (discrete Jacobi), with the maps from finite-N coordinates and
// determinant-level convergence tables.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "correlation.hpp"
#include "errors.hpp"
#include "kernels.hpp"
#include "linalg.hpp"
#include "quadrature.hpp"

namespace wallsim {

struct ScalingParams {
  double q = 0.5;
  double alpha = 2.0;
  double c_alpha = 0.0;
  double density = 0.0; // 1 - (1+α)^{-2}

  static ScalingParams from_q(double q) {
    if (!(q > 0.0 && q < 1.0))
      throw std::invalid_argument("q must lie in (0,1)");
    ScalingParams p;
    p.q = q;
    p.alpha = 2.0 * q / (1.0 - q);
    const double a1 = 1.0 + p.alpha;
    p.c_alpha = std::sqrt(p.alpha * (2.0 + p.alpha)) / (a1 * a1);
    p.density = 1.0 - 1.0 / (a1 * a1);
    return p;
  }

  /// θ = 1 + 2l / ((l - t)(2α + α²)); requires l != t.
  double theta(double t, double l) const {
    if (!(t > 0.0 && l > 0.0) || l == t)
      throw std::invalid_argument("theta needs t, l > 0 and l != t");
    return 1.0 + 2.0 * l / ((l - t) * (2.0 * alpha + alpha * alpha));
  }
};

// ---------------------------------------------------------------------------
// Symmetric Pearcey kernel

struct PearceyPoint {
  double nu = 0.0;
  double eta = 0.0;
};

struct PearceySpec {
  double y_cutoff = 20.0;      // |u| truncation on the imaginary axis (scaled by 1/c)
  double log_cutoff = 50.0;    // x truncated where the Gaussian factor drops by e^{-50}
  int outer_nodes = 128;
  int panel_nodes = 24;
  double panel_floor = 1e-12;  // innermost dyadic panel, relative to the x range
  int max_doublings = 4;
  double tolerance = 1e-10;
};

struct PearceyValue {
  double value = 0.0;
  double error = 0.0;
  double imag_residue = 0.0;
};

namespace detail {

/// The double-integral part at fixed node counts, as a complex number so that
/// the imaginary residue can be reported. Both halves of the imaginary axis
/// are integrated separately.
inline std::complex<double> pearcey_double_fixed(const PearceyPoint &p1, const PearceyPoint &p2, double c,
                                                 const PearceySpec &spec, int outer_n, int panel_n) {
  using cd = std::complex<double>;
  const double rc = std::sqrt(c);
  // x = t^2; keep t where c²x²/8 + cη₁x/2 stays within log_cutoff of its minimum
  const double shift = p1.eta < 0.0 ? 0.5 * p1.eta * p1.eta : 0.0;
  const double a2 = c * c / 8.0, a1 = c * p1.eta / 2.0, a0 = -(spec.log_cutoff + shift);
  const double x_max = (-a1 + std::sqrt(a1 * a1 - 4.0 * a2 * a0)) / (2.0 * a2);
  const double t_max = std::sqrt(x_max);

  const GaussRule &panel = gauss_legendre(panel_n);
  std::vector<double> ts, ws;
  for (double hi = t_max; hi > spec.panel_floor * t_max; hi *= 0.5) {
    const double lo = 0.5 * hi, half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
    for (int i = 0; i < panel_n; ++i) {
      const double t = mid + half * panel.nodes[i];
      const double x = t * t;
      const double f = std::exp(-c * c * x * x / 8.0 - c * p1.eta * x / 2.0) * std::sin(p1.nu * std::sqrt(2.0 * c) * t);
      ts.push_back(x);
      ws.push_back(panel.weights[i] * half * 2.0 * t * f);
    }
  }
  auto inner = [&](double y) {
    cd h = 0.0;
    const cd u(0.0, y);
    for (std::size_t i = 0; i < ts.size(); ++i)
      h += ws[i] / (u - ts[i]);
    return h;
  };
  auto g = [&](cd u) -> cd {
    const cd z = std::sqrt(u);
    if (std::abs(z) < 1e-300)
      return p2.nu * std::sqrt(2.0 * c);
    return std::sin(p2.nu * std::sqrt(2.0 * c) * z) / z;
  };
  // y = ±σ², σ ∈ [0, sqrt(Y/c)]
  const double s_max = std::sqrt(spec.y_cutoff / c);
  const GaussRule &outer = gauss_legendre(outer_n);
  const double half = 0.5 * s_max;
  cd total = 0.0;
  for (int j = 0; j < outer_n; ++j) {
    const double sigma = half + half * outer.nodes[j];
    for (double sgn : {1.0, -1.0}) {
      const double y = sgn * sigma * sigma;
      const cd u(0.0, y);
      const cd e = std::exp(cd(-c * c * y * y / 8.0, c * p2.eta * y / 2.0));
      total += outer.weights[j] * half * 2.0 * sigma * e * g(u) * rc * inner(y);
    }
  }
  return total * (std::numbers::sqrt2 / (2.0 * std::numbers::pi * std::numbers::pi));
}

} // namespace detail

/// Indicator term 1{η₂<η₁}(π(η₁-η₂))^{-1/2}(e^{(ν₁+ν₂)²/(η₂-η₁)} + e^{(ν₁-ν₂)²/(η₂-η₁)}).
inline double pearcey_gaussian_term(const PearceyPoint &p1, const PearceyPoint &p2) {
  if (!(p2.eta < p1.eta))
    return 0.0;
  const double d = p2.eta - p1.eta;
  const double sp = p1.nu + p2.nu, sm = p1.nu - p2.nu;
  return (std::exp(sp * sp / d) + std::exp(sm * sm / d)) / std::sqrt(std::numbers::pi * (p1.eta - p2.eta));
}

/// 𝒦((ν₁,η₁),(ν₂,η₂)) evaluated with the integration variables scaled by c
/// (c = 1 is the unscaled integral; every c > 0 gives the same value).
inline PearceyValue pearcey_kernel(const PearceyPoint &p1, const PearceyPoint &p2, const PearceySpec &spec = {},
                                   double c = 1.0) {
  if (p1.nu < 0.0 || p2.nu < 0.0)
    throw std::invalid_argument("Pearcey kernel needs nu >= 0");
  if (!(c > 0.0))
    throw std::invalid_argument("substitution constant must be positive");
  PearceyValue out;
  const double gauss = pearcey_gaussian_term(p1, p2);
  if (p1.nu == 0.0 || p2.nu == 0.0) {
    out.value = gauss;
    return out;
  }
  int no = spec.outer_nodes, np = spec.panel_nodes;
  auto prev = detail::pearcey_double_fixed(p1, p2, c, spec, no, np);
  for (int d = 0; d < std::max(1, spec.max_doublings); ++d) {
    no *= 2;
    np *= 2;
    auto cur = detail::pearcey_double_fixed(p1, p2, c, spec, no, np);
    const double err = std::abs(cur - prev);
    if (err <= spec.tolerance * std::max(1.0, std::abs(cur))) {
      out.value = cur.real() + gauss;
      out.error = err;
      out.imag_residue = std::abs(cur.imag());
      return out;
    }
    prev = cur;
  }
  throw NumericalFailure("Pearcey kernel did not converge");
}

// ---------------------------------------------------------------------------
// Discrete Jacobi kernel

/// L(r₁,a₁,s₁,r₂,a₂,s₂,b;u): the [u,1] integral when 2r₁+a₁ >= 2r₂+a₂, minus
/// the [-1,u] integral otherwise. Computed in θ = arccos x.
inline QuadResult<double> discrete_jacobi_kernel(int r1, JacobiParam a1, int s1, int r2, JacobiParam a2, int s2,
                                                 double b, double u, const QuadratureSpec &spec = {}) {
  if (!(u > -1.0 && u < 1.0))
    throw std::invalid_argument("discrete Jacobi kernel needs -1 < u < 1");
  if (s1 < 0 || s2 < 0)
    throw std::invalid_argument("polynomial degrees must be >= 0");
  const double av1 = jacobi_a(a1), av2 = jacobi_a(a2);
  const int d = r1 - r2;
  const bool upper = 2.0 * r1 + av1 >= 2.0 * r2 + av2;
  const double pref = std::pow(2.0, av1 + 0.5) / std::numbers::pi;
  // (x-1)^d (1-x)^{a₁} (1+x)^b dx = (-1)^d (1-x)^{d+a₁} (1+x)^b sinθ dθ, with
  // 1-x = 2 sin²(θ/2), 1+x = 2 cos²(θ/2), sinθ = 2 sin(θ/2) cos(θ/2)
  auto f = [&](double theta) {
    const double sh = std::sin(0.5 * theta), ch = std::cos(0.5 * theta);
    const double x = std::cos(theta);
    const double w = std::pow(2.0 * sh * sh, d + av1 + 0.5) * std::pow(2.0 * ch * ch, b + 0.5);
    return jacobi_eval(s1, a1, x) * jacobi_eval(s2, a2, x) * w;
  };
  const double tu = std::acos(u);
  const double sign = (d % 2 == 0 ? 1.0 : -1.0) * (upper ? 1.0 : -1.0);
  auto res = upper ? integrate(f, 0.0, tu, spec) : integrate(f, tu, std::numbers::pi, spec);
  res.value *= sign * pref;
  res.error *= pref;
  return res;
}

// ---------------------------------------------------------------------------
// Finite-N maps and convergence tables

struct LatticeSite {
  int s = 0;
  int r = 0;
  JacobiParam a = JacobiParam::plus_half;
  /// k = 2r + a - 1/2
  int level() const { return 2 * r + (a == JacobiParam::plus_half ? 0 : -1); }
};

struct PearceyMapped {
  std::vector<LatticeSite> sites;
  std::int64_t T = 0;
  double scale = 1.0;                   // N^{1/4} c_α^{-1/2}
  std::vector<PearceyPoint> effective;  // limit coordinates implied by the rounded sites
};

/// s = round(ν c^{1/2} N^{1/4}), r = round((1-(1+α)^{-2})N + c η √N), T = N.
inline PearceyMapped scaling_map_pearcey(const std::vector<PearceyPoint> &points, const std::vector<JacobiParam> &as,
                                         std::int64_t N, double q) {
  if (N < 1)
    throw std::invalid_argument("N must be >= 1");
  if (as.size() != points.size())
    throw std::invalid_argument("one Jacobi parameter per point required");
  const auto sp = ScalingParams::from_q(q);
  const double n = static_cast<double>(N);
  const double s_scale = std::sqrt(sp.c_alpha) * std::pow(n, 0.25);
  PearceyMapped out;
  out.T = N;
  out.scale = std::pow(n, 0.25) / std::sqrt(sp.c_alpha);
  for (std::size_t i = 0; i < points.size(); ++i) {
    LatticeSite site;
    site.s = static_cast<int>(std::lround(points[i].nu * s_scale));
    site.r = static_cast<int>(std::lround(sp.density * n + sp.c_alpha * points[i].eta * std::sqrt(n)));
    site.a = as[i];
    if (site.s < 0 || site.r < 0 || site.level() < 1)
      throw std::invalid_argument("scaling map gives a negative coordinate at N=" + std::to_string(N));
    out.sites.push_back(site);
    out.effective.push_back({site.s / s_scale, (site.r - sp.density * n) / (sp.c_alpha * std::sqrt(n))});
  }
  return out;
}

struct DiagnosticRow {
  std::int64_t N = 0;
  double det_finite = 0.0;
  double det_limit = 0.0;
  double abs_err = 0.0;
};

inline double finite_det(std::int64_t T, const std::vector<LatticeSite> &sites, double q, double scale,
                         const ContourSpec &spec) {
  std::vector<SpacePoint> pts;
  for (const auto &s : sites)
    pts.push_back({s.s, s.level()});
  auto [m, err] = kernel_matrix(T, pts, q, spec);
  (void)err;
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m.size(); ++j)
      m(i, j) *= scale;
  return determinant(m);
}

/// Det of the scaled finite-N kernel against det 𝒦 at the effective limit
/// points, for each N.
inline std::vector<DiagnosticRow> convergence_diagnostic_pearcey(const std::vector<PearceyPoint> &points,
                                                                 const std::vector<JacobiParam> &as, double q,
                                                                 const std::vector<std::int64_t> &Ns,
                                                                 const ContourSpec &cspec = {},
                                                                 const PearceySpec &pspec = {}) {
  std::vector<DiagnosticRow> rows;
  for (auto N : Ns) {
    const auto mapped = scaling_map_pearcey(points, as, N, q);
    DiagnosticRow row;
    row.N = N;
    row.det_finite = finite_det(mapped.T, mapped.sites, q, mapped.scale, cspec);
    SquareMatrix<double> lim(points.size());
    for (std::size_t i = 0; i < points.size(); ++i)
      for (std::size_t j = 0; j < points.size(); ++j)
        lim(i, j) = pearcey_kernel(mapped.effective[i], mapped.effective[j], pspec).value;
    row.det_limit = determinant(lim);
    row.abs_err = std::abs(row.det_finite - row.det_limit);
    rows.push_back(row);
  }
  return rows;
}

/// Bulk regime: T = round(tN), r_i = round(lN) + offset_i, fixed s_i. The limit
/// is 1 when l >= (1-(1+α)^{-2})t and det[L(...; 1/2; θ)] otherwise.
inline std::vector<DiagnosticRow>
convergence_diagnostic_jacobi(const std::vector<int> &s_list, const std::vector<int> &r_offsets,
                              const std::vector<JacobiParam> &as, double t, double l, double q,
                              const std::vector<std::int64_t> &Ns, const ContourSpec &cspec = {},
                              const QuadratureSpec &qspec = {}) {
  const std::size_t n = s_list.size();
  if (r_offsets.size() != n || as.size() != n || n == 0)
    throw std::invalid_argument("s list, r offsets and Jacobi parameters must have equal nonzero length");
  const auto sp = ScalingParams::from_q(q);
  double det_limit = 1.0;
  if (l < sp.density * t) {
    const double theta = sp.theta(t, l);
    SquareMatrix<double> lim(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        lim(i, j) = discrete_jacobi_kernel(r_offsets[i], as[i], s_list[i], r_offsets[j], as[j], s_list[j], 0.5,
                                           theta, qspec)
                        .value;
    det_limit = determinant(lim);
  }
  std::vector<DiagnosticRow> rows;
  for (auto N : Ns) {
    const std::int64_t T = std::llround(t * static_cast<double>(N));
    const long long base = std::llround(l * static_cast<double>(N));
    std::vector<LatticeSite> sites;
    for (std::size_t i = 0; i < n; ++i) {
      LatticeSite site{s_list[i], static_cast<int>(base + r_offsets[i]), as[i]};
      if (site.s < 0 || site.r < 0 || site.level() < 1)
        throw std::invalid_argument("bulk map gives an invalid site at N=" + std::to_string(N));
      sites.push_back(site);
    }
    DiagnosticRow row;
    row.N = N;
    row.det_finite = finite_det(T, sites, q, 1.0, cspec);
    row.det_limit = det_limit;
    row.abs_err = std::abs(row.det_finite - det_limit);
    rows.push_back(row);
  }
  return rows;
}

} // namespace wallsim
