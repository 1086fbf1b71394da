// Acceptance run: one PASS/FAIL line per criterion, indented detail lines
// below it, exit status 1 if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include <wallsim/asymptotics.hpp>
#include <wallsim/correlation.hpp>
#include <wallsim/dynamics.hpp>
#include <wallsim/kernels.hpp>
#include <wallsim/projection.hpp>
#include <wallsim/stats.hpp>
#include <wallsim/verify.hpp>

#include "golden_step.hpp"

using namespace wallsim;

namespace {

struct Outcome {
  bool pass = false;
  std::vector<std::string> details;
  void note(const char *fmt, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, fmt, args...);
    details.emplace_back(buf);
  }
};

int failures = 0;

void criterion(int id, const char *title, double budget_seconds, const std::function<Outcome()> &body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception &e) {
    out.pass = false;
    out.note("exception: %s", e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = budget_seconds <= 0 || secs < budget_seconds;
  const bool pass = out.pass && in_time;
  failures += !pass;
  if (budget_seconds > 0)
    std::printf("CRITERION %d %s: %s (%.1f s, budget %.0f s)\n", id, pass ? "PASS" : "FAIL", title, secs,
                budget_seconds);
  else
    std::printf("CRITERION %d %s: %s (%.1f s)\n", id, pass ? "PASS" : "FAIL", title, secs);
  for (const auto &d : out.details)
    std::printf("    %s\n", d.c_str());
  if (!in_time)
    std::printf("    runtime budget exceeded\n");
  std::fflush(stdout);
}

// errors non-increasing along N, allowing quadrature-level noise
bool non_increasing(const std::vector<DiagnosticRow> &rows, double noise = 1e-8) {
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (rows[i].abs_err > rows[i - 1].abs_err + noise)
      return false;
  return true;
}

std::string error_trend(const std::vector<DiagnosticRow> &rows) {
  std::string s;
  for (const auto &r : rows) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%sN=%lld:%.3e", s.empty() ? "" : " ", static_cast<long long>(r.N), r.abs_err);
    s += buf;
  }
  return s;
}

Outcome golden_step() {
  Outcome o;
  const auto start = fixture::start();
  const auto half = left_half_step(start, fixture::draws());
  const auto next = right_half_step(start, half, fixture::draws());
  const bool h = to_simple(half) == fixture::half_simple();
  const bool n = to_simple(next) == fixture::next_simple();
  o.note("X(n+1/2) %s, X(n+1) %s", h ? "matches" : "differs", n ? "matches" : "differs");
  o.pass = h && n;
  return o;
}

Outcome same_kernels() {
  Outcome o;
  const auto s = psame_grid(5, 6, {Rational(1, 5), Rational(1, 2), Rational(4, 5)});
  o.note("pairs=%lld max|P-T_closed|=%s max|T_closed-T_quad|=%.3e (quadrature estimate %.1e)", s.cases,
         s.max_exact_diff.str().c_str(), s.max_quad_diff, s.max_quad_error);
  o.pass = s.max_exact_diff == 0 && s.max_quad_diff <= 1e-8;
  return o;
}

Outcome key_identities() {
  Outcome o;
  std::vector<long long> per_id;
  const auto s = keyidentity_all(8, {Rational(1, 4), Rational(1, 3), Rational(1, 2), Rational(2, 3)}, &per_id);
  o.note("cases=%lld (per identity %lld/%lld/%lld/%lld) max residual=%s", s.cases, per_id[0], per_id[1], per_id[2],
         per_id[3], s.max_residual.str().c_str());
  o.pass = s.max_residual == 0 && s.cases > 0;
  return o;
}

Outcome branching_and_sp() {
  Outcome o;
  const auto b = branching_grid(6, 6);
  o.note("branching: k<=6 parts<=6 cases=%lld residual=%s", b.cases, b.max_residual.str().c_str());
  bool ok = b.max_residual == 0;
  for (const auto &q : {Rational(1, 2), Rational(1, 3)}) {
    const auto s = sp_grid(4, 4, q);
    o.note("S marginal: k<=4 parts<=4 q=%s cases=%lld residual=%s", q.str().c_str(), s.cases,
           s.max_residual.str().c_str());
    ok = ok && s.max_residual == 0;
  }
  o.pass = ok;
  return o;
}

Outcome intertwining() {
  Outcome o;
  const Rational q(1, 50);
  bool ok = true;
  for (int k = 2; k <= 4; ++k) {
    const auto rep = intertwining_check(k, 5, q);
    o.note("k=%d M=5 q=1/50 rows=%lld conclusive=%lld entries=%lld residual(conclusive)=%s residual(all)=%s", k,
           rep.rows, rep.conclusive_rows, rep.entries, rep.max_residual_conclusive.str().c_str(),
           rep.max_residual.str().c_str());
    ok = ok && rep.conclusive_rows > 0 && rep.max_residual_conclusive == 0;
  }
  const auto half = intertwining_check(3, 5, Rational(1, 2), 1e-8, false);
  o.note("q=1/2 k=3 M=5: conclusive rows=%lld (smallest tail %.3f), residual over all entries=%s",
         half.conclusive_rows, half.best_tail, half.max_residual.str().c_str());
  o.pass = ok;
  return o;
}

Outcome markov_projection() {
  Outcome o;
  RunConfig cfg;
  cfg.q = 0.5;
  cfg.depth = 3;
  cfg.steps = 3;
  cfg.replicas = 1000000;
  cfg.seed = 20240601;
  bool ok = true;
  for (int k = 1; k <= 3; ++k) {
    const auto tables = empirical_level_laws(cfg, k);
    for (int n = 1; n <= 3; ++n) {
      double lost = 0.0;
      const auto exact = level_law_exact(k, n, cfg.q, 1e-15, &lost);
      const auto c = compare_law(tables[n - 1], exact);
      o.note("law k=%d n=%d states=%d TV=%.5f max|z|=%.2f", k, n, c.compared_states, c.total_variation,
             c.max_abs_z);
      ok = ok && c.total_variation <= 0.01 && c.max_abs_z <= 4.0;
    }
  }
  int entries = 0, exceed = 0;
  std::int64_t impossible = 0;
  double worst = 0.0;
  for (int k = 1; k <= 3; ++k)
    for (int n = 1; n <= 3; ++n) {
      const auto c = compare_transitions(empirical_transitions(cfg, k, n), k, cfg.q);
      entries += c.compared_entries;
      exceed += c.exceed_3sigma;
      impossible += c.impossible_count;
      worst = std::max(worst, c.max_abs_z);
    }
  const double threshold = familywise_threshold(entries);
  o.note("transitions k<=3 n<=3: entries=%d max|z|=%.2f familywise 3-sigma threshold=%.2f "
         "per-entry |z|>3: %d (expected by chance %.1f) impossible transitions=%lld",
         entries, worst, threshold, exceed, 0.0027 * entries, static_cast<long long>(impossible));
  o.pass = ok && worst <= threshold && impossible == 0;
  return o;
}

Outcome correlation_kernel_checks() {
  Outcome o;
  const double q = 0.5;
  bool ok = true;

  // level 1 is the reflected walk: iterate R on [0, 400)
  const int width = 400;
  std::vector<double> law(width, 0.0);
  law[0] = 1.0;
  double worst_oracle = 0.0;
  for (int T = 1; T <= 5; ++T) {
    std::vector<double> next(width, 0.0);
    for (int x = 0; x < width; ++x)
      if (law[x] > 0.0)
        for (int y = 0; y < width; ++y)
          next[y] += law[x] * r_kernel(x, y, q);
    law = next;
    for (int s = 0; s <= 10; ++s)
      worst_oracle = std::max(worst_oracle, std::abs(correlation_kernel(T, {s, 1}, {s, 1}, q).value.real() - law[s]));
  }
  o.note("1-point level 1 vs reflected-walk oracle, T<=5 s<=10: max diff=%.3e", worst_oracle);
  ok = ok && worst_oracle <= 1e-6;

  std::vector<SpacePoint> grid;
  for (int k = 1; k <= 3; ++k)
    for (int s = 0; s <= 5; ++s)
      grid.push_back({s, k});

  double worst_radius = 0.0;
  for (int T = 1; T <= 3; ++T)
    for (const auto &a : grid)
      for (const auto &b : grid) {
        const double ref = correlation_kernel(T, a, b, q).value.real();
        for (double radius : {1.5, 2.0, 3.0}) {
          ContourSpec spec;
          spec.route = KernelRoute::contour;
          spec.radius = radius;
          worst_radius = std::max(worst_radius, std::abs(correlation_kernel(T, a, b, q, spec).value - ref));
        }
      }
  o.note("contour radii {1.5,2,3} vs residue route, levels<=3 s<=5 T<=3: max diff=%.3e", worst_radius);
  ok = ok && worst_radius <= 1e-8;

  std::vector<std::vector<SpacePoint>> sets;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    sets.push_back({grid[i]});
    for (std::size_t j = i + 1; j < grid.size(); ++j)
      sets.push_back({grid[i], grid[j]});
  }
  RunConfig cfg;
  cfg.q = q;
  cfg.depth = 3;
  cfg.replicas = 10000000;
  cfg.seed = 77;
  std::vector<double> zs;
  int sparse = 0, exceed = 0;
  for (int T = 1; T <= 3; ++T) {
    const auto est = empirical_correlation(cfg, T, sets);
    for (std::size_t i = 0; i < sets.size(); ++i) {
      const double p = correlation_det(T, sets[i], q);
      const double n = static_cast<double>(est[i].replicas);
      if (n * p < 10.0 || n * (1.0 - p) < 10.0) {
        // expected count too small for a normal z; require the count itself to be plausible
        ++sparse;
        if (static_cast<double>(est[i].hits) > n * p + 10.0 * std::sqrt(n * p + 1.0) ||
            (p > 0.5 && static_cast<double>(est[i].replicas - est[i].hits) > n * (1 - p) + 10.0 * std::sqrt(n * (1 - p) + 1.0)))
          ok = false;
        continue;
      }
      const double z = (est[i].mean - p) / std::sqrt(p * (1.0 - p) / n);
      zs.push_back(z);
      exceed += std::abs(z) > 3.0;
    }
  }
  double worst_z = 0.0;
  for (double z : zs)
    worst_z = std::max(worst_z, std::abs(z));
  const double threshold = familywise_threshold(static_cast<std::int64_t>(zs.size()));
  o.note("det[K_T] vs 10^7 replicas, %zu sets x T<=3: compared=%zu sparse=%d max|z|=%.2f familywise 3-sigma "
         "threshold=%.2f per-set |z|>3: %d (expected by chance %.1f)",
         sets.size(), zs.size(), sparse, worst_z, threshold, exceed, 0.0027 * zs.size());
  ok = ok && worst_z <= threshold;
  o.pass = ok;
  return o;
}

Outcome asymptotics() {
  Outcome o;
  using JP = JacobiParam;
  bool ok = true;

  double worst_c = 0.0, worst_imag = 0.0;
  const std::vector<std::pair<PearceyPoint, PearceyPoint>> pairs{
      {{0.7, 0.3}, {0.7, 0.3}}, {{0.5, -0.4}, {1.1, 0.2}}, {{1.2, 0.6}, {0.3, -0.1}}};
  for (const auto &[p1, p2] : pairs) {
    const auto base = pearcey_kernel(p1, p2);
    worst_imag = std::max(worst_imag, base.imag_residue);
    for (double c : {0.5, 2.0})
      worst_c = std::max(worst_c, std::abs(pearcey_kernel(p1, p2, {}, c).value - base.value));
  }
  o.note("Pearcey c-substitution c in {0.5,2}: max diff=%.3e, imaginary residue=%.1e", worst_c, worst_imag);
  ok = ok && worst_c <= 1e-6 && worst_imag <= 1e-8;

  double worst_shift = 0.0;
  for (double u : {-0.5, 0.2, 0.9})
    for (auto a1 : {JP::minus_half, JP::plus_half})
      for (auto a2 : {JP::minus_half, JP::plus_half})
        worst_shift = std::max(worst_shift, std::abs(discrete_jacobi_kernel(5, a1, 2, 3, a2, 4, 0.5, u).value -
                                                     discrete_jacobi_kernel(2, a1, 2, 0, a2, 4, 0.5, u).value));
  o.note("discrete Jacobi (r1,r2)=(5,3) vs (2,0): max diff=%.3e", worst_shift);
  ok = ok && worst_shift <= 1e-12;

  double worst_ortho = 0.0;
  for (auto a : {JP::minus_half, JP::plus_half})
    for (int s = 0; s <= 6; ++s)
      for (int t = 0; t <= 6; ++t)
        worst_ortho = std::max(
            worst_ortho, std::abs(discrete_jacobi_kernel(3, a, s, 3, a, t, 0.5, -1.0 + 1e-14).value - (s == t)));
  o.note("orthonormality at u -> -1, s,t<=6: max deviation=%.3e", worst_ortho);
  ok = ok && worst_ortho <= 1e-10;

  const std::vector<std::int64_t> Ns{50, 100, 200};
  const std::vector<std::vector<PearceyPoint>> pearcey_sets{
      {{0.7, 0.3}, {0.7, -0.3}}, {{0.5, 0.0}, {1.5, 0.0}}, {{1.0, 0.5}, {0.5, -0.5}}};
  bool pearcey_trend = false;
  for (const auto &set : pearcey_sets) {
    const auto rows = convergence_diagnostic_pearcey(set, {JP::plus_half, JP::plus_half}, 0.5, Ns);
    const bool t = non_increasing(rows);
    pearcey_trend = pearcey_trend || t;
    o.note("Pearcey (%.1f,%.1f),(%.1f,%.1f): %s -> %s", set[0].nu, set[0].eta, set[1].nu, set[1].eta,
           error_trend(rows).c_str(), t ? "non-increasing" : "increasing");
  }
  ok = ok && pearcey_trend;

  bool jacobi_trend = false;
  struct JacobiSet {
    std::vector<int> s, r;
    std::vector<JP> a;
    double l;
  };
  const std::vector<JacobiSet> jacobi_sets{{{0}, {0}, {JP::plus_half}, 0.1},
                                           {{0, 1}, {0, 1}, {JP::plus_half, JP::minus_half}, 0.1},
                                           {{0}, {0}, {JP::plus_half}, 0.95}};
  for (const auto &js : jacobi_sets) {
    const auto rows = convergence_diagnostic_jacobi(js.s, js.r, js.a, 1.0, js.l, 0.5, Ns);
    const bool t = non_increasing(rows);
    jacobi_trend = jacobi_trend || t;
    o.note("Jacobi t=1 l=%.2f, %zu point(s): %s -> %s", js.l, js.s.size(), error_trend(rows).c_str(),
           t ? "non-increasing" : "increasing");
  }
  ok = ok && jacobi_trend;
  o.pass = ok;
  return o;
}

} // namespace

int main() {
  std::setvbuf(stdout, nullptr, _IONBF, 0);
  criterion(1, "golden step with injected draws", 1, golden_step);
  criterion(2, "P_k equals T_k (exact and quadrature)", 300, same_kernels);
  criterion(3, "capped-law summation identities", 60, key_identities);
  criterion(4, "branching rule and S_k marginal", 60, branching_and_sp);
  criterion(5, "intertwining L_k Q_k = S_k L_k", 600, intertwining);
  criterion(6, "one-level Markov projection (Monte Carlo)", 0, markov_projection);
  criterion(7, "correlation kernel", 0, correlation_kernel_checks);
  criterion(8, "asymptotic regimes", 1800, asymptotics);
  std::printf("%s: %d of 8 criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
