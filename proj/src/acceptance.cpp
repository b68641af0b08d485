#include "dicho/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "dicho/chebyshev.hpp"
#include "dicho/cost_model.hpp"
#include "dicho/engine.hpp"
#include "dicho/poisson.hpp"
#include "dicho/preliminary.hpp"
#include "dicho/tridiag.hpp"

namespace dicho {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

GeneralTridiagonal random_dominant_general(Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> off(-1.0, 1.0);
  std::uniform_real_distribution<double> margin(0.1, 2.0);
  std::vector<double> lo(static_cast<size_t>(n)), di(static_cast<size_t>(n)),
      up(static_cast<size_t>(n));
  for (Index i = 0; i < n; ++i) {
    lo[i] = (i > 0) ? off(rng) : 0.0;
    up[i] = (i + 1 < n) ? off(rng) : 0.0;
    const double sign = (off(rng) >= 0.0) ? 1.0 : -1.0;
    di[i] = sign * (std::abs(lo[i]) + std::abs(up[i]) + margin(rng));
  }
  return make_general(std::move(lo), std::move(di), std::move(up));
}

ToeplitzTridiagonal random_dominant_toeplitz(Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> off(-1.0, 1.0);
  std::uniform_real_distribution<double> margin(0.1, 2.0);
  ToeplitzTridiagonal t;
  t.n = n;
  t.t_minus = off(rng);
  t.t_plus = off(rng);
  if (std::abs(t.t_plus) < 0.05) t.t_plus = 0.5;  // keep the closed form applicable
  const double sign = (off(rng) >= 0.0) ? 1.0 : -1.0;
  t.t_zero = sign * (std::abs(t.t_minus) + std::abs(t.t_plus) + margin(rng));
  return t;
}

std::vector<double> random_rhs(Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> f(static_cast<size_t>(n));
  for (auto& x : f) x = dist(rng);
  return f;
}

double rel_inf_diff(std::span<const double> a, std::span<const double> b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num = std::max(num, std::abs(a[i] - b[i]));
    den = std::max(den, std::abs(b[i]));
  }
  return (den == 0.0) ? num : num / den;
}

bool rel_close(double a, double b, double tol) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-280});
  return std::abs(a - b) <= tol * scale;
}

struct Case {
  bool toeplitz;
  Index n;
  int p;
  std::uint64_t seed;
};

std::vector<Case> oracle_cases() {
  const Index sizes[] = {64, 1024, 8192};
  const int ranks[] = {1, 2, 3, 4, 8, 16};
  std::vector<Case> combos;
  for (int kind = 0; kind < 2; ++kind)
    for (Index n : sizes)
      for (int p : ranks) combos.push_back({kind == 1, n, p, 0});
  std::vector<Case> cases;
  for (int i = 0; i < 200; ++i) {
    Case c = combos[i % combos.size()];
    c.seed = 0x5eed0000u + static_cast<std::uint64_t>(i);
    cases.push_back(c);
  }
  return cases;
}

struct OracleRun {
  bool ok = true;
  std::string detail;
  std::vector<std::vector<double>> solutions;
};

OracleRun run_oracle_suite(fabric::Mode mode) {
  OracleRun out;
  for (const Case& c : oracle_cases()) {
    engine::SolveOptions opt;
    opt.mode = mode;
    SolveReport rep;
    GeneralTridiagonal a = c.toeplitz ? to_general(random_dominant_toeplitz(c.n, c.seed))
                                      : random_dominant_general(c.n, c.seed);
    const auto f = random_rhs(c.n, c.seed ^ 0xf00d);
    if (c.toeplitz) {
      rep = engine::dichotomy_solve(random_dominant_toeplitz(c.n, c.seed), f, c.p, opt);
    } else {
      rep = engine::dichotomy_solve(a, f, c.p, opt);
    }
    const auto x_ref = thomas_solve(a, f);
    const double rel = rel_inf_diff(rep.solution, x_ref);
    const double scale = matrix_inf_norm(a) * vector_inf_norm(rep.solution) + vector_inf_norm(f);
    const double res = residual_inf(a, rep.solution, f);
    if (rel > 1e-10 || res > 1e-11 * scale) {
      out.ok = false;
      std::ostringstream os;
      os << "case n=" << c.n << " p=" << c.p << (c.toeplitz ? " toeplitz" : " general")
         << " rel=" << rel << " res/scale=" << res / scale;
      out.detail = os.str();
      return out;
    }
    out.solutions.push_back(std::move(rep.solution));
  }
  return out;
}

// relative infinity-error between the two builds, per field family
bool aux_equal(const prelim::AuxVectors& a, const prelim::AuxVectors& b, double tol,
               std::string* why) {
  double g_scale = 0.0, g_diff = 0.0;
  for (std::size_t j = 0; j < a.gL.size(); ++j) {
    g_scale = std::max({g_scale, std::abs(b.gL[j]), std::abs(b.gR[j])});
    g_diff = std::max({g_diff, std::abs(a.gL[j] - b.gL[j]), std::abs(a.gR[j] - b.gR[j])});
  }
  if (g_diff > tol * g_scale) {
    *why = "green rows";
    return false;
  }
  double z_scale = 0.0, z_diff = 0.0;
  for (const auto& [i, v] : a.zL_at) {
    z_scale = std::max(z_scale, std::abs(b.zl(i)));
    z_diff = std::max(z_diff, std::abs(v - b.zl(i)));
  }
  for (const auto& [i, v] : a.zR_at) {
    z_scale = std::max(z_scale, std::abs(b.zr(i)));
    z_diff = std::max(z_diff, std::abs(v - b.zr(i)));
  }
  if (z_diff > tol * z_scale) {
    *why = "exterior values";
    return false;
  }
  if (!rel_close(a.ratio_first, b.ratio_first, tol) ||
      !rel_close(a.ratio_last, b.ratio_last, tol)) {
    *why = "ratios";
    return false;
  }
  return true;
}

CriterionResult criterion_oracle_equivalence() {
  CriterionResult r{1, "oracle equivalence (200 randomized systems)", true, "", 0.0};
  const auto t0 = Clock::now();
  const OracleRun run = run_oracle_suite(fabric::Mode::Deterministic);
  r.seconds = seconds_since(t0);
  r.pass = run.ok && r.seconds <= 60.0;
  r.detail = run.ok ? "rel <= 1e-10, residual <= 1e-11*scale" : run.detail;
  if (run.ok && r.seconds > 60.0) r.detail = "runtime budget exceeded";
  return r;
}

CriterionResult criterion_prelim_equality() {
  CriterionResult r{2, "preliminary-path equality (Chebyshev vs general)", true, "", 0.0};
  const auto t0 = Clock::now();
  const Index n = 8192;
  const double h = 1.0 / static_cast<double>(n + 1);
  std::string why;
  for (double lambda : {-1.0, 0.5, 100.0}) {
    for (int p : {4, 32}) {
      const auto layout = prelim::build_layout(n, p);
      const auto a = to_general(prelim::helmholtz_toeplitz(lambda, h, n));
      for (int rank = 0; rank < p; ++rank) {
        const auto cheb = prelim::prelim_helmholtz_cheb(lambda, h, n, layout, rank);
        const auto gen = prelim::prelim_general(a, layout, rank);
        if (!aux_equal(cheb, gen, 1e-10, &why)) {
          r.pass = false;
          std::ostringstream os;
          os << "mismatch at lambda=" << lambda << " p=" << p << " rank=" << rank << " ("
             << why << ")";
          r.detail = os.str();
          r.seconds = seconds_since(t0);
          return r;
        }
      }
    }
  }
  r.seconds = seconds_since(t0);
  if (r.seconds > 10.0) {
    r.pass = false;
    r.detail = "runtime budget exceeded";
  } else {
    r.detail = "all paths agree to 1e-10";
  }
  return r;
}

CriterionResult criterion_overflow_safety() {
  CriterionResult r{3, "overflow-safe Green endpoints at N = 1e6", true, "", 0.0};
  const auto t0 = Clock::now();
  const double x = 1.0005;
  const Index n = 1000000;
  const Index mesh = n + 1;
  const Index first = 250000, last = 500000;

  const Index n0 = n_overflow_threshold(x);
  if (n0 < 22000 || n0 > 23000) {
    r.pass = false;
    r.detail = "N_0 outside the expected band: " + std::to_string(n0);
    return r;
  }

  // independent log-domain oracle straight from the closed form
  const double eta = x + std::sqrt((x - 1.0) * (x + 1.0));
  const double log_eta = std::log(eta);
  const double log_s = std::log(2.0 * std::sqrt((x - 1.0) * (x + 1.0)));
  const auto log_u = [&](Index deg) {
    return static_cast<double>(deg + 1) * log_eta +
           std::log1p(-std::exp(-2.0 * static_cast<double>(deg + 1) * log_eta)) - log_s;
  };

  for (Index i : {first, (first + last) / 2, last}) {
    const auto [gl, gr] = prelim::green_endpoints_overflow_safe(x, n, first, last, i);
    if (!std::isfinite(gl) || !std::isfinite(gr)) {
      r.pass = false;
      r.detail = "endpoint value not finite";
      return r;
    }
    const Index i1 = i + 1, ml1 = first + 1, mr1 = last + 1;
    const double gl_exact =
        -std::exp(log_u(mesh - i1 - 1) + log_u(ml1 - 1) - log_u(mesh - 1));
    const double gr_exact =
        -std::exp(log_u(i1 - 1) + log_u(mesh - mr1 - 1) - log_u(mesh - 1));
    if (!rel_close(gl, gl_exact, 1e-10) || !rel_close(gr, gr_exact, 1e-10)) {
      r.pass = false;
      std::ostringstream os;
      os << "mismatch vs log-domain oracle at i=" << i << ": " << gl << " vs " << gl_exact;
      r.detail = os.str();
      return r;
    }
  }

  bool overflowed = false;
  try {
    (void)u_closed(mesh - 1, x);
  } catch (const SolverError& e) {
    overflowed = (e.kind() == Err::Overflow);
  }
  if (!overflowed) {
    r.pass = false;
    r.detail = "naive closed form unexpectedly stayed finite";
    return r;
  }
  r.seconds = seconds_since(t0);
  r.detail = "eta-form finite and 1e-10-accurate; naive path overflows; N_0=" +
             std::to_string(n0);
  return r;
}

CriterionResult criterion_chebyshev_suite() {
  CriterionResult r{4, "Chebyshev closed form vs recurrence", true, "", 0.0};
  const auto t0 = Clock::now();
  const double xs[] = {1.0,  -1.0,  1.0001, -1.0001, 1.5, -1.5,
                       2.0,  -2.0,  3.5,    -3.5,    5.0, -5.0};
  for (Index nn = 0; nn <= 500; ++nn) {
    for (double x : xs) {
      const double ax = std::abs(x);
      double log_val = 0.0;
      if (ax > 1.0) {
        const double s = 2.0 * std::sqrt((ax - 1.0) * (ax + 1.0));
        log_val = static_cast<double>(nn + 1) * std::log(ax + std::sqrt((ax - 1.0) * (ax + 1.0))) -
                  std::log(s);
      }
      if (ax > 1.0 && log_val >= 706.0 && log_val <= 713.0) continue;  // threshold band
      const bool representable = (ax == 1.0) || log_val < 706.0;
      if (representable) {
        const double rec = u_recurrence(nn, x);
        const double cls = u_closed(nn, x);
        const double tol = 1e-10 * std::max(1.0, std::abs(rec));
        if (std::abs(rec - cls) > tol) {
          r.pass = false;
          std::ostringstream os;
          os << "n=" << nn << " x=" << x << " rec=" << rec << " closed=" << cls;
          r.detail = os.str();
          return r;
        }
      } else {
        bool both = false;
        try {
          (void)u_closed(nn, x);
        } catch (const SolverError&) {
          try {
            (void)u_recurrence(nn, x);
          } catch (const SolverError&) {
            both = true;
          }
        }
        if (!both) {
          r.pass = false;
          r.detail = "overflow behaviour differs between paths";
          return r;
        }
      }
    }
    // exact limits at the interval ends
    const double expected = static_cast<double>(nn + 1);
    if (u_closed(nn, 1.0) != expected ||
        u_closed(nn, -1.0) != ((nn % 2 == 0) ? expected : -expected)) {
      r.pass = false;
      r.detail = "U_n(+-1) limit not exact at n=" + std::to_string(nn);
      return r;
    }
  }
  r.seconds = seconds_since(t0);
  r.detail = "agreement to 1e-10 wherever finite; exact +-1 limits";
  return r;
}

CriterionResult criterion_poisson() {
  CriterionResult r{5, "Poisson convergence order and p-invariance", true, "", 0.0};
  const auto t0 = Clock::now();
  poisson::PoissonOptions opt;
  const auto rows = poisson::convergence_study(0.0, 4, 5, 7, opt);  // h = 1/32, 1/64, 1/128
  std::ostringstream os;
  os << std::setprecision(4);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    os << "order(h=" << rows[i].h << ")=" << rows[i].order << ' ';
    if (std::abs(rows[i].order - 2.0) > 0.1) {
      r.pass = false;
      r.detail = "order outside 2.0 +- 0.1: " + os.str();
      return r;
    }
  }

  const Index n = 63;
  poisson::Grid2D f = poisson::make_grid(n);
  std::mt19937_64 rng(2026);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (auto& v : f.values) v = dist(rng);
  const auto u1 = poisson::poisson_solve(f, 0.0, 1, opt);
  const auto u4 = poisson::poisson_solve(f, 0.0, 4, opt);
  const auto u8 = poisson::poisson_solve(f, 0.0, 8, opt);
  const double d4 = rel_inf_diff(u4.values, u1.values);
  const double d8 = rel_inf_diff(u8.values, u1.values);
  if (d4 > 1e-10 || d8 > 1e-10) {
    r.pass = false;
    os << " p-invariance violated: " << d4 << ", " << d8;
    r.detail = os.str();
    return r;
  }
  r.seconds = seconds_since(t0);
  if (r.seconds > 120.0) {
    r.pass = false;
    r.detail = "runtime budget exceeded";
    return r;
  }
  os << " p-diff(4)=" << d4 << " p-diff(8)=" << d8;
  r.detail = os.str();
  return r;
}

CriterionResult criterion_error_monitor() {
  CriterionResult r{6, "error-bound monitor (gamma^l * eps)", true, "", 0.0};
  const auto t0 = Clock::now();

  prelim::AuxVectors synthetic;
  synthetic.zL_at[0] = 3.0;  // gamma = 3
  const auto [gamma, bound] = engine::error_monitor({synthetic}, 12);
  const double expect = std::pow(3.0, 12.0) * std::numeric_limits<double>::epsilon();
  if (gamma != 3.0 || bound != expect || std::abs(bound - 1.17e-10) > 0.02 * 1.17e-10) {
    r.pass = false;
    std::ostringstream os;
    os << "gamma=" << gamma << " bound=" << bound;
    r.detail = os.str();
    return r;
  }

  // dominant system: every used |Z| component obeys the maximum principle
  const auto a = random_dominant_general(4096, 77);
  engine::DichotomySolver solver(a, 8);
  const auto [g2, b2] = solver.monitor();
  if (g2 > 1.0) {
    r.pass = false;
    r.detail = "dominant system reported gamma > 1: " + std::to_string(g2);
    return r;
  }
  r.seconds = seconds_since(t0);
  std::ostringstream os;
  os << "bound=" << bound << ", dominant gamma=" << g2;
  r.detail = os.str();
  return r;
}

CriterionResult criterion_cost_model() {
  CriterionResult r{7, "communication cost model", true, "", 0.0};
  const auto t0 = Clock::now();
  CostParams params{0.0, 1.0, 1.0, 1.0, 1024};
  const auto est = cost_model(params);
  std::ostringstream os;
  os << std::setprecision(6) << "t_cyclic=" << est.t_cyclic << " t_dich=" << est.t_dichotomy;
  if (std::abs(est.t_cyclic - 40.0) > 1e-12 || std::abs(est.t_dichotomy - 27.0) > 0.05) {
    r.pass = false;
    r.detail = "substitution values off: " + os.str();
    return r;
  }
  // stated short form must stay within 5% of the full expression for p >= 256
  double worst = 0.0;
  int worst_p = 0;
  for (int p : {256, 512, 1024, 2048, 4096}) {
    CostParams q{0.0, 1.0, 1.0, 1.0, p};
    const double full = cost_model(q).t_dichotomy;
    const double approx = dichotomy_cost_approx(q);
    const double dev = std::abs(approx - full) / full;
    if (dev > worst) {
      worst = dev;
      worst_p = p;
    }
  }
  r.seconds = seconds_since(t0);
  if (worst > 0.05) {
    r.pass = false;
    os << "; approximation deviates " << worst * 100.0 << "% at p=" << worst_p
       << " (exceeds 5%)";
    r.detail = os.str();
    return r;
  }
  r.detail = os.str();
  return r;
}

CriterionResult criterion_determinism() {
  CriterionResult r{8, "bit-reproducibility and concurrent agreement", true, "", 0.0};
  const auto t0 = Clock::now();
  const OracleRun a = run_oracle_suite(fabric::Mode::Deterministic);
  const OracleRun b = run_oracle_suite(fabric::Mode::Deterministic);
  if (!a.ok || !b.ok) {
    r.pass = false;
    r.detail = "oracle suite failed during rerun";
    return r;
  }
  for (std::size_t i = 0; i < a.solutions.size(); ++i) {
    if (a.solutions[i].size() != b.solutions[i].size() ||
        std::memcmp(a.solutions[i].data(), b.solutions[i].data(),
                    a.solutions[i].size() * sizeof(double)) != 0) {
      r.pass = false;
      r.detail = "deterministic runs differ at case " + std::to_string(i);
      return r;
    }
  }
  const OracleRun c = run_oracle_suite(fabric::Mode::Concurrent);
  if (!c.ok) {
    r.pass = false;
    r.detail = "concurrent suite failed: " + c.detail;
    return r;
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < a.solutions.size(); ++i)
    worst = std::max(worst, rel_inf_diff(c.solutions[i], a.solutions[i]));
  if (worst > 1e-12) {
    r.pass = false;
    r.detail = "concurrent deviation " + std::to_string(worst);
    return r;
  }
  r.seconds = seconds_since(t0);
  std::ostringstream os;
  os << "bit-identical; concurrent deviation " << std::setprecision(3) << worst;
  r.detail = os.str();
  return r;
}

CriterionResult criterion_complexity() {
  CriterionResult r{9, "per-rank operation count O(N/p + log2 p)", true, "", 0.0};
  const auto t0 = Clock::now();
  const Index n = 1 << 16;
  std::ostringstream os;
  const auto t_ref = random_dominant_toeplitz(n, 4242);
  const auto f_ref = random_rhs(n, 99);
  const auto x_ref = thomas_solve(to_general(t_ref), f_ref);
  for (int p : {2, 3, 4, 8, 16, 32, 64}) {
    const auto t = random_dominant_toeplitz(n, 4242);
    engine::DichotomySolver solver(t, p);
    const auto f = random_rhs(n, 99);
    const auto rep = solver.solve(f);
    if (rel_inf_diff(rep.solution, x_ref) > 1e-10) {
      r.pass = false;
      r.detail = "solution diverged from the sequential oracle at p=" + std::to_string(p);
      return r;
    }
    const double counted = static_cast<double>(rep.ops_per_rank_max);
    // static count model of the engine's per-rank work
    const double model = 12.0 * std::ceil(static_cast<double>(n) / p) +
                         10.0 * prelim::dichotomy_levels(p) + p + 40.0;
    if (counted > 2.0 * model || counted < 0.5 * model) {
      r.pass = false;
      os << "p=" << p << " counted=" << counted << " model=" << model;
      r.detail = os.str();
      return r;
    }
    os << "p=" << p << ":" << counted / model << " ";
  }
  r.seconds = seconds_since(t0);
  r.detail = "counted/model ratios: " + os.str();
  return r;
}

}  // namespace

std::vector<CriterionResult> run_acceptance(std::ostream* progress) {
  std::vector<CriterionResult> results;
  const auto emit = [&](CriterionResult res) {
    if (progress) {
      (*progress) << (res.pass ? "PASS" : "FAIL") << "  [" << res.id << "] " << res.name
                  << " (" << std::fixed << std::setprecision(2) << res.seconds << " s) — "
                  << res.detail << '\n';
      progress->flush();
    }
    results.push_back(std::move(res));
  };
  emit(criterion_oracle_equivalence());
  emit(criterion_prelim_equality());
  emit(criterion_overflow_safety());
  emit(criterion_chebyshev_suite());
  emit(criterion_poisson());
  emit(criterion_error_monitor());
  emit(criterion_cost_model());
  emit(criterion_determinism());
  emit(criterion_complexity());
  return results;
}

}  // namespace dicho
