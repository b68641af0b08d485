#include "dicho/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dicho::engine {

using prelim::AuxVectors;
using prelim::BlockLayout;

std::pair<double, double> compute_betas(std::span<const double> block_f, const AuxVectors& aux) {
  const std::size_t block = aux.gL.size();
  if (block_f.size() != block) raise(Err::Config, "block slice length mismatch");
  double bl = 0.0, br = 0.0;
  for (std::size_t j = 0; j < block; ++j) {
    bl += block_f[j] * aux.gL[j];
    br += block_f[j] * aux.gR[j];
  }
  return {bl, br};
}

std::pair<double, double> boundary_solve(double xi_r, double xi_l, double beta_l, double beta_r,
                                         const AuxVectors& aux) {
  if (!std::isfinite(aux.ratio_first) || !std::isfinite(aux.ratio_last))
    raise(Err::NonFiniteRatio, "boundary transfer ratio is not finite", aux.rank);
  const double x_first = xi_r + xi_l * aux.ratio_first + beta_l;
  const double x_last = xi_r * aux.ratio_last + xi_l + beta_r;
  return {x_first, x_last};
}

std::pair<double, double> error_monitor(const std::vector<AuxVectors>& aux, int levels) {
  double gamma = 0.0;
  for (const auto& a : aux) {
    for (const auto& [i, v] : a.zL_at) gamma = std::max(gamma, std::abs(v));
    for (const auto& [i, v] : a.zR_at) gamma = std::max(gamma, std::abs(v));
  }
  if (gamma == 0.0) gamma = 1.0;
  const double bound =
      std::pow(gamma, static_cast<double>(levels)) * std::numeric_limits<double>::epsilon();
  return {gamma, bound};
}

namespace {

struct EngineRun {
  const BlockLayout* layout;
  const std::vector<AuxVectors>* aux;
  const std::vector<GeneralTridiagonal>* interior_blocks;
  const std::vector<bool>* interior_dominant;
  const GeneralTridiagonal* a;
  std::span<const double> f;
  std::vector<RankState>* states;
};

fabric::Task<void> rank_program(fabric::Ctx& ctx, const EngineRun* run) {
  const int me = ctx.rank();
  const AuxVectors& aux = (*run->aux)[me];
  RankState& st = (*run->states)[me];
  const BlockLayout& layout = *run->layout;
  const Index first = layout.first[me], last = layout.last[me];
  const Index block = last - first + 1;

  // step 1 of the dichotomy process: local beta accumulation
  std::tie(st.beta_l, st.beta_r) = compute_betas(run->f.subspan(first, block), aux);
  st.flops += 4 * static_cast<std::uint64_t>(block);

  int lo = 0, hi = ctx.ranks() - 1;
  for (int level = 1;; ++level) {
    st.level = level;
    ctx.set_level(level);
    const int m = (lo + hi) / 2;

    if (me == m) {
      const fabric::Group left{lo, m, m}, right{m, hi, m};
      auto xi_r_vec = co_await ctx.reduce_sum(left, {0.0});
      auto xi_l_vec = co_await ctx.reduce_sum(right, {0.0});
      const double xi_r = xi_r_vec[0], xi_l = xi_l_vec[0];
      st.flops += static_cast<std::uint64_t>(hi - lo);  // rooted folds

      std::tie(st.x_first, st.x_last) = boundary_solve(xi_r, xi_l, st.beta_l, st.beta_r, aux);
      st.flops += 6;
      if (m > lo) {
        const double delta_l[] = {(xi_l * aux.ratio_first + st.beta_l) * aux.zl(first - 1)};
        ctx.send(m - 1, delta_l);
        st.flops += 3;
      }
      if (m < hi) {
        const double delta_r[] = {(xi_r * aux.ratio_last + st.beta_r) * aux.zr(last + 1)};
        ctx.send(m + 1, delta_r);
        st.flops += 3;
      }
      break;
    }

    const auto [left_group, right_group] =
        fabric::split_around(fabric::Group{lo, hi, m}, m);
    if (me < m) {
      const double c = st.beta_r * aux.zr(layout.first[m]);
      st.flops += 1;
      co_await ctx.reduce_sum({lo, m, m}, {c});
      if (me == m - 1) {
        auto d = co_await ctx.recv(m);
        st.beta_r += d[0];
        st.beta_l += d[0] * aux.ratio_first;
        st.flops += 3;
      }
      lo = left_group.lo;
      hi = left_group.hi;
    } else {
      const double c = st.beta_l * aux.zl(layout.last[m]);
      st.flops += 1;
      co_await ctx.reduce_sum({m, hi, m}, {c});
      if (me == m + 1) {
        auto d = co_await ctx.recv(m);
        st.beta_l += d[0];
        st.beta_r += d[0] * aux.ratio_last;
        st.flops += 3;
      }
      lo = right_group.lo;
      hi = right_group.hi;
    }
  }

  // independent interior solve with the boundary components moved into the
  // right-hand side
  if (block > 2) {
    const GeneralTridiagonal& sub = (*run->interior_blocks)[me];
    std::vector<double> rhs(run->f.begin() + first + 1, run->f.begin() + last);
    rhs.front() -= run->a->lower[first + 1] * st.x_first;
    rhs.back() -= run->a->upper[last - 1] * st.x_last;
    st.flops += 4;
    if ((*run->interior_dominant)[me]) {
      st.interior_x = thomas_solve(sub, rhs);
      st.flops += 8 * static_cast<std::uint64_t>(block - 2);
    } else {
      st.interior_x = nonmonotonic_solve(sub, rhs);
      st.flops += 12 * static_cast<std::uint64_t>(block - 2);
    }
  }
  co_return;
}

}  // namespace

DichotomySolver::DichotomySolver(GeneralTridiagonal a, int p, SolveOptions opt)
    : DichotomySolver(std::move(a), std::nullopt, std::nullopt, p, opt) {}

DichotomySolver::DichotomySolver(const ToeplitzTridiagonal& t, int p, SolveOptions opt)
    : DichotomySolver(to_general(t), t, std::nullopt, p, opt) {}

DichotomySolver DichotomySolver::helmholtz(double lambda, double h, Index n, int p,
                                           SolveOptions opt) {
  const ToeplitzTridiagonal t = prelim::helmholtz_toeplitz(lambda, h, n);
  return DichotomySolver(to_general(t), t, std::make_pair(lambda, h), p, opt);
}

DichotomySolver::DichotomySolver(GeneralTridiagonal a, std::optional<ToeplitzTridiagonal> t,
                                 std::optional<std::pair<double, double>> lambda_h, int p,
                                 SolveOptions opt)
    : a_(std::move(a)), toeplitz_(t), lambda_h_(lambda_h), p_(p), opt_(opt) {
  if (p_ < 1) raise(Err::Config, "rank count must be >= 1");
  build();
}

void DichotomySolver::build() {
  const auto t0 = std::chrono::steady_clock::now();
  if (opt_.gamma_cap < 1.0) raise(Err::Config, "gamma_cap must be >= 1");
  dominant_ = is_diagonally_dominant(a_);
  levels_ = prelim::dichotomy_levels(p_);

  const bool auto_kind = (opt_.prelim == PrelimKind::Auto);
  PrelimKind kind = opt_.prelim;
  if (kind == PrelimKind::Auto) {
    if (lambda_h_) kind = PrelimKind::HelmholtzCheb;
    else if (toeplitz_) kind = PrelimKind::ToeplitzQ;
    else kind = PrelimKind::General;
  }
  if (kind == PrelimKind::HelmholtzCheb && !lambda_h_)
    raise(Err::Config, "Chebyshev preliminary requires the Helmholtz form");
  if (kind == PrelimKind::ToeplitzQ && !toeplitz_)
    raise(Err::Config, "closed-form preliminary requires a Toeplitz matrix");

  if (p_ > 1) {
    layout_ = prelim::build_layout(a_.n, p_);

    // the closed form cannot separate coincident roots; when the path was
    // chosen automatically, fall back to the general O(n) route
    if (kind == PrelimKind::ToeplitzQ && auto_kind) {
      try {
        (void)prelim::characteristic_roots(*toeplitz_);
        (void)prelim::toeplitz_inverse_entry(*toeplitz_, 0, 0);
      } catch (const SolverError& e) {
        if (e.kind() == Err::DegenerateRoots) {
          kind = PrelimKind::General;
          build_warnings_.push_back("degenerate-roots-fallback");
        } else {
          throw;
        }
      }
    }

    aux_.resize(p_);
    std::vector<std::exception_ptr> errors(p_);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (p_ >= 8 && !omp_in_parallel())
#endif
    for (int r = 0; r < p_; ++r) {
      try {
        switch (kind) {
          case PrelimKind::General:
            aux_[r] = prelim::prelim_general(a_, layout_, r);
            break;
          case PrelimKind::ToeplitzQ:
            aux_[r] = prelim::prelim_toeplitz_q(*toeplitz_, layout_, r);
            break;
          case PrelimKind::HelmholtzCheb:
            aux_[r] = prelim::prelim_helmholtz_cheb(lambda_h_->first, lambda_h_->second, a_.n,
                                                    layout_, r);
            break;
          default:
            raise(Err::Config, "unresolved preliminary kind");
        }
      } catch (...) {
        errors[r] = std::current_exception();
      }
    }
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);

    interior_blocks_.resize(p_);
    interior_dominant_.assign(p_, true);
    for (int r = 0; r < p_; ++r) {
      const Index first = layout_.first[r], last = layout_.last[r];
      if (last - first + 1 > 2) {
        GeneralTridiagonal sub;
        sub.n = last - first - 1;
        sub.lower.assign(a_.lower.begin() + first + 1, a_.lower.begin() + last);
        sub.diag.assign(a_.diag.begin() + first + 1, a_.diag.begin() + last);
        sub.upper.assign(a_.upper.begin() + first + 1, a_.upper.begin() + last);
        sub.lower[0] = 0.0;
        sub.upper[sub.n - 1] = 0.0;
        interior_dominant_[r] = is_diagonally_dominant(sub);
        interior_blocks_[r] = std::move(sub);
      }
    }
    std::tie(gamma_, std::ignore) = error_monitor(aux_, levels_);
  } else {
    layout_ = prelim::build_layout(a_.n, 1);
    gamma_ = 1.0;
    levels_ = 0;
  }
  step1_seconds_ =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::pair<double, double> DichotomySolver::monitor() const {
  const double bound =
      std::pow(gamma_, static_cast<double>(levels_)) * std::numeric_limits<double>::epsilon();
  return {gamma_, bound};
}

SolveReport DichotomySolver::solve(std::span<const double> f) {
  if (static_cast<Index>(f.size()) != a_.n) raise(Err::Config, "rhs length mismatch");
  const auto t0 = std::chrono::steady_clock::now();

  SolveReport rep;
  rep.ranks = p_;
  rep.levels = levels_;
  std::tie(rep.gamma, rep.error_bound) = monitor();
  rep.dominant = dominant_;
  rep.warnings = build_warnings_;
  rep.prelim_cached = !first_solve_pending_;
  rep.step1_seconds = first_solve_pending_ ? step1_seconds_ : 0.0;
  first_solve_pending_ = false;

  if (p_ == 1) {
    // degenerate recursion: one sequential solve of the whole system
    rep.solution = dominant_ ? thomas_solve(a_, f) : nonmonotonic_solve(a_, f);
    if (!dominant_) rep.warnings.push_back("nonmonotonic-local-solve");
  } else {
    std::vector<RankState> states(p_);
    EngineRun run{&layout_, &aux_, &interior_blocks_, &interior_dominant_,
                  &a_,      f,     &states};

    fabric::Fabric fab(p_, opt_.mode, opt_.recv_timeout_seconds);
    fab.set_trace(opt_.trace);
    const EngineRun* runp = &run;
    fab.run([runp](fabric::Ctx& ctx) { return rank_program(ctx, runp); });

    rep.solution.assign(static_cast<size_t>(a_.n), 0.0);
    std::uint64_t worst_flops = 0;
    for (int r = 0; r < p_; ++r) {
      const Index first = layout_.first[r], last = layout_.last[r];
      rep.solution[first] = states[r].x_first;
      rep.solution[last] = states[r].x_last;
      std::copy(states[r].interior_x.begin(), states[r].interior_x.end(),
                rep.solution.begin() + first + 1);
      worst_flops = std::max(worst_flops, states[r].flops);
    }
    rep.ops_per_rank_max = worst_flops;
    if (std::find(interior_dominant_.begin(), interior_dominant_.end(), false) !=
        interior_dominant_.end())
      rep.warnings.push_back("nonmonotonic-local-solve");
  }

  if (rep.gamma > opt_.gamma_cap) rep.warnings.push_back("gamma-guard");
  if (opt_.posterior_check || rep.gamma > 1.0)
    rep.residual_inf = residual_inf(a_, rep.solution, f);

  rep.step2_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

SolveReport dichotomy_solve(const GeneralTridiagonal& a, std::span<const double> f, int p,
                            const SolveOptions& opt) {
  DichotomySolver solver(a, p, opt);
  return solver.solve(f);
}

SolveReport dichotomy_solve(const ToeplitzTridiagonal& t, std::span<const double> f, int p,
                            const SolveOptions& opt) {
  DichotomySolver solver(t, p, opt);
  return solver.solve(f);
}

SolveReport dichotomy_solve_helmholtz(double lambda, double h, Index n,
                                      std::span<const double> f, int p,
                                      const SolveOptions& opt) {
  DichotomySolver solver = DichotomySolver::helmholtz(lambda, h, n, p, opt);
  return solver.solve(f);
}

std::uint64_t fingerprint(const GeneralTridiagonal& a) {
  // FNV-1a over the raw band bytes
  std::uint64_t h = 1469598103934665603ull;
  const auto mix = [&h](const std::vector<double>& v) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(v.data());
    for (std::size_t i = 0; i < v.size() * sizeof(double); ++i) {
      h ^= bytes[i];
      h *= 1099511628211ull;
    }
  };
  mix(a.lower);
  mix(a.diag);
  mix(a.upper);
  return h;
}

std::size_t SolverCache::KeyHash::operator()(const Key& k) const {
  std::uint64_t h = k.hash ^ (static_cast<std::uint64_t>(k.n) << 17) ^
                    (static_cast<std::uint64_t>(k.p) << 3) ^ static_cast<std::uint64_t>(k.tag);
  const auto mixd = [&h](double d) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, sizeof(bits));
    h ^= bits + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  };
  mixd(k.a);
  mixd(k.b);
  mixd(k.c);
  return static_cast<std::size_t>(h);
}

std::shared_ptr<DichotomySolver> SolverCache::lookup(
    const Key& key, const std::function<DichotomySolver()>& build) {
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = map_.find(key);
    if (it != map_.end()) return it->second;
  }
  auto solver = std::make_shared<DichotomySolver>(build());
  std::lock_guard<std::mutex> lock(mu_);
  auto [it, inserted] = map_.emplace(key, solver);
  if (inserted) ++builds_;
  return it->second;
}

std::shared_ptr<DichotomySolver> SolverCache::general(const GeneralTridiagonal& a, int p,
                                                      const SolveOptions& opt) {
  const Key key{0, a.n, p, 0.0, 0.0, 0.0, fingerprint(a)};
  return lookup(key, [&] { return DichotomySolver(a, p, opt); });
}

std::shared_ptr<DichotomySolver> SolverCache::toeplitz(const ToeplitzTridiagonal& t, int p,
                                                       const SolveOptions& opt) {
  const Key key{1, t.n, p, t.t_minus, t.t_zero, t.t_plus, 0};
  return lookup(key, [&] { return DichotomySolver(t, p, opt); });
}

std::shared_ptr<DichotomySolver> SolverCache::helmholtz(double lambda, double h, Index n, int p,
                                                        const SolveOptions& opt) {
  const Key key{2, n, p, lambda, h, 0.0, 0};
  return lookup(key, [&] { return DichotomySolver::helmholtz(lambda, h, n, p, opt); });
}

std::size_t SolverCache::size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return map_.size();
}

}  // namespace dicho::engine
