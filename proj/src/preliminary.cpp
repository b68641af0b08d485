#include "dicho/preliminary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dicho/chebyshev.hpp"

namespace dicho::prelim {

namespace {

constexpr double kLogDblMax = 709.782712893384;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

using Complex = std::complex<double>;

// Value held as exp(lg) * u with |u| = 1, so products of huge or tiny powers
// never leave the double range until the final combination.
struct ScaledC {
  double lg = kNegInf;
  Complex u = 0.0;

  bool is_zero() const { return u == 0.0; }

  static ScaledC of(Complex v) {
    ScaledC s;
    const double m = std::abs(v);
    if (m == 0.0) return s;
    s.lg = std::log(m);
    s.u = v / m;
    return s;
  }

  friend ScaledC operator*(const ScaledC& a, const ScaledC& b) {
    if (a.is_zero() || b.is_zero()) return {};
    ScaledC s;
    s.lg = a.lg + b.lg;
    s.u = a.u * b.u;
    return s;
  }

  friend ScaledC operator/(const ScaledC& a, const ScaledC& b) {
    if (b.is_zero()) raise(Err::Singular, "scaled division by zero");
    if (a.is_zero()) return {};
    ScaledC s;
    s.lg = a.lg - b.lg;
    s.u = a.u / b.u;
    return s;
  }

  ScaledC negate() const {
    ScaledC s = *this;
    s.u = -s.u;
    return s;
  }

  double to_real() const {
    if (is_zero()) return 0.0;
    if (lg > kLogDblMax) raise(Err::Overflow, "scaled value exceeds double range");
    return std::exp(lg) * u.real();
  }
};

ScaledC pow_scaled(Complex base, Index e) {
  ScaledC s;
  if (e == 0) {
    s.lg = 0.0;
    s.u = 1.0;
    return s;
  }
  const double m = std::abs(base);
  if (m == 0.0) return s;
  s.lg = static_cast<double>(e) * std::log(m);
  s.u = std::polar(1.0, static_cast<double>(e) * std::arg(base));
  return s;
}

// Fundamental solution Psi(j) = (q1^j - q2^j)/(q1 - q2) of the constant
// three-term recurrence; Psi(0) = 0, Psi(1) = 1.
struct QContext {
  Complex q_big, ratio;  // |ratio| <= 1
  double t_plus = 0.0;
  Complex prod;  // q1*q2 = t_minus/t_plus

  ScaledC psi(Index j) const {
    if (j <= 0) return {};
    const Complex rj =
        std::polar(std::pow(std::abs(ratio), static_cast<double>(j)),
                   static_cast<double>(j) * std::arg(ratio));
    return pow_scaled(q_big, j - 1) * ScaledC::of((1.0 - rj) / (1.0 - ratio));
  }

  // Psi(order) appears as a denominator when a subsystem of that order + the
  // boundary row is inverted; vanishing means the subsystem is singular.
  void check_subsystem(Index order, Index where) const {
    if (order <= 0) return;
    const Complex rj =
        std::polar(std::pow(std::abs(ratio), static_cast<double>(order)),
                   static_cast<double>(order) * std::arg(ratio));
    if (std::abs(1.0 - rj) < 1e-12)
      raise(Err::Singular, "exterior subsystem singular", where);
  }
};

QContext make_q_context(const ToeplitzTridiagonal& t, Index solvability_order) {
  if (t.t_plus == 0.0)
    raise(Err::DomainError, "closed-form path requires a nonzero superdiagonal");
  const auto [q1, q2] = characteristic_roots(t);
  const double sep = std::abs(q1 - q2);
  if (sep < 1e-8 * (std::abs(q1) + std::abs(q2)))
    raise(Err::DegenerateRoots, "characteristic roots too close for the closed form");

  QContext ctx;
  ctx.t_plus = t.t_plus;
  ctx.prod = q1 * q2;
  if (std::abs(q1) >= std::abs(q2)) {
    ctx.q_big = q1;
    ctx.ratio = q2 / q1;
  } else {
    ctx.q_big = q2;
    ctx.ratio = q1 / q2;
  }
  const Complex rN =
      std::polar(std::pow(std::abs(ctx.ratio), static_cast<double>(solvability_order)),
                 static_cast<double>(solvability_order) * std::arg(ctx.ratio));
  if (std::abs(1.0 - rN) < 1e-12)
    raise(Err::NoSolution, "q1^{N+1} equals q2^{N+1} with distinct roots");
  return ctx;
}

// (T^{-1})_{row,col} in 1-based indices over a system of order order_n.
ScaledC inverse_entry_scaled(const QContext& ctx, Index order_n, Index row, Index col) {
  const ScaledC den = ScaledC::of(Complex(ctx.t_plus)) * ctx.psi(order_n + 1);
  ScaledC num;
  if (row <= col) {
    num = ctx.psi(row) * ctx.psi(order_n + 1 - col);
  } else {
    num = pow_scaled(ctx.prod, row - col) * ctx.psi(col) * ctx.psi(order_n + 1 - row);
  }
  return (num / den).negate();
}

void check_ratio_finite(const AuxVectors& aux) {
  if (!std::isfinite(aux.ratio_first) || !std::isfinite(aux.ratio_last))
    raise(Err::NonFiniteRatio, "boundary transfer ratio is not finite", aux.rank);
}

GeneralTridiagonal sub_matrix(const GeneralTridiagonal& a, Index lo, Index hi) {
  GeneralTridiagonal s;
  s.n = hi - lo + 1;
  s.lower.assign(a.lower.begin() + lo, a.lower.begin() + hi + 1);
  s.diag.assign(a.diag.begin() + lo, a.diag.begin() + hi + 1);
  s.upper.assign(a.upper.begin() + lo, a.upper.begin() + hi + 1);
  s.lower[0] = 0.0;
  s.upper[s.n - 1] = 0.0;
  return s;
}

// One step of extended-precision iterative refinement. The auxiliary vectors
// are compared across independent routes at tight tolerances, so the O(n)
// reference solves are polished past plain backward stability.
std::vector<double> refined_solve(const GeneralTridiagonal& a, std::span<const double> rhs) {
  std::vector<double> x = robust_solve(a, rhs);
  std::vector<double> r(static_cast<size_t>(a.n));
  for (Index i = 0; i < a.n; ++i) {
    long double s = static_cast<long double>(rhs[i]) -
                    static_cast<long double>(a.diag[i]) * x[i];
    if (i > 0) s -= static_cast<long double>(a.lower[i]) * x[i - 1];
    if (i + 1 < a.n) s -= static_cast<long double>(a.upper[i]) * x[i + 1];
    r[i] = static_cast<double>(s);
  }
  const std::vector<double> dx = robust_solve(a, r);
  for (Index i = 0; i < a.n; ++i) x[i] += dx[i];
  return x;
}

}  // namespace

BlockLayout build_layout(Index n, int p) {
  if (p < 1) raise(Err::Config, "rank count must be >= 1");
  if (n < 2 * static_cast<Index>(p))
    raise(Err::TooManyRanks, "every block needs at least two rows", p);
  BlockLayout layout;
  layout.p = p;
  layout.n = n;
  layout.first.resize(p);
  layout.last.resize(p);
  const Index base = n / p, extra = n % p;
  Index at = 0;
  for (int r = 0; r < p; ++r) {
    const Index size = base + (r < extra ? 1 : 0);
    layout.first[r] = at;
    layout.last[r] = at + size - 1;
    at += size;
  }
  return layout;
}

int dichotomy_levels(int p) {
  if (p <= 1) return p == 1 ? 1 : 0;
  // depth of the middle-split recursion over a group of p ranks
  int worst = 0;
  struct Span { int lo, hi, level; };
  std::vector<Span> stack{{0, p - 1, 1}};
  while (!stack.empty()) {
    const Span s = stack.back();
    stack.pop_back();
    worst = std::max(worst, s.level);
    const int m = (s.lo + s.hi) / 2;
    if (m - 1 >= s.lo) stack.push_back({s.lo, m - 1, s.level + 1});
    if (m + 1 <= s.hi) stack.push_back({m + 1, s.hi, s.level + 1});
  }
  return worst;
}

ZIndexRequest required_z_indices(const BlockLayout& layout, int rank) {
  ZIndexRequest req;
  int lo = 0, hi = layout.p - 1;
  while (true) {
    const int m = (lo + hi) / 2;
    if (rank == m) break;
    if (rank < m) {
      req.right.push_back(layout.first[m]);  // contributes beta^R * (Z^R)_{m_L(root)}
      hi = m - 1;
    } else {
      req.left.push_back(layout.last[m]);  // contributes beta^L * (Z^L)_{m_R(root)}
      lo = m + 1;
    }
  }
  if (layout.first[rank] > 0) req.left.push_back(layout.first[rank] - 1);
  if (layout.last[rank] < layout.n - 1) req.right.push_back(layout.last[rank] + 1);
  req.left.push_back(layout.first[rank]);   // anchor, value 1 by definition
  req.right.push_back(layout.last[rank]);   // anchor, value 1 by definition
  std::sort(req.left.begin(), req.left.end());
  req.left.erase(std::unique(req.left.begin(), req.left.end()), req.left.end());
  std::sort(req.right.begin(), req.right.end());
  req.right.erase(std::unique(req.right.begin(), req.right.end()), req.right.end());
  return req;
}

double AuxVectors::zl(Index global) const {
  const auto it = zL_at.find(global);
  if (it == zL_at.end()) raise(Err::Config, "Z^L value not built for index", global);
  return it->second;
}

double AuxVectors::zr(Index global) const {
  const auto it = zR_at.find(global);
  if (it == zR_at.end()) raise(Err::Config, "Z^R value not built for index", global);
  return it->second;
}

AuxVectors prelim_general(const GeneralTridiagonal& a, const BlockLayout& layout, int rank,
                          const ZIndexRequest* request) {
  const Index n = a.n;
  if (n != layout.n) raise(Err::Config, "layout does not match the matrix order");
  ZIndexRequest own;
  if (!request) {
    own = required_z_indices(layout, rank);
    request = &own;
  }

  AuxVectors aux;
  aux.rank = rank;
  aux.first = layout.first[rank];
  aux.last = layout.last[rank];

  // Green rows: A^T G = e_k, block slice kept.
  const GeneralTridiagonal at = transpose(a);
  std::vector<double> e(static_cast<size_t>(n), 0.0);
  e[aux.first] = 1.0;
  const auto gl_full = refined_solve(at, e);
  e[aux.first] = 0.0;
  e[aux.last] = 1.0;
  const auto gr_full = refined_solve(at, e);
  aux.gL.assign(gl_full.begin() + aux.first, gl_full.begin() + aux.last + 1);
  aux.gR.assign(gr_full.begin() + aux.first, gr_full.begin() + aux.last + 1);

  // Z^L over rows [0, first-1], boundary value 1 at first.
  if (aux.first > 0) {
    const GeneralTridiagonal sub = sub_matrix(a, 0, aux.first - 1);
    std::vector<double> rhs(static_cast<size_t>(sub.n), 0.0);
    rhs[sub.n - 1] = -a.upper[aux.first - 1];
    const auto z = refined_solve(sub, rhs);
    for (Index i : request->left)
      aux.zL_at[i] = (i == aux.first) ? 1.0 : z[i];
  } else {
    aux.zL_at[aux.first] = 1.0;
  }

  // Z^R over rows [last+1, n-1], boundary value 1 at last.
  if (aux.last < n - 1) {
    const GeneralTridiagonal sub = sub_matrix(a, aux.last + 1, n - 1);
    std::vector<double> rhs(static_cast<size_t>(sub.n), 0.0);
    rhs[0] = -a.lower[aux.last + 1];
    const auto z = refined_solve(sub, rhs);
    for (Index i : request->right)
      aux.zR_at[i] = (i == aux.last) ? 1.0 : z[i - (aux.last + 1)];
  } else {
    aux.zR_at[aux.last] = 1.0;
  }

  aux.ratio_first = aux.gL.back() / aux.gR.back();
  aux.ratio_last = aux.gR.front() / aux.gL.front();
  check_ratio_finite(aux);
  return aux;
}

std::pair<Complex, Complex> characteristic_roots(const ToeplitzTridiagonal& t) {
  if (t.t_plus == 0.0)
    raise(Err::DomainError, "closed-form path requires a nonzero superdiagonal");
  const Complex disc = Complex(t.t_zero * t.t_zero - 4.0 * t.t_minus * t.t_plus);
  const Complex root = std::sqrt(disc);
  const Complex q1 = (-t.t_zero + root) / (2.0 * t.t_plus);
  const Complex q2 = (-t.t_zero - root) / (2.0 * t.t_plus);
  return {q1, q2};
}

double toeplitz_inverse_entry(const ToeplitzTridiagonal& t, Index row, Index col) {
  if (row < 0 || row >= t.n || col < 0 || col >= t.n)
    raise(Err::Config, "inverse entry index out of range");
  const QContext ctx = make_q_context(t, t.n + 1);
  return inverse_entry_scaled(ctx, t.n, row + 1, col + 1).to_real();
}

AuxVectors prelim_toeplitz_q(const ToeplitzTridiagonal& t, const BlockLayout& layout, int rank,
                             const ZIndexRequest* request) {
  const Index n = t.n;
  if (n != layout.n) raise(Err::Config, "layout does not match the matrix order");
  ZIndexRequest own;
  if (!request) {
    own = required_z_indices(layout, rank);
    request = &own;
  }

  AuxVectors aux;
  aux.rank = rank;
  aux.first = layout.first[rank];
  aux.last = layout.last[rank];
  const Index block = layout.block_size(rank);

  const QContext ctx = make_q_context(t, n + 1);
  const Index ml1 = aux.first + 1, mr1 = aux.last + 1;  // 1-based boundaries
  ctx.check_subsystem(ml1, aux.first);           // Z^L rows [1, ml1-1]
  ctx.check_subsystem(n - mr1 + 1, aux.last);    // Z^R rows [mr1+1, n]

  aux.gL.resize(static_cast<size_t>(block));
  aux.gR.resize(static_cast<size_t>(block));
  const ScaledC den = ScaledC::of(Complex(t.t_plus)) * ctx.psi(n + 1);
  const ScaledC psi_ml = ctx.psi(ml1);
  const ScaledC psi_tail_mr = ctx.psi(n + 1 - mr1);
  for (Index j = 0; j < block; ++j) {
    const Index col = ml1 + j;  // 1-based column
    // row ml1 <= col: -Psi(ml1) Psi(n+1-col) / (t_plus Psi(n+1))
    aux.gL[j] = (psi_ml * ctx.psi(n + 1 - col) / den).negate().to_real();
    // row mr1 >= col: -P^{mr1-col} Psi(col) Psi(n+1-mr1) / (t_plus Psi(n+1))
    aux.gR[j] =
        (pow_scaled(ctx.prod, mr1 - col) * ctx.psi(col) * psi_tail_mr / den).negate().to_real();
  }

  // Z^L_i = Psi(i)/Psi(ml1) for i <= ml1 (exterior rows [1, ml1-1]).
  for (Index i : request->left) {
    if (i == aux.first) {
      aux.zL_at[i] = 1.0;
    } else {
      aux.zL_at[i] = (ctx.psi(i + 1) / psi_ml).to_real();
    }
  }
  // Z^R_i = P^l Psi(n''+1-l)/Psi(n''+1), l = i - mr1, n'' = n - mr1.
  const Index tail = n - mr1;
  const ScaledC psi_tail_full = ctx.psi(tail + 1);
  for (Index i : request->right) {
    if (i == aux.last) {
      aux.zR_at[i] = 1.0;
    } else {
      const Index l = (i + 1) - mr1;
      aux.zR_at[i] =
          (pow_scaled(ctx.prod, l) * ctx.psi(tail + 1 - l) / psi_tail_full).to_real();
    }
  }

  aux.ratio_first = aux.gL.back() / aux.gR.back();
  aux.ratio_last = aux.gR.front() / aux.gL.front();
  check_ratio_finite(aux);
  return aux;
}

ToeplitzTridiagonal helmholtz_toeplitz(double lambda, double h, Index n) {
  if (!(h > 0.0) || n < 1) raise(Err::Config, "invalid Helmholtz discretization");
  return {n, 1.0, lambda * h * h - 2.0, 1.0};
}

std::pair<double, double> green_endpoints_overflow_safe(double x, Index n, Index first,
                                                        Index last, Index i) {
  const double ax = std::abs(x);
  if (!(ax > 1.0)) raise(Err::DomainError, "overflow-safe form requires |x| > 1");
  if (i < first || i > last || first < 0 || last >= n)
    raise(Err::Config, "index outside the block", i);

  const Index mesh = n + 1;
  const Index ml1 = first + 1, mr1 = last + 1, i1 = i + 1;
  const double eta_log = std::log(ax + std::sqrt((ax - 1.0) * (ax + 1.0)));
  const double s = 2.0 * std::sqrt((ax - 1.0) * (ax + 1.0));
  const auto term = [&](Index e) { return std::exp(static_cast<double>(e) * eta_log); };

  // gL_i = -U_{mesh-i1-1} U_{ml1-1} / U_{mesh-1}; all exponents below are <= 0.
  double gl = (term(ml1 - i1) + term(-2 * mesh + i1 - ml1) - term(-2 * mesh + i1 + ml1) -
               term(-ml1 - i1)) /
              s;
  double gr = (term(i1 - mr1) + term(-2 * mesh + mr1 - i1) - term(-2 * mesh + mr1 + i1) -
               term(-i1 - mr1)) /
              s;
  int sign_l = -1, sign_r = -1;
  if (x < 0.0) {
    // U_k(-a) = (-1)^k U_k(a): degree sums ml1-i1-1 and i1-mr1-1 set the parity
    if (((ml1 - i1 - 1) % 2 + 2) % 2 == 1) sign_l = 1;
    if (((i1 - mr1 - 1) % 2 + 2) % 2 == 1) sign_r = 1;
  }
  return {sign_l * gl, sign_r * gr};
}

namespace {

// One recurrence sweep collecting U_deg(x) for every requested degree. The
// recurrence is only marginally stable inside [-1,1], so it runs in extended
// precision; at degrees near 1e4 this keeps the forward error well below the
// cross-path comparison tolerances.
std::unordered_map<Index, long double> u_sweep(double x, std::vector<Index> degrees) {
  std::sort(degrees.begin(), degrees.end());
  degrees.erase(std::unique(degrees.begin(), degrees.end()), degrees.end());
  std::unordered_map<Index, long double> out;
  if (degrees.empty()) return out;
  const Index top = degrees.back();
  size_t next = 0;
  const long double xl = x;
  long double prev = 0.0L, cur = 1.0L;  // U_{-1}, U_0
  for (Index deg = -1; deg <= top; ++deg) {
    const long double val = (deg == -1) ? prev : cur;
    while (next < degrees.size() && degrees[next] == deg) {
      out[deg] = val;
      ++next;
    }
    if (deg >= 0) {
      const long double nxt = 2.0L * xl * cur - prev;
      prev = cur;
      cur = nxt;
    }
  }
  return out;
}

double checked_ratio(long double num, long double den, Index which) {
  if (std::abs(static_cast<double>(den)) < 1e-280)
    raise(Err::Singular, "exterior subsystem close to singular", which);
  return static_cast<double>(num / den);
}

}  // namespace

AuxVectors prelim_helmholtz_cheb(double lambda, double h, Index n, const BlockLayout& layout,
                                 int rank, const ZIndexRequest* request) {
  if (n != layout.n) raise(Err::Config, "layout does not match the system order");
  ZIndexRequest own;
  if (!request) {
    own = required_z_indices(layout, rank);
    request = &own;
  }

  const ToeplitzTridiagonal t = helmholtz_toeplitz(lambda, h, n);
  const double x = -t.t_zero / 2.0;  // 1 - h^2 lambda / 2
  const Index mesh = n + 1;

  // singular when x = cos(k pi / mesh), k = 1..mesh-1
  {
    const double clamped = std::clamp(x, -1.0, 1.0);
    const double kf = std::acos(clamped) * static_cast<double>(mesh) / M_PI;
    for (Index k = static_cast<Index>(std::floor(kf)) - 1; k <= static_cast<Index>(kf) + 1; ++k) {
      if (k < 1 || k > mesh - 1) continue;
      if (std::abs(x - std::cos(static_cast<double>(k) * M_PI / static_cast<double>(mesh))) <
          1e-12)
        raise(Err::NearEigenvalue, "shift hits the operator spectrum", k);
    }
  }

  AuxVectors aux;
  aux.rank = rank;
  aux.first = layout.first[rank];
  aux.last = layout.last[rank];
  const Index block = layout.block_size(rank);
  const Index ml1 = aux.first + 1, mr1 = aux.last + 1;

  double gl_first, gl_last, gr_first, gr_last;

  if (std::abs(x) <= 1.0) {
    // bounded regime: one recurrence sweep to the largest needed degree
    std::vector<Index> degrees = {ml1 - 1, mr1 - 1, mesh - ml1 - 1, mesh - mr1 - 1, mesh - 1};
    for (Index i : request->left) degrees.push_back(i);          // U_{i1-1}, i1 = i+1
    for (Index i : request->right) degrees.push_back(mesh - i - 2);  // U_{mesh-i1-1}
    const auto u = u_sweep(x, degrees);

    const long double u_ml = u.at(ml1 - 1);
    const long double u_tail_mr = u.at(mesh - mr1 - 1);
    const long double u_full = u.at(mesh - 1);
    if (std::abs(static_cast<double>(u_full)) < 1e-12 * static_cast<double>(mesh))
      raise(Err::NearEigenvalue, "U_{mesh-1}(x) vanishes", mesh - 1);

    for (Index i : request->left)
      aux.zL_at[i] =
          (i == aux.first) ? 1.0 : checked_ratio(u.at(i), u_ml, ml1 - 1);
    for (Index i : request->right)
      aux.zR_at[i] = (i == aux.last)
                         ? 1.0
                         : checked_ratio(u.at(mesh - i - 2), u_tail_mr, mesh - mr1 - 1);

    gl_first = static_cast<double>(-u.at(mesh - ml1 - 1) * u_ml / u_full);
    gl_last = static_cast<double>(-u_tail_mr * u_ml / u_full);
    gr_first = gl_last;
    gr_last = static_cast<double>(-u.at(mr1 - 1) * u_tail_mr / u_full);
  } else {
    // growing regime: exact signed-log ratios for Z, closed form or the
    // eta-sum form for the Green endpoints
    const auto z_ratio = [&](Index num_deg, Index den_deg) {
      const SignedLog a = u_log_magnitude(num_deg, x);
      const SignedLog b = u_log_magnitude(den_deg, x);
      if (b.sign == 0) raise(Err::Singular, "exterior subsystem singular", den_deg);
      if (a.sign == 0) return 0.0;
      return static_cast<double>(a.sign * b.sign) * std::exp(a.log_abs - b.log_abs);
    };
    for (Index i : request->left)
      aux.zL_at[i] = (i == aux.first) ? 1.0 : z_ratio(i, ml1 - 1);
    for (Index i : request->right)
      aux.zR_at[i] = (i == aux.last) ? 1.0 : z_ratio(mesh - i - 2, mesh - mr1 - 1);

    if (mesh - 1 <= n_overflow_threshold(x)) {
      const double u_ml = u_closed(ml1 - 1, x);
      const double u_tail_mr = u_closed(mesh - mr1 - 1, x);
      const double u_full = u_closed(mesh - 1, x);
      gl_first = -u_closed(mesh - ml1 - 1, x) * u_ml / u_full;
      gl_last = -u_tail_mr * u_ml / u_full;
      gr_first = gl_last;
      gr_last = -u_closed(mr1 - 1, x) * u_tail_mr / u_full;
    } else {
      const auto [gl_f, gr_f] = green_endpoints_overflow_safe(x, n, aux.first, aux.last, aux.first);
      const auto [gl_l, gr_l] = green_endpoints_overflow_safe(x, n, aux.first, aux.last, aux.last);
      gl_first = gl_f;
      gl_last = gl_l;
      gr_first = gr_f;
      gr_last = gr_l;
    }
  }

  // remaining Green components from the local block solves
  aux.gL.assign(static_cast<size_t>(block), 0.0);
  aux.gR.assign(static_cast<size_t>(block), 0.0);
  aux.gL.front() = gl_first;
  aux.gL.back() = gl_last;
  aux.gR.front() = gr_first;
  aux.gR.back() = gr_last;
  if (block > 2) {
    GeneralTridiagonal sub = constant_tridiagonal(block - 2, t.t_minus, t.t_zero, t.t_plus);
    // accumulate: for a one-point interior both boundary terms land in the
    // same cell
    std::vector<double> rhs(static_cast<size_t>(block - 2), 0.0);
    rhs.front() -= t.t_minus * gl_first;
    rhs.back() -= t.t_plus * gl_last;
    auto interior = robust_solve(sub, rhs);
    std::copy(interior.begin(), interior.end(), aux.gL.begin() + 1);
    rhs.assign(static_cast<size_t>(block - 2), 0.0);
    rhs.front() -= t.t_minus * gr_first;
    rhs.back() -= t.t_plus * gr_last;
    interior = robust_solve(sub, rhs);
    std::copy(interior.begin(), interior.end(), aux.gR.begin() + 1);
  }

  aux.ratio_first = aux.gL.back() / aux.gR.back();
  aux.ratio_last = aux.gR.front() / aux.gL.front();
  check_ratio_finite(aux);
  return aux;
}

}  // namespace dicho::prelim
