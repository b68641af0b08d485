#include "dicho/tridiag.hpp"

#include <algorithm>
#include <cmath>

namespace dicho {

const char* err_name(Err e) {
  switch (e) {
    case Err::ZeroPivot: return "ZeroPivot";
    case Err::Singular: return "Singular";
    case Err::Overflow: return "Overflow";
    case Err::DomainError: return "DomainError";
    case Err::NoSolution: return "NoSolution";
    case Err::DegenerateRoots: return "DegenerateRoots";
    case Err::NearEigenvalue: return "NearEigenvalue";
    case Err::TooManyRanks: return "TooManyRanks";
    case Err::MismatchedWidth: return "MismatchedWidth";
    case Err::Deadlock: return "Deadlock";
    case Err::UnknownRank: return "UnknownRank";
    case Err::NonFiniteRatio: return "NonFiniteRatio";
    case Err::Config: return "Config";
    case Err::Io: return "Io";
  }
  return "Unknown";
}

namespace {

void check_bands(const GeneralTridiagonal& a) {
  const Index n = a.n;
  if (n < 1) raise(Err::Config, "matrix order must be >= 1");
  if (static_cast<Index>(a.lower.size()) != n || static_cast<Index>(a.diag.size()) != n ||
      static_cast<Index>(a.upper.size()) != n)
    raise(Err::Config, "band lengths must equal the matrix order");
  if (a.lower[0] != 0.0) raise(Err::Config, "lower[0] must be exactly zero");
  if (a.upper[n - 1] != 0.0) raise(Err::Config, "upper[n-1] must be exactly zero");
  for (Index i = 0; i < n; ++i)
    if (!std::isfinite(a.lower[i]) || !std::isfinite(a.diag[i]) || !std::isfinite(a.upper[i]))
      raise(Err::Config, "matrix entries must be finite", i);
}

}  // namespace

GeneralTridiagonal make_general(std::vector<double> lower, std::vector<double> diag,
                                std::vector<double> upper) {
  GeneralTridiagonal a;
  a.n = static_cast<Index>(diag.size());
  a.lower = std::move(lower);
  a.diag = std::move(diag);
  a.upper = std::move(upper);
  check_bands(a);
  return a;
}

GeneralTridiagonal constant_tridiagonal(Index n, double lo, double di, double up) {
  if (n < 1) raise(Err::Config, "matrix order must be >= 1");
  GeneralTridiagonal a;
  a.n = n;
  a.lower.assign(static_cast<size_t>(n), lo);
  a.diag.assign(static_cast<size_t>(n), di);
  a.upper.assign(static_cast<size_t>(n), up);
  a.lower[0] = 0.0;
  a.upper[static_cast<size_t>(n) - 1] = 0.0;
  check_bands(a);
  return a;
}

GeneralTridiagonal to_general(const ToeplitzTridiagonal& t) {
  return constant_tridiagonal(t.n, t.t_minus, t.t_zero, t.t_plus);
}

GeneralTridiagonal transpose(const GeneralTridiagonal& a) {
  const Index n = a.n;
  GeneralTridiagonal at;
  at.n = n;
  at.lower.assign(static_cast<size_t>(n), 0.0);
  at.diag = a.diag;
  at.upper.assign(static_cast<size_t>(n), 0.0);
  for (Index i = 1; i < n; ++i) at.lower[i] = a.upper[i - 1];
  for (Index i = 0; i + 1 < n; ++i) at.upper[i] = a.lower[i + 1];
  return at;
}

std::vector<double> thomas_solve(const GeneralTridiagonal& a, std::span<const double> f,
                                 double pivot_floor) {
  const Index n = a.n;
  if (static_cast<Index>(f.size()) != n) raise(Err::Config, "rhs length mismatch");
  std::vector<double> cp(static_cast<size_t>(n), 0.0);
  std::vector<double> dp(static_cast<size_t>(n), 0.0);

  double den = a.diag[0];
  if (std::abs(den) < pivot_floor) raise(Err::ZeroPivot, "pivot below floor", 0);
  cp[0] = a.upper[0] / den;
  dp[0] = f[0] / den;
  for (Index i = 1; i < n; ++i) {
    den = a.diag[i] - a.lower[i] * cp[i - 1];
    if (std::abs(den) < pivot_floor) raise(Err::ZeroPivot, "pivot below floor", i);
    cp[i] = a.upper[i] / den;
    dp[i] = (f[i] - a.lower[i] * dp[i - 1]) / den;
  }
  std::vector<double> x(static_cast<size_t>(n));
  x[n - 1] = dp[n - 1];
  for (Index i = n - 2; i >= 0; --i) x[i] = dp[i] - cp[i] * x[i + 1];
  return x;
}

std::vector<double> nonmonotonic_solve(const GeneralTridiagonal& a, std::span<const double> f) {
  const Index n = a.n;
  if (static_cast<Index>(f.size()) != n) raise(Err::Config, "rhs length mismatch");
  constexpr double kTiny = 1e-300;

  std::vector<double> c(a.lower), b(a.diag), u(a.upper);
  std::vector<double> u2(static_cast<size_t>(n), 0.0);  // second superdiagonal fill-in
  std::vector<double> r(f.begin(), f.end());

  for (Index i = 0; i + 1 < n; ++i) {
    // rows i and i+1 over columns i, i+1, i+2
    if (std::abs(c[i + 1]) > std::abs(b[i])) {
      std::swap(b[i], c[i + 1]);
      std::swap(u[i], b[i + 1]);
      std::swap(u2[i], u[i + 1]);
      std::swap(r[i], r[i + 1]);
    }
    if (std::abs(b[i]) < kTiny) raise(Err::Singular, "no usable pivot", i);
    const double m = c[i + 1] / b[i];
    c[i + 1] = 0.0;
    b[i + 1] -= m * u[i];
    u[i + 1] -= m * u2[i];
    r[i + 1] -= m * r[i];
  }
  if (std::abs(b[n - 1]) < kTiny) raise(Err::Singular, "no usable pivot", n - 1);

  std::vector<double> x(static_cast<size_t>(n));
  x[n - 1] = r[n - 1] / b[n - 1];
  if (n >= 2) x[n - 2] = (r[n - 2] - u[n - 2] * x[n - 1]) / b[n - 2];
  for (Index i = n - 3; i >= 0; --i) x[i] = (r[i] - u[i] * x[i + 1] - u2[i] * x[i + 2]) / b[i];
  return x;
}

namespace {

std::vector<double> dense_lu_solve(const GeneralTridiagonal& a, std::span<const double> f) {
  const Index n = a.n;
  const size_t un = static_cast<size_t>(n);
  std::vector<double> m(un * un, 0.0);
  for (Index i = 0; i < n; ++i) {
    if (i > 0) m[un * i + (i - 1)] = a.lower[i];
    m[un * i + i] = a.diag[i];
    if (i + 1 < n) m[un * i + (i + 1)] = a.upper[i];
  }
  std::vector<double> r(f.begin(), f.end());

  for (Index k = 0; k < n; ++k) {
    Index piv = k;
    double best = std::abs(m[un * k + k]);
    for (Index i = k + 1; i < n; ++i) {
      const double v = std::abs(m[un * i + k]);
      if (v > best) { best = v; piv = i; }
    }
    if (best < 1e-300) raise(Err::Singular, "dense elimination pivot vanished", k);
    if (piv != k) {
      for (Index j = 0; j < n; ++j) std::swap(m[un * k + j], m[un * piv + j]);
      std::swap(r[k], r[piv]);
    }
    for (Index i = k + 1; i < n; ++i) {
      const double mult = m[un * i + k] / m[un * k + k];
      if (mult == 0.0) continue;
      for (Index j = k; j < n; ++j) m[un * i + j] -= mult * m[un * k + j];
      r[i] -= mult * r[k];
    }
  }
  std::vector<double> x(un);
  for (Index i = n - 1; i >= 0; --i) {
    double s = r[i];
    for (Index j = i + 1; j < n; ++j) s -= m[un * i + j] * x[j];
    x[i] = s / m[un * i + i];
  }
  return x;
}

std::vector<double> banded_givens_solve(const GeneralTridiagonal& a, std::span<const double> f) {
  const Index n = a.n;
  std::vector<double> d(a.diag), u1(a.upper), low(a.lower);
  std::vector<double> u2(static_cast<size_t>(n), 0.0);
  std::vector<double> r(f.begin(), f.end());

  for (Index i = 0; i + 1 < n; ++i) {
    const double rho = std::hypot(d[i], low[i + 1]);
    if (rho < 1e-300) raise(Err::Singular, "Givens column vanished", i);
    const double cs = d[i] / rho, sn = low[i + 1] / rho;
    d[i] = rho;
    low[i + 1] = 0.0;
    double t0 = u1[i], t1 = d[i + 1];
    u1[i] = cs * t0 + sn * t1;
    d[i + 1] = -sn * t0 + cs * t1;
    t0 = u2[i]; t1 = u1[i + 1];
    u2[i] = cs * t0 + sn * t1;
    u1[i + 1] = -sn * t0 + cs * t1;
    t0 = r[i]; t1 = r[i + 1];
    r[i] = cs * t0 + sn * t1;
    r[i + 1] = -sn * t0 + cs * t1;
  }

  std::vector<double> x(static_cast<size_t>(n));
  for (Index i = n - 1; i >= 0; --i) {
    double s = r[i];
    if (i + 1 < n) s -= u1[i] * x[i + 1];
    if (i + 2 < n) s -= u2[i] * x[i + 2];
    if (std::abs(d[i]) < 1e-300) raise(Err::Singular, "R diagonal vanished", i);
    x[i] = s / d[i];
  }
  return x;
}

}  // namespace

std::vector<double> dense_solve_oracle(const GeneralTridiagonal& a, std::span<const double> f) {
  if (static_cast<Index>(f.size()) != a.n) raise(Err::Config, "rhs length mismatch");
  if (a.n > 16384) raise(Err::Config, "oracle limited to n <= 16384");
  if (a.n <= 1024) return dense_lu_solve(a, f);
  return banded_givens_solve(a, f);
}

std::vector<double> apply(const GeneralTridiagonal& a, std::span<const double> x) {
  const Index n = a.n;
  std::vector<double> y(static_cast<size_t>(n));
  for (Index i = 0; i < n; ++i) {
    double s = a.diag[i] * x[i];
    if (i > 0) s += a.lower[i] * x[i - 1];
    if (i + 1 < n) s += a.upper[i] * x[i + 1];
    y[i] = s;
  }
  return y;
}

double residual_inf(const GeneralTridiagonal& a, std::span<const double> x,
                    std::span<const double> f) {
  const Index n = a.n;
  if (static_cast<Index>(x.size()) != n || static_cast<Index>(f.size()) != n)
    raise(Err::Config, "length mismatch");
  double worst = 0.0;
  for (Index i = 0; i < n; ++i) {
    double s = a.diag[i] * x[i] - f[i];
    if (i > 0) s += a.lower[i] * x[i - 1];
    if (i + 1 < n) s += a.upper[i] * x[i + 1];
    worst = std::max(worst, std::abs(s));
  }
  return worst;
}

bool is_diagonally_dominant(const GeneralTridiagonal& a) {
  const Index n = a.n;
  bool strict = false;
  for (Index i = 0; i < n; ++i) {
    const double off = std::abs(a.lower[i]) + std::abs(a.upper[i]);
    const double dg = std::abs(a.diag[i]);
    if (dg < off) return false;
    if (dg > off) strict = true;
  }
  return strict;
}

double matrix_inf_norm(const GeneralTridiagonal& a) {
  double worst = 0.0;
  for (Index i = 0; i < a.n; ++i)
    worst = std::max(worst, std::abs(a.lower[i]) + std::abs(a.diag[i]) + std::abs(a.upper[i]));
  return worst;
}

double vector_inf_norm(std::span<const double> v) {
  double worst = 0.0;
  for (double x : v) worst = std::max(worst, std::abs(x));
  return worst;
}

std::vector<double> robust_solve(const GeneralTridiagonal& a, std::span<const double> f) {
  if (is_diagonally_dominant(a)) return thomas_solve(a, f);
  return nonmonotonic_solve(a, f);
}

}  // namespace dicho
