#include "dicho/poisson.hpp"

#include <cmath>
#include <complex>
#include <istream>
#include <limits>
#include <ostream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dicho::poisson {

Grid2D make_grid(Index n, double fill) {
  if (n < 1) raise(Err::Config, "grid needs at least one interior point");
  Grid2D g;
  g.n1 = g.n2 = n;
  g.h = 1.0 / static_cast<double>(n + 1);
  g.values.assign(static_cast<size_t>(n * n), fill);
  return g;
}

std::vector<double> dst_direct(std::span<const double> v) {
  const Index n = static_cast<Index>(v.size());
  if (n < 1) raise(Err::Config, "empty transform");
  const double norm = std::sqrt(2.0 / static_cast<double>(n + 1));
  std::vector<double> out(static_cast<size_t>(n), 0.0);
  for (Index k = 1; k <= n; ++k) {
    double s = 0.0;
    for (Index j = 1; j <= n; ++j)
      s += v[j - 1] * std::sin(static_cast<double>(j * k) * M_PI / static_cast<double>(n + 1));
    out[k - 1] = norm * s;
  }
  return out;
}

bool dst_fast_supported(Index n) {
  const Index m = 2 * (n + 1);
  return m >= 2 && (m & (m - 1)) == 0;
}

namespace {

// iterative radix-2 complex FFT, in place, size a power of two
void fft_pow2(std::vector<std::complex<double>>& a) {
  const size_t n = a.size();
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * M_PI / static_cast<double>(len);
    const std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0);
      for (size_t j = 0; j < len / 2; ++j) {
        const std::complex<double> u = a[i + j];
        const std::complex<double> t = w * a[i + j + len / 2];
        a[i + j] = u + t;
        a[i + j + len / 2] = u - t;
        w *= wl;
      }
    }
  }
}

}  // namespace

std::vector<double> dst_fast(std::span<const double> v) {
  const Index n = static_cast<Index>(v.size());
  if (!dst_fast_supported(n)) raise(Err::Config, "fast path needs 2(n+1) a power of two", n);
  const size_t m = static_cast<size_t>(2 * (n + 1));
  // odd extension [0, v_1..v_n, 0, -v_n..-v_1]; DST-I falls out of the
  // imaginary part of the length-2(n+1) DFT
  std::vector<std::complex<double>> buf(m, 0.0);
  for (Index j = 1; j <= n; ++j) {
    buf[static_cast<size_t>(j)] = v[j - 1];
    buf[m - static_cast<size_t>(j)] = -v[j - 1];
  }
  fft_pow2(buf);
  const double norm = std::sqrt(2.0 / static_cast<double>(n + 1));
  std::vector<double> out(static_cast<size_t>(n));
  for (Index k = 1; k <= n; ++k) out[k - 1] = -0.5 * norm * buf[static_cast<size_t>(k)].imag();
  return out;
}

std::vector<double> dst(std::span<const double> v) {
  if (dst_fast_supported(static_cast<Index>(v.size()))) return dst_fast(v);
  return dst_direct(v);
}

double mode_shift(Index k, double h, Index n) {
  if (k < 1 || k > n) raise(Err::Config, "mode index out of range", k);
  const double s = std::sin(static_cast<double>(k) * M_PI * h / 2.0);
  return 4.0 / (h * h) * s * s;
}

namespace {

void check_grid(const Grid2D& g) {
  if (g.n1 < 1 || g.n2 < 1) raise(Err::Config, "grid needs interior points");
  if (static_cast<Index>(g.values.size()) != g.n1 * g.n2)
    raise(Err::Config, "grid storage size mismatch");
  if (std::abs(g.h * static_cast<double>(g.n1 + 1) - 1.0) > 1e-12 ||
      std::abs(g.h * static_cast<double>(g.n2 + 1) - 1.0) > 1e-12)
    raise(Err::Config, "mesh width must satisfy h*(n+1) = 1");
}

void dst_rows_inplace(Grid2D& g) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (g.n1 > 32 && !omp_in_parallel())
#endif
  for (Index i = 0; i < g.n1; ++i) {
    const std::span<const double> row(g.values.data() + i * g.n2, static_cast<size_t>(g.n2));
    auto transformed = dst(row);
    std::copy(transformed.begin(), transformed.end(), g.values.begin() + i * g.n2);
  }
}

}  // namespace

Grid2D poisson_solve(const Grid2D& f, double lambda, int p, const PoissonOptions& opt) {
  check_grid(f);
  const Index n1 = f.n1, n2 = f.n2;
  const double h = f.h;

  Grid2D hat = f;
  dst_rows_inplace(hat);  // forward transform along dimension 2

  Grid2D uhat = f;
  std::fill(uhat.values.begin(), uhat.values.end(), 0.0);

  std::vector<std::exception_ptr> errors(static_cast<size_t>(n2));
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (opt.parallel_modes && !omp_in_parallel())
#endif
  for (Index k = 1; k <= n2; ++k) {
    try {
      const double lambda_k = lambda - mode_shift(k, h, n2);
      engine::SolveOptions sopt = opt.solve;
      sopt.prelim = opt.prelim;
      engine::DichotomySolver solver =
          (opt.prelim == engine::PrelimKind::General)
              ? engine::DichotomySolver(to_general(prelim::helmholtz_toeplitz(lambda_k, h, n1)),
                                        p, sopt)
              : engine::DichotomySolver::helmholtz(lambda_k, h, n1, p, sopt);

      // (Delta + lambda) u = f carries the source with the opposite sign of
      // the classical -f convention, so the h^2-scaled right side is +h^2 f
      std::vector<double> rhs(static_cast<size_t>(n1));
      for (Index i = 0; i < n1; ++i) rhs[i] = h * h * hat.at(i, k - 1);
      const SolveReport rep = solver.solve(rhs);
      for (Index i = 0; i < n1; ++i) uhat.at(i, k - 1) = rep.solution[i];
    } catch (...) {
      errors[static_cast<size_t>(k - 1)] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  dst_rows_inplace(uhat);  // involutive inverse
  return uhat;
}

double five_point_residual_inf(const Grid2D& u, const Grid2D& f, double lambda) {
  check_grid(u);
  check_grid(f);
  if (u.n1 != f.n1 || u.n2 != f.n2) raise(Err::Config, "grid shape mismatch");
  const double inv_h2 = 1.0 / (u.h * u.h);
  double worst = 0.0;
  for (Index i = 0; i < u.n1; ++i) {
    for (Index j = 0; j < u.n2; ++j) {
      const double left = (j > 0) ? u.at(i, j - 1) : 0.0;
      const double right = (j + 1 < u.n2) ? u.at(i, j + 1) : 0.0;
      const double down = (i > 0) ? u.at(i - 1, j) : 0.0;
      const double up = (i + 1 < u.n1) ? u.at(i + 1, j) : 0.0;
      const double lap = (left + right + down + up - 4.0 * u.at(i, j)) * inv_h2;
      worst = std::max(worst, std::abs(lap + lambda * u.at(i, j) - f.at(i, j)));
    }
  }
  return worst;
}

void write_grid(std::ostream& out, const Grid2D& g) {
  out.precision(17);
  out << g.n1 << ' ' << g.n2 << ' ' << g.h << '\n';
  for (Index i = 0; i < g.n1; ++i) {
    for (Index j = 0; j < g.n2; ++j) out << g.at(i, j) << '\n';
  }
  if (!out) raise(Err::Io, "grid write failed");
}

Grid2D read_grid(std::istream& in) {
  Grid2D g;
  if (!(in >> g.n1 >> g.n2 >> g.h)) raise(Err::Io, "grid header unreadable");
  if (g.n1 < 1 || g.n2 < 1) raise(Err::Io, "grid header invalid");
  g.values.resize(static_cast<size_t>(g.n1 * g.n2));
  for (auto& v : g.values)
    if (!(in >> v)) raise(Err::Io, "grid values truncated");
  check_grid(g);
  return g;
}

std::vector<ConvergenceRow> convergence_study(double lambda, int p, int from_exp, int to_exp,
                                              const PoissonOptions& opt) {
  if (from_exp < 2 || to_exp < from_exp) raise(Err::Config, "bad grid-study range");
  std::vector<ConvergenceRow> rows;
  double prev_inf = 0.0;
  for (int e = from_exp; e <= to_exp; ++e) {
    const Index n = (Index{1} << e) - 1;
    Grid2D f = make_grid(n);
    const double h = f.h;
    // manufactured u = sin(pi x) sin(pi y):  laplace(u) + lambda u = (lambda - 2 pi^2) u
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j)
        f.at(i, j) = (lambda - 2.0 * M_PI * M_PI) *
                     std::sin(M_PI * static_cast<double>(i + 1) * h) *
                     std::sin(M_PI * static_cast<double>(j + 1) * h);
    const Grid2D u = poisson_solve(f, lambda, p, opt);

    double inf_err = 0.0, l2 = 0.0;
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < n; ++j) {
        const double exact = std::sin(M_PI * static_cast<double>(i + 1) * h) *
                             std::sin(M_PI * static_cast<double>(j + 1) * h);
        const double d = u.at(i, j) - exact;
        inf_err = std::max(inf_err, std::abs(d));
        l2 += d * d;
      }
    }
    l2 = std::sqrt(l2 * h * h);
    ConvergenceRow row{h, inf_err, l2, std::numeric_limits<double>::quiet_NaN()};
    if (!rows.empty()) row.order = std::log2(prev_inf / inf_err);
    prev_inf = inf_err;
    rows.push_back(row);
  }
  return rows;
}

void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceRow>& rows) {
  out.precision(17);
  out << "h,inf_error,l2_error,order\n";
  for (const auto& r : rows) {
    out << r.h << ',' << r.inf_error << ',' << r.l2_error << ',';
    if (std::isnan(r.order))
      out << '\n';
    else
      out << r.order << '\n';
  }
  if (!out) raise(Err::Io, "csv write failed");
}

}  // namespace dicho::poisson
