#ifndef DICHO_POISSON_HPP
#define DICHO_POISSON_HPP

#include <iosfwd>

#include "dicho/engine.hpp"
#include "dicho/tridiag.hpp"

namespace dicho::poisson {

// Interior values of a uniform Dirichlet grid on [0,1]^2, row-major
// values[i1*n2 + i2]; the boundary is held implicitly at zero and
// h*(n+1) = 1 in each dimension.
struct Grid2D {
  Index n1 = 0, n2 = 0;
  double h = 0.0;
  std::vector<double> values;

  double& at(Index i1, Index i2) { return values[static_cast<size_t>(i1 * n2 + i2)]; }
  double at(Index i1, Index i2) const { return values[static_cast<size_t>(i1 * n2 + i2)]; }
};

Grid2D make_grid(Index n, double fill = 0.0);  // square grid, h = 1/(n+1)

// Involutive type-I discrete sine transform,
//   dst(v)_k = sqrt(2/(n+1)) * sum_j v_j sin(jk pi/(n+1)),
// so dst(dst(v)) = v and the 2-norm is preserved. dst() dispatches to the
// FFT path when 2(n+1) is a power of two and to the direct evaluation
// otherwise.
std::vector<double> dst(std::span<const double> v);
std::vector<double> dst_direct(std::span<const double> v);
std::vector<double> dst_fast(std::span<const double> v);  // Err::Config if size unsupported
bool dst_fast_supported(Index n);

// k-th eigenvalue of the 1-D second-difference Dirichlet operator:
// mu_k = (4/h^2) sin^2(k pi h / 2), 1 <= k <= n, h = 1/(n+1).
double mode_shift(Index k, double h, Index n);

struct PoissonOptions {
  engine::SolveOptions solve;
  engine::PrelimKind prelim = engine::PrelimKind::HelmholtzCheb;
  bool parallel_modes = true;  // OpenMP over the independent mode systems
};

/** Solves laplace(u) + lambda u = f on the unit square with zero Dirichlet
 *  boundary by a sine transform along dimension 2 and one tridiagonal
 *  dichotomy solve per mode. */
Grid2D poisson_solve(const Grid2D& f, double lambda, int p, const PoissonOptions& opt = {});

// max | 5-point-scheme(u) + lambda u - f | over interior points
double five_point_residual_inf(const Grid2D& u, const Grid2D& f, double lambda);

void write_grid(std::ostream& out, const Grid2D& g);
Grid2D read_grid(std::istream& in);

struct ConvergenceRow {
  double h;
  double inf_error;
  double l2_error;
  double order;  // NaN on the first row
};

/** Convergence study against u = sin(pi x) sin(pi y) with matching source
 *  term; grids n = 2^k - 1 for k in [from_exp, to_exp]. */
std::vector<ConvergenceRow> convergence_study(double lambda, int p, int from_exp, int to_exp,
                                              const PoissonOptions& opt = {});

void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceRow>& rows);

}  // namespace dicho::poisson

#endif
