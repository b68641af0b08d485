#ifndef DICHO_TRIDIAG_HPP
#define DICHO_TRIDIAG_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dicho/errors.hpp"

namespace dicho {

using Index = std::int64_t;

// Tridiagonal matrix stored by bands, row i reading
//   lower[i]*x[i-1] + diag[i]*x[i] + upper[i]*x[i+1] = f[i].
// Boundary entries lower[0] and upper[n-1] are exactly zero.
struct GeneralTridiagonal {
  Index n = 0;
  std::vector<double> lower, diag, upper;
};

// Constant-band tridiagonal tridiag{t_minus, t_zero, t_plus}.
struct ToeplitzTridiagonal {
  Index n = 0;
  double t_minus = 0.0, t_zero = 0.0, t_plus = 0.0;
};

// Validating constructors; both throw Err::Config on malformed input.
GeneralTridiagonal make_general(std::vector<double> lower, std::vector<double> diag,
                                std::vector<double> upper);
GeneralTridiagonal constant_tridiagonal(Index n, double lo, double di, double up);
GeneralTridiagonal to_general(const ToeplitzTridiagonal& t);
GeneralTridiagonal transpose(const GeneralTridiagonal& a);

struct SolveReport {
  std::vector<double> solution;
  double residual_inf = 0.0;
  bool dominant = false;
  std::vector<std::string> warnings;

  // solver diagnostics (filled by the dichotomy engine)
  double gamma = 0.0;        // max |Z| component actually used
  double error_bound = 0.0;  // gamma^levels * machine epsilon
  int levels = 0;
  int ranks = 1;
  double step1_seconds = 0.0;  // preliminary build (zero when served from cache)
  double step2_seconds = 0.0;  // dichotomy process + local solves
  std::uint64_t ops_per_rank_max = 0;
  bool prelim_cached = false;
};

/** Sequential Thomas algorithm, O(n). Throws Err::ZeroPivot when a forward
 *  elimination pivot falls below `pivot_floor`; callers without diagonal
 *  dominance should use nonmonotonic_solve instead. */
std::vector<double> thomas_solve(const GeneralTridiagonal& a, std::span<const double> f,
                                 double pivot_floor = 1e-300);

/** Banded elimination with partial pivoting restricted to the band (one
 *  extra superdiagonal of fill-in). Stable without diagonal dominance. */
std::vector<double> nonmonotonic_solve(const GeneralTridiagonal& a, std::span<const double> f);

/** Ground-truth reference: dense Gaussian elimination with partial pivoting
 *  for moderate n, banded Givens QR beyond that. Both routes are independent
 *  of the Thomas forward/back substitution they are used to check. */
std::vector<double> dense_solve_oracle(const GeneralTridiagonal& a, std::span<const double> f);

std::vector<double> apply(const GeneralTridiagonal& a, std::span<const double> x);
double residual_inf(const GeneralTridiagonal& a, std::span<const double> x,
                    std::span<const double> f);

// |b_i| >= |a_i| + |c_i| on every row, at least one inequality strict.
bool is_diagonally_dominant(const GeneralTridiagonal& a);

double matrix_inf_norm(const GeneralTridiagonal& a);
double vector_inf_norm(std::span<const double> v);

// thomas_solve when the matrix is diagonally dominant, nonmonotonic_solve
// otherwise.
std::vector<double> robust_solve(const GeneralTridiagonal& a, std::span<const double> f);

}  // namespace dicho

#endif
