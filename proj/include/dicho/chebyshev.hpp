#ifndef DICHO_CHEBYSHEV_HPP
#define DICHO_CHEBYSHEV_HPP

#include "dicho/errors.hpp"
#include "dicho/tridiag.hpp"

namespace dicho {

// Chebyshev polynomials of the second kind U_n(x).
//
// Inside [-1,1] the three-term recurrence is bounded (|U_k| <= k+1) and is
// the only evaluation path provided. Outside, U_n grows like eta^{n+1} with
// eta = |x| + sqrt(x^2-1), so the closed form
//     U_n(x) = (eta^{n+1} - eta^{-(n+1)}) / (2 sqrt(x^2-1))
// is used up to the overflow degree N_0, and a log-magnitude representation
// beyond it. Negative arguments reduce through U_n(-x) = (-1)^n U_n(x).

enum class ChebRegime { Inside, Outside };

struct ChebArgument {
  double x = 0.0;
  double eta = 0.0;  // |x| + sqrt(x^2-1), populated in the Outside regime only
  ChebRegime regime = ChebRegime::Inside;
};

ChebArgument classify_cheb_argument(double x);

/** U_n(x) by the three-term recurrence; any real x, n >= -1.
 *  Throws Err::Overflow if a partial value leaves the finite range. */
double u_recurrence(Index n, double x);

/** U_n(x) by the eta closed form; requires |x| >= 1 and (n+1) ln eta within
 *  the double exponent range. x = +-1 returns the limit (n+1)(+-1)^n. */
double u_closed(Index n, double x);

struct SignedLog {
  double log_abs = 0.0;  // -inf encodes an exact zero
  int sign = 0;          // -1, 0, +1
  double value() const;  // exp(log_abs)*sign; Err::Overflow if too large
};

/** ln|U_n(x)| and sign without forming the (possibly overflowing) value.
 *  Requires |x| > 1; exact at every degree (the eta^{-(n+1)} correction is
 *  kept until it underflows). */
SignedLog u_log_magnitude(Index n, double x);

/** Largest degree for which u_closed stays below the double range:
 *  N_0 = floor(ln(DBL_MAX)/ln eta) - 1. Requires |x| > 1. */
Index n_overflow_threshold(double x);

}  // namespace dicho

#endif
