#ifndef DICHO_PRELIMINARY_HPP
#define DICHO_PRELIMINARY_HPP

#include <complex>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dicho/tridiag.hpp"

namespace dicho::prelim {

// Contiguous partition of row indices 0..n-1 across p ranks, every block
// holding at least two rows.
struct BlockLayout {
  int p = 1;
  Index n = 0;
  std::vector<Index> first, last;  // inclusive global bounds per rank

  Index block_size(int rank) const { return last[rank] - first[rank] + 1; }
};

BlockLayout build_layout(Index n, int p);

// Global indices at which a rank's exterior vectors Z^{L,R} will be read by
// the dichotomy engine: one boundary index per reduction root on the rank's
// path through the group recursion, the neighbour indices first-1 / last+1
// used for the delta exchange, and the rank's own boundary anchors.
struct ZIndexRequest {
  std::vector<Index> left;   // indices <= first (Z^L domain)
  std::vector<Index> right;  // indices >= last  (Z^R domain)
};

ZIndexRequest required_z_indices(const BlockLayout& layout, int rank);

// Number of dichotomy levels until every rank has solved its boundary
// components (depth of the middle-split recursion).
int dichotomy_levels(int p);

struct AuxVectors {
  int rank = 0;
  Index first = 0, last = 0;
  std::unordered_map<Index, double> zL_at, zR_at;  // global index -> value
  std::vector<double> gL, gR;                      // Green rows over the block
  double ratio_first = 0.0;  // gL[last]/gR[last],  transfers last -> first
  double ratio_last = 0.0;   // gR[first]/gL[first], transfers first -> last

  double zl(Index global) const;
  double zr(Index global) const;
};

/** O(n) path for arbitrary matrices: two full-length transposed solves for
 *  the Green rows and one exterior solve per side for the Z values. */
AuxVectors prelim_general(const GeneralTridiagonal& a, const BlockLayout& layout, int rank,
                          const ZIndexRequest* request = nullptr);

/** Economical Toeplitz path: every required component in O(1) through the
 *  closed-form inverse, O(n/p + log2 p) per rank in total.
 *
 *  Extension point: matrices that deviate from constant bands only in the
 *  two corner diagonal entries also have O(1) closed-form inverse elements;
 *  a builder for that class can sit beside this one and reuse the same
 *  request/AuxVectors plumbing. */
AuxVectors prelim_toeplitz_q(const ToeplitzTridiagonal& t, const BlockLayout& layout, int rank,
                             const ZIndexRequest* request = nullptr);

/** Second-difference Helmholtz path: the system (y_{i+1}-2y_i+y_{i-1})/h^2
 *  + lambda y_i = -f_i scaled by h^2 to tridiag{1, lambda h^2 - 2, 1} with
 *  right side -h^2 f. Components come from Chebyshev U_n ratios; endpoint
 *  Green values switch to the overflow-safe eta form beyond the overflow
 *  degree, interior Green values from two local block solves. */
AuxVectors prelim_helmholtz_cheb(double lambda, double h, Index n, const BlockLayout& layout,
                                 int rank, const ZIndexRequest* request = nullptr);

ToeplitzTridiagonal helmholtz_toeplitz(double lambda, double h, Index n);

/** Endpoint Green values from the four-term eta-exponent sums (every
 *  exponent is <= 0, so no intermediate can overflow). 0-based indices over
 *  a system of n unknowns; requires |x| > 1 and first <= i <= last. */
std::pair<double, double> green_endpoints_overflow_safe(double x, Index n, Index first,
                                                        Index last, Index i);

// Closed-form machinery, exposed for direct verification.
std::pair<std::complex<double>, std::complex<double>> characteristic_roots(
    const ToeplitzTridiagonal& t);
double toeplitz_inverse_entry(const ToeplitzTridiagonal& t, Index row, Index col);  // 0-based

}  // namespace dicho::prelim

#endif
