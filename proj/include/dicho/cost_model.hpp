#ifndef DICHO_COST_MODEL_HPP
#define DICHO_COST_MODEL_HPP

#include "dicho/errors.hpp"

namespace dicho {

// alpha: latency per message, beta: per-real transfer time, gamma: time per
// addition, l: number of simultaneously solved series.
struct CostParams {
  double alpha = 0.0;
  double beta = 1.0;
  double gamma = 1.0;
  double l = 1.0;
  int p = 2;
};

struct CostEstimate {
  double t_dichotomy = 0.0;
  double t_cyclic = 0.0;
  double log2p = 0.0;
  bool pow2 = true;  // false: log2 rounded up, caller should warn
};

// T_dichotomy = alpha (log2 p + 1) log2 p + l (log2 p - (p-1)/p)(gamma + 2 beta)
// T_cyclic    = 2 log2 p (alpha + l beta + l gamma)
CostEstimate cost_model(const CostParams& params);

// the short form 2 log2(p) (l beta + l gamma / 2)
double dichotomy_cost_approx(const CostParams& params);

}  // namespace dicho

#endif
