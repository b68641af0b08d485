#include "dicho/cost_model.hpp"

#include <cmath>

namespace dicho {

namespace {

double rounded_log2(int p, bool* exact) {
  const double raw = std::log2(static_cast<double>(p));
  const double up = std::ceil(raw);
  *exact = (std::abs(raw - up) < 1e-12) || (p & (p - 1)) == 0;
  return (p & (p - 1)) == 0 ? raw : up;
}

}  // namespace

CostEstimate cost_model(const CostParams& params) {
  if (params.p < 2) raise(Err::Config, "cost model needs p >= 2");
  if (params.alpha < 0 || params.beta < 0 || params.gamma < 0 || params.l < 0)
    raise(Err::Config, "cost parameters must be nonnegative");

  CostEstimate est;
  est.log2p = rounded_log2(params.p, &est.pow2);
  const double lg = est.log2p;
  const double p = static_cast<double>(params.p);
  est.t_dichotomy = params.alpha * (lg + 1.0) * lg +
                    params.l * (lg - (p - 1.0) / p) * (params.gamma + 2.0 * params.beta);
  est.t_cyclic = 2.0 * lg * (params.alpha + params.l * params.beta + params.l * params.gamma);
  return est;
}

double dichotomy_cost_approx(const CostParams& params) {
  if (params.p < 2) raise(Err::Config, "cost model needs p >= 2");
  bool exact;
  const double lg = rounded_log2(params.p, &exact);
  return 2.0 * lg * (params.l * params.beta + params.l * params.gamma / 2.0);
}

}  // namespace dicho
