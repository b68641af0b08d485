#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dicho/chebyshev.hpp"

using namespace dicho;

TEST_CASE("recurrence base cases and frozen values") {
  for (double x : {-2.0, 0.3, 1.0, 5.0}) CHECK(u_recurrence(0, x) == 1.0);
  CHECK(u_recurrence(-1, 2.0) == 0.0);
  // U_1 = 4, U_2 = 15, U_3 = 56 at x = 2
  CHECK(u_recurrence(3, 2.0) == doctest::Approx(56.0));
  CHECK(u_recurrence(10, 1.0) == doctest::Approx(11.0));
}

TEST_CASE("closed form matches the recurrence and the limits") {
  CHECK(u_closed(2, 2.0) == doctest::Approx(15.0).epsilon(1e-13));
  CHECK(u_closed(5, 1.0) == 6.0);
  CHECK(u_closed(4, -1.5) ==
        doctest::Approx(u_recurrence(4, -1.5)).epsilon(1e-12));
  CHECK_THROWS_AS((void)u_closed(3, 0.5), SolverError);
}

TEST_CASE("closed form vs recurrence across the sampled grid") {
  for (Index n = 0; n <= 500; ++n) {
    for (double x : {1.0001, -1.0001, 1.5, -1.5, 2.0, -2.0, 5.0, -5.0}) {
      const double ax = std::abs(x);
      const double log_eta = std::log(ax + std::sqrt(ax * ax - 1.0));
      if (static_cast<double>(n + 1) * log_eta >= 700.0) continue;
      const double rec = u_recurrence(n, x);
      const double cls = u_closed(n, x);
      CHECK(std::abs(rec - cls) <= 1e-10 * std::max(1.0, std::abs(rec)));
    }
  }
}

TEST_CASE("interval-end identities hold on both paths") {
  for (Index n : {0, 1, 2, 17, 100, 499}) {
    const double expected = static_cast<double>(n + 1);
    const double sign = (n % 2 == 0) ? 1.0 : -1.0;
    CHECK(u_recurrence(n, 1.0) == expected);
    CHECK(u_recurrence(n, -1.0) == sign * expected);
    CHECK(u_closed(n, 1.0) == expected);
    CHECK(u_closed(n, -1.0) == sign * expected);
  }
}

TEST_CASE("signed-log representation") {
  const auto sl = u_log_magnitude(3, 2.0);
  CHECK(sl.sign == 1);
  CHECK(sl.log_abs == doctest::Approx(std::log(56.0)).epsilon(1e-12));

  // far beyond the double range, still finite in log form
  const double x = 1.0005;
  const auto big = u_log_magnitude(100000, x);
  const double eta = x + std::sqrt(x * x - 1.0);
  const double expect =
      100001.0 * std::log(eta) - std::log(2.0 * std::sqrt(x * x - 1.0));
  CHECK(big.log_abs == doctest::Approx(expect).epsilon(1e-12));
  CHECK(std::isfinite(big.log_abs));

  // sign pattern for negative arguments matches the recurrence
  for (Index n = 0; n <= 20; ++n) {
    const double rec = u_recurrence(n, -1.5);
    const auto lg = u_log_magnitude(n, -1.5);
    CHECK(lg.sign == ((rec > 0) ? 1 : -1));
    CHECK(std::exp(lg.log_abs) == doctest::Approx(std::abs(rec)).epsilon(1e-10));
  }

  CHECK_THROWS_AS((void)u_log_magnitude(5, 0.9), SolverError);
  CHECK_THROWS_AS((void)u_log_magnitude(5, 1.0), SolverError);
}

TEST_CASE("exp of the log form matches the closed form where finite") {
  for (Index n : {0, 1, 5, 50, 400}) {
    for (double x : {1.0001, 1.5, -2.0, 3.0}) {
      const double ax = std::abs(x);
      if (static_cast<double>(n + 1) * std::log(ax + std::sqrt(ax * ax - 1.0)) >= 700.0)
        continue;
      const auto lg = u_log_magnitude(n, x);
      CHECK(lg.value() == doctest::Approx(u_closed(n, x)).epsilon(1e-10));
    }
  }
}

TEST_CASE("dominant-term truncation error is bounded by eta^(-2(n+1))") {
  // checked at small degrees, where the truncation error still dominates
  // double roundoff
  for (double x : {1.5, 2.0, 1.05}) {
    const double eta = x + std::sqrt(x * x - 1.0);
    for (Index n = 0; n <= 30; ++n) {
      const double bound = 2.0 * std::pow(eta, -2.0 * static_cast<double>(n + 1));
      if (bound > 1.0) continue;  // bound valid once eta^{2(n+1)} >= 2
      if (bound < 1e-12) break;
      const double exact = u_recurrence(n, x);
      // one-term form eta^{n+1} / (2 sqrt(x^2-1))
      const double approx = std::exp(static_cast<double>(n + 1) * std::log(eta) -
                                     std::log(2.0 * std::sqrt(x * x - 1.0)));
      CHECK(std::abs(approx - exact) <= (bound + 1e-13) * std::abs(exact));
    }
  }
}

TEST_CASE("overflow threshold marks the edge of the representable range") {
  const double x = 1.0005;
  const Index n0 = n_overflow_threshold(x);
  const double eta = x + std::sqrt(x * x - 1.0);
  // ln(DBL_MAX) shifted by the 1/(2 sqrt(x^2-1)) prefactor when it amplifies
  const double budget =
      709.782712893384 + std::min(0.0, std::log(2.0 * std::sqrt(x * x - 1.0)));
  const double direct = std::floor(budget / std::log(eta)) - 1.0;
  CHECK(std::abs(static_cast<double>(n0) - direct) <= 2.0);
  CHECK(std::isfinite(u_closed(n0, x)));
  CHECK_THROWS_AS((void)u_closed(n0 + 64, x), SolverError);

  // monotone decreasing in |x|
  CHECK(n_overflow_threshold(1.0005) > n_overflow_threshold(1.005));
  CHECK(n_overflow_threshold(1.005) > n_overflow_threshold(1.5));

  // recurrence overflows past the boundary as well
  CHECK_THROWS_AS((void)u_recurrence(n0 + 4096, x), SolverError);
}

TEST_CASE("argument classification") {
  CHECK(classify_cheb_argument(0.3).regime == ChebRegime::Inside);
  CHECK(classify_cheb_argument(1.0).regime == ChebRegime::Inside);
  const auto out = classify_cheb_argument(-2.0);
  CHECK(out.regime == ChebRegime::Outside);
  CHECK(out.eta == doctest::Approx(2.0 + std::sqrt(3.0)));
  CHECK(out.eta >= 1.0);
}
