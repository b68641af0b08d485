#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dicho/chebyshev.hpp"
#include "dicho/preliminary.hpp"
#include "test_util.hpp"

using namespace dicho;
using namespace dicho::prelim;

namespace {

// dense inverse column via the oracle: (A^{-1}) e_k
std::vector<double> inverse_column(const GeneralTridiagonal& a, Index k) {
  std::vector<double> e(static_cast<size_t>(a.n), 0.0);
  e[k] = 1.0;
  return dense_solve_oracle(a, e);
}

// row k of A^{-1} = column k of (A^T)^{-1}
std::vector<double> inverse_row(const GeneralTridiagonal& a, Index k) {
  return inverse_column(transpose(a), k);
}

ZIndexRequest full_request(const BlockLayout& layout, int rank) {
  ZIndexRequest req;
  for (Index i = 0; i <= layout.first[rank]; ++i) req.left.push_back(i);
  for (Index i = layout.last[rank]; i < layout.n; ++i) req.right.push_back(i);
  return req;
}

}  // namespace

TEST_CASE("layout balancing and limits") {
  const auto l1 = build_layout(8, 2);
  CHECK(l1.block_size(0) == 4);
  CHECK(l1.block_size(1) == 4);
  CHECK(l1.first[0] == 0);
  CHECK(l1.last[0] == 3);
  CHECK(l1.first[1] == 4);
  CHECK(l1.last[1] == 7);

  const auto l2 = build_layout(10, 3);
  CHECK(l2.block_size(0) == 4);
  CHECK(l2.block_size(1) == 3);
  CHECK(l2.block_size(2) == 3);
  for (int r = 0; r + 1 < 3; ++r) CHECK(l2.first[r + 1] == l2.last[r] + 1);

  try {
    (void)build_layout(5, 3);
    FAIL("expected TooManyRanks");
  } catch (const SolverError& e) {
    CHECK(e.kind() == Err::TooManyRanks);
  }
}

TEST_CASE("closed-form inverse entries match the dense oracle") {
  // frozen: tridiag{1,4,1}, n=3, column 2
  const ToeplitzTridiagonal t{3, 1.0, 4.0, 1.0};
  CHECK(toeplitz_inverse_entry(t, 0, 1) == doctest::Approx(-1.0 / 14).epsilon(1e-13));
  CHECK(toeplitz_inverse_entry(t, 1, 1) == doctest::Approx(2.0 / 7).epsilon(1e-13));
  CHECK(toeplitz_inverse_entry(t, 2, 1) == doctest::Approx(-1.0 / 14).epsilon(1e-13));

  // asymmetric case, every entry against the dense oracle
  const ToeplitzTridiagonal s{12, 1.0, 4.0, 2.0};
  const auto sg = to_general(s);
  for (Index k = 0; k < s.n; ++k) {
    const auto col = inverse_column(sg, k);
    for (Index i = 0; i < s.n; ++i)
      CHECK(toeplitz_inverse_entry(s, i, k) == doctest::Approx(col[i]).epsilon(1e-11));
  }
}

TEST_CASE("closed-form solve equals band conversion plus Thomas") {
  const ToeplitzTridiagonal t{24, 0.7, -3.1, 1.3};
  const auto a = to_general(t);
  const auto f = testutil::random_vec(24, 4711);
  const auto x_thomas = thomas_solve(a, f);
  for (Index i = 0; i < t.n; ++i) {
    double xi = 0.0;
    for (Index k = 0; k < t.n; ++k) xi += toeplitz_inverse_entry(t, i, k) * f[k];
    CHECK(xi == doctest::Approx(x_thomas[i]).epsilon(1e-11));
  }
}

TEST_CASE("closed form detects degenerate roots and missing solutions") {
  const BlockLayout layout = build_layout(8, 2);
  try {
    (void)prelim_toeplitz_q({8, -1.0, 2.0, -1.0}, layout, 0);
    FAIL("expected DegenerateRoots");
  } catch (const SolverError& e) {
    CHECK(e.kind() == Err::DegenerateRoots);
  }

  // unit-circle roots with r^{n+1} = 1: t0 = -2 cos(pi/4), n = 7
  const ToeplitzTridiagonal sing{7, 1.0, -2.0 * std::cos(M_PI / 4.0), 1.0};
  try {
    (void)toeplitz_inverse_entry(sing, 0, 0);
    FAIL("expected NoSolution");
  } catch (const SolverError& e) {
    CHECK(e.kind() == Err::NoSolution);
  }

  try {
    (void)characteristic_roots({4, 1.0, 2.0, 0.0});
    FAIL("expected DomainError for t_plus = 0");
  } catch (const SolverError& e) {
    CHECK(e.kind() == Err::DomainError);
  }

  // globally solvable but the rank-1 exterior rows [1, ml1-1] resonate:
  // theta = pi/9 makes the order-8 left subsystem singular at ml1 = 9
  const ToeplitzTridiagonal sub_sing{16, 1.0, -2.0 * std::cos(M_PI / 9.0), 1.0};
  (void)toeplitz_inverse_entry(sub_sing, 0, 0);  // the full system is fine
  try {
    (void)prelim_toeplitz_q(sub_sing, build_layout(16, 2), 1);
    FAIL("expected Singular for the left exterior subsystem");
  } catch (const SolverError& e) {
    CHECK(e.kind() == Err::Singular);
  }
}

TEST_CASE("general preliminary: Green rows are rows of the inverse") {
  const auto a = testutil::random_dominant(24, 909);
  SUBCASE("single block spans the whole system") {
    const auto layout = build_layout(24, 1);
    const auto aux = prelim_general(a, layout, 0);
    const auto row_first = inverse_row(a, 0);
    const auto row_last = inverse_row(a, 23);
    for (Index j = 0; j < 24; ++j) {
      CHECK(aux.gL[j] == doctest::Approx(row_first[j]).epsilon(1e-10));
      CHECK(aux.gR[j] == doctest::Approx(row_last[j]).epsilon(1e-10));
    }
  }
  SUBCASE("multi-rank blocks hold the restricted rows") {
    const auto layout = build_layout(24, 3);
    for (int r = 0; r < 3; ++r) {
      const auto aux = prelim_general(a, layout, r);
      const auto row_first = inverse_row(a, layout.first[r]);
      const auto row_last = inverse_row(a, layout.last[r]);
      for (Index j = layout.first[r]; j <= layout.last[r]; ++j) {
        CHECK(aux.gL[j - layout.first[r]] == doctest::Approx(row_first[j]).epsilon(1e-10));
        CHECK(aux.gR[j - layout.first[r]] == doctest::Approx(row_last[j]).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("exterior vectors satisfy their defining equations") {
  const auto a = testutil::random_dominant(64, 7171);
  const auto layout = build_layout(64, 3);
  for (int r = 0; r < 3; ++r) {
    const auto req = full_request(layout, r);
    const auto aux = prelim_general(a, layout, r, &req);
    CHECK(aux.zl(layout.first[r]) == 1.0);
    CHECK(aux.zr(layout.last[r]) == 1.0);

    // rows 0..first-1 of A applied to (Z^L, 1) must vanish
    const Index first = layout.first[r], last = layout.last[r];
    for (Index i = 0; i < first; ++i) {
      double s = a.diag[i] * aux.zl(i);
      if (i > 0) s += a.lower[i] * aux.zl(i - 1);
      s += a.upper[i] * aux.zl(i + 1);
      CHECK(std::abs(s) < 1e-11 * matrix_inf_norm(a));
    }
    for (Index i = last + 1; i < 64; ++i) {
      double s = a.diag[i] * aux.zr(i);
      s += a.lower[i] * aux.zr(i - 1);
      if (i + 1 < 64) s += a.upper[i] * aux.zr(i + 1);
      CHECK(std::abs(s) < 1e-11 * matrix_inf_norm(a));
    }

    // interior rows of A^T G = e restricted to the block
    for (Index j = first + 1; j < last; ++j) {
      double sl = a.upper[j - 1] * aux.gL[j - 1 - first] + a.diag[j] * aux.gL[j - first] +
                  a.lower[j + 1] * aux.gL[j + 1 - first];
      double sr = a.upper[j - 1] * aux.gR[j - 1 - first] + a.diag[j] * aux.gR[j - first] +
                  a.lower[j + 1] * aux.gR[j + 1 - first];
      CHECK(std::abs(sl) < 1e-11 * matrix_inf_norm(a));
      CHECK(std::abs(sr) < 1e-11 * matrix_inf_norm(a));
    }
  }
}

TEST_CASE("closed-form path equals the general path") {
  SUBCASE("asymmetric frozen case") {
    const ToeplitzTridiagonal t{64, 1.0, 4.0, 2.0};
    const auto a = to_general(t);
    const auto layout = build_layout(64, 4);
    for (int r = 0; r < 4; ++r) {
      const auto req = full_request(layout, r);
      const auto qa = prelim_toeplitz_q(t, layout, r, &req);
      const auto ga = prelim_general(a, layout, r, &req);
      for (std::size_t j = 0; j < qa.gL.size(); ++j) {
        CHECK(testutil::rel_close(qa.gL[j], ga.gL[j], 1e-10));
        CHECK(testutil::rel_close(qa.gR[j], ga.gR[j], 1e-10));
      }
      for (const auto& [i, v] : qa.zL_at) CHECK(testutil::rel_close(v, ga.zl(i), 1e-10));
      for (const auto& [i, v] : qa.zR_at) CHECK(testutil::rel_close(v, ga.zr(i), 1e-10));
      CHECK(testutil::rel_close(qa.ratio_first, ga.ratio_first, 1e-10));
      CHECK(testutil::rel_close(qa.ratio_last, ga.ratio_last, 1e-10));
    }
  }
  SUBCASE("random dominant Toeplitz property") {
    for (Index n : {16, 257, 1024, 4096}) {
      const auto t = testutil::random_dominant_toeplitz(n, 500 + static_cast<std::uint64_t>(n));
      const auto a = to_general(t);
      const int p = (n >= 1024) ? 8 : 3;
      const auto layout = build_layout(n, p);
      for (int r = 0; r < p; ++r) {
        const auto qa = prelim_toeplitz_q(t, layout, r);
        const auto ga = prelim_general(a, layout, r);
        for (std::size_t j = 0; j < qa.gL.size(); ++j) {
          CHECK(testutil::rel_close(qa.gL[j], ga.gL[j], 1e-10));
          CHECK(testutil::rel_close(qa.gR[j], ga.gR[j], 1e-10));
        }
        for (const auto& [i, v] : qa.zL_at) CHECK(testutil::rel_close(v, ga.zl(i), 1e-10));
        for (const auto& [i, v] : qa.zR_at) CHECK(testutil::rel_close(v, ga.zr(i), 1e-10));
      }
    }
  }
}

TEST_CASE("sign-flipped second-difference matrix agrees with the Chebyshev path") {
  // tridiag{-1,2,-1} = -(scaled Helmholtz at lambda = 0); G flips sign, Z stays
  const Index n = 8;
  const double h = 1.0 / 9.0;
  const auto a = constant_tridiagonal(n, -1.0, 2.0, -1.0);
  const auto layout = build_layout(n, 2);
  for (int r = 0; r < 2; ++r) {
    const auto req = full_request(layout, r);
    const auto ga = prelim_general(a, layout, r, &req);
    const auto ca = prelim_helmholtz_cheb(0.0, h, n, layout, r, &req);
    for (std::size_t j = 0; j < ga.gL.size(); ++j) {
      CHECK(ga.gL[j] == doctest::Approx(-ca.gL[j]).epsilon(1e-12));
      CHECK(ga.gR[j] == doctest::Approx(-ca.gR[j]).epsilon(1e-12));
    }
    for (const auto& [i, v] : ca.zL_at) CHECK(ga.zl(i) == doctest::Approx(v).epsilon(1e-12));
    for (const auto& [i, v] : ca.zR_at) CHECK(ga.zr(i) == doctest::Approx(v).epsilon(1e-12));
    CHECK(ga.ratio_first == doctest::Approx(ca.ratio_first).epsilon(1e-12));
    CHECK(ga.ratio_last == doctest::Approx(ca.ratio_last).epsilon(1e-12));
  }
}

TEST_CASE("Chebyshev path: lambda = 0 gives the linear Z profile") {
  const Index n = 16;
  const double h = 1.0 / 17.0;
  const auto layout = build_layout(n, 2);
  const int rank = 1;
  const auto req = full_request(layout, rank);
  const auto aux = prelim_helmholtz_cheb(0.0, h, n, layout, rank, &req);
  const Index ml1 = layout.first[rank] + 1;
  for (Index i = 0; i <= layout.first[rank]; ++i)
    CHECK(aux.zl(i) ==
          doctest::Approx(static_cast<double>(i + 1) / static_cast<double>(ml1)).epsilon(1e-13));
}

TEST_CASE("Chebyshev path equals the general path across regimes") {
  const Index n = 1024;
  const double h = 1.0 / static_cast<double>(n + 1);
  // the last shift pushes x to 1.6, past the overflow degree for this mesh
  const double overflow_lambda = 2.0 * (1.0 - 1.6) / (h * h);
  for (double lambda : {-1.0, 0.5, 100.0, overflow_lambda}) {
    for (int p : {2, 4, 16}) {
      const auto layout = build_layout(n, p);
      const auto a = to_general(helmholtz_toeplitz(lambda, h, n));
      for (int r = 0; r < p; ++r) {
        const auto ca = prelim_helmholtz_cheb(lambda, h, n, layout, r);
        const auto ga = prelim_general(a, layout, r);
        // relative infinity-error per field family
        double g_scale = 0.0, g_diff = 0.0;
        for (std::size_t j = 0; j < ca.gL.size(); ++j) {
          g_scale = std::max({g_scale, std::abs(ga.gL[j]), std::abs(ga.gR[j])});
          g_diff = std::max(
              {g_diff, std::abs(ca.gL[j] - ga.gL[j]), std::abs(ca.gR[j] - ga.gR[j])});
        }
        CHECK(g_diff <= 1e-10 * g_scale);
        double z_scale = 0.0, z_diff = 0.0;
        for (const auto& [i, v] : ca.zL_at) {
          z_scale = std::max(z_scale, std::abs(ga.zl(i)));
          z_diff = std::max(z_diff, std::abs(v - ga.zl(i)));
        }
        for (const auto& [i, v] : ca.zR_at) {
          z_scale = std::max(z_scale, std::abs(ga.zr(i)));
          z_diff = std::max(z_diff, std::abs(v - ga.zr(i)));
        }
        CHECK(z_diff <= 1e-10 * z_scale);
        CHECK(testutil::rel_close(ca.ratio_first, ga.ratio_first, 1e-10));
        CHECK(testutil::rel_close(ca.ratio_last, ga.ratio_last, 1e-10));
      }
    }
  }
}

TEST_CASE("near-eigenvalue shifts are rejected") {
  const Index n = 64;
  const double h = 1.0 / 65.0;
  // x = cos(k pi/(n+1)) exactly for k = 3
  const double x = std::cos(3.0 * M_PI / 65.0);
  const double lambda = 2.0 * (1.0 - x) / (h * h);
  const auto layout = build_layout(n, 2);
  try {
    (void)prelim_helmholtz_cheb(lambda, h, n, layout, 0);
    FAIL("expected NearEigenvalue");
  } catch (const SolverError& e) {
    CHECK(e.kind() == Err::NearEigenvalue);
    CHECK(e.index() == 3);
  }
}

TEST_CASE("overflow-safe endpoints") {
  SUBCASE("agreement with the exact path at moderate size") {
    const double x = 1.1;
    const Index n = 200;
    const Index first = 80, last = 119;
    const Index mesh = n + 1;
    for (Index i : {first, (first + last) / 2, last}) {
      const auto [gl, gr] = green_endpoints_overflow_safe(x, n, first, last, i);
      const double exact_gl =
          -u_closed(mesh - i - 2, x) * u_closed(first, x) / u_closed(mesh - 1, x);
      const double exact_gr =
          -u_closed(i, x) * u_closed(mesh - last - 2, x) / u_closed(mesh - 1, x);
      CHECK(testutil::rel_close(gl, exact_gl, 1e-10));
      CHECK(testutil::rel_close(gr, exact_gr, 1e-10));
    }
  }
  SUBCASE("finite far beyond the overflow degree") {
    const double x = 1.0005;
    const Index n = 1000000;
    const auto [gl, gr] = green_endpoints_overflow_safe(x, n, 400000, 600000, 500000);
    CHECK(std::isfinite(gl));
    CHECK(std::isfinite(gr));
    const double cap = 4.0 / (2.0 * std::sqrt(x * x - 1.0));
    CHECK(std::abs(gl) <= cap);
    CHECK(std::abs(gr) <= cap);
  }
  SUBCASE("negative arguments carry the parity sign") {
    const double x = -1.1;
    const Index n = 200;
    const Index first = 80, last = 119;
    const Index mesh = n + 1;
    for (Index i : {first, first + 1, last}) {
      const auto [gl, gr] = green_endpoints_overflow_safe(x, n, first, last, i);
      const double exact_gl =
          -u_closed(mesh - i - 2, x) * u_closed(first, x) / u_closed(mesh - 1, x);
      const double exact_gr =
          -u_closed(i, x) * u_closed(mesh - last - 2, x) / u_closed(mesh - 1, x);
      CHECK(testutil::rel_close(gl, exact_gl, 1e-10));
      CHECK(testutil::rel_close(gr, exact_gr, 1e-10));
    }
  }
}

TEST_CASE("Chebyshev path in the overflow regime stays finite and consistent") {
  const Index n = 10000;
  const double h = 1.0 / static_cast<double>(n + 1);
  // x = 1.1 => lambda = 2(1-x)/h^2 < 0, far past the overflow degree
  const double lambda = 2.0 * (1.0 - 1.1) / (h * h);
  const auto layout = build_layout(n, 4);
  for (int r = 0; r < 4; ++r) {
    const auto aux = prelim_helmholtz_cheb(lambda, h, n, layout, r);
    for (double v : aux.gL) CHECK(std::isfinite(v));
    for (double v : aux.gR) CHECK(std::isfinite(v));
    CHECK(aux.zl(layout.first[r]) == 1.0);
    CHECK(aux.zr(layout.last[r]) == 1.0);
  }
}

TEST_CASE("required index sets follow the recursion") {
  const auto layout = build_layout(64, 7);
  for (int r = 0; r < 7; ++r) {
    const auto req = required_z_indices(layout, r);
    // anchors always present
    CHECK(std::find(req.left.begin(), req.left.end(), layout.first[r]) != req.left.end());
    CHECK(std::find(req.right.begin(), req.right.end(), layout.last[r]) != req.right.end());
    for (Index i : req.left) CHECK(i <= layout.first[r]);
    for (Index i : req.right) CHECK(i >= layout.last[r]);
    // one boundary index per level at most, plus the two own entries
    CHECK(req.left.size() + req.right.size() <=
          2 * static_cast<std::size_t>(dichotomy_levels(7)) + 4);
  }
}

TEST_CASE("tiny blocks fill their one-point interiors correctly") {
  // n = 31, p = 8 leaves a trailing block of size 3 (a single interior point
  // whose right-hand side carries both boundary terms)
  const Index n = 31;
  const double h = 1.0 / 32.0;
  const double lambda = -12.8617;
  const auto layout = build_layout(n, 8);
  const auto a = to_general(helmholtz_toeplitz(lambda, h, n));
  for (int r = 0; r < 8; ++r) {
    const auto ca = prelim_helmholtz_cheb(lambda, h, n, layout, r);
    const auto ga = prelim_general(a, layout, r);
    for (std::size_t j = 0; j < ca.gL.size(); ++j) {
      CHECK(testutil::rel_close(ca.gL[j], ga.gL[j], 1e-11));
      CHECK(testutil::rel_close(ca.gR[j], ga.gR[j], 1e-11));
    }
  }
}

TEST_CASE("dichotomy level count") {
  CHECK(dichotomy_levels(1) == 1);
  CHECK(dichotomy_levels(2) == 2);
  CHECK(dichotomy_levels(3) == 2);
  CHECK(dichotomy_levels(4) == 3);
  CHECK(dichotomy_levels(7) == 3);
  CHECK(dichotomy_levels(8) == 4);
}
