// Benchmark comparing the serial reference solver against the dichotomy
// engine, and the general O(N) preliminary against the Toeplitz closed-form
// one. Informational output only; accuracy gates live in the test suite.

#include <chrono>
#include <iomanip>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dicho/engine.hpp"
#include "dicho/tridiag.hpp"

namespace {

using namespace dicho;
using Clock = std::chrono::steady_clock;

double bench_seconds(const std::function<void()>& fn, int reps) {
  const auto t0 = Clock::now();
  for (int i = 0; i < reps; ++i) fn();
  return std::chrono::duration<double>(Clock::now() - t0).count() / reps;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dichotomy vs serial Thomas benchmark"};
  Index n = 1 << 16;
  int m = 8;
  std::string p_list = "1,2,4,8,16";
  app.add_option("--n", n, "system size");
  app.add_option("--m", m, "right-hand sides per timing");
  app.add_option("--p-list", p_list, "comma-separated rank counts");
  CLI11_PARSE(app, argc, argv);

  std::vector<int> ranks;
  {
    std::string tok;
    for (char c : p_list + ",") {
      if (c == ',') {
        if (!tok.empty()) ranks.push_back(std::stoi(tok));
        tok.clear();
      } else {
        tok += c;
      }
    }
  }

  const ToeplitzTridiagonal t{n, -1.0, 4.0, -1.0};
  const GeneralTridiagonal a = to_general(t);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> f(static_cast<size_t>(n));
  for (auto& x : f) x = dist(rng);

  const double thomas_s = bench_seconds([&] { (void)thomas_solve(a, f); }, m);

  std::cout << "n=" << n << "  thomas=" << std::scientific << std::setprecision(3) << thomas_s
            << " s/rhs\n";
  std::cout << "p,step1_general,step1_toeplitz,step2,thomas_per_rhs,step2_ratio\n";
  for (int p : ranks) {
    engine::SolveOptions opt;
    double step1_general, step1_toeplitz, step2;
    {
      opt.prelim = engine::PrelimKind::General;
      engine::DichotomySolver solver(a, p, opt);
      step1_general = solver.step1_seconds();
    }
    opt.prelim = engine::PrelimKind::Auto;
    engine::DichotomySolver solver(t, p, opt);
    step1_toeplitz = solver.step1_seconds();
    step2 = bench_seconds([&] { (void)solver.solve(f); }, m);
    std::cout << p << ',' << step1_general << ',' << step1_toeplitz << ',' << step2 << ','
              << thomas_s << ',' << thomas_s / step2 << '\n';
  }
  return 0;
}
