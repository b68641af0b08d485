#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "dicho/acceptance.hpp"
#include "dicho/cost_model.hpp"
#include "dicho/engine.hpp"
#include "dicho/poisson.hpp"
#include "dicho/report_io.hpp"

namespace {

using namespace dicho;

int exit_code_for(const SolverError& e) {
  switch (e.kind()) {
    case Err::Singular:
    case Err::ZeroPivot:
    case Err::NoSolution:
    case Err::DegenerateRoots:
    case Err::NearEigenvalue:
    case Err::NonFiniteRatio:
      return 3;
    case Err::Config:
    case Err::TooManyRanks:
    case Err::UnknownRank:
    case Err::MismatchedWidth:
      return 4;
    case Err::Io:
      return 5;
    default:
      return 1;
  }
}

fabric::Mode parse_mode(std::string name) {
  if (const char* env = std::getenv("DICHOTOMY_MODE")) name = env;  // env wins
  if (name == "deterministic" || name == "det") return fabric::Mode::Deterministic;
  if (name == "concurrent" || name == "conc") return fabric::Mode::Concurrent;
  raise(Err::Config, "mode must be deterministic or concurrent: " + name);
}

engine::PrelimKind parse_prelim(const std::string& name) {
  if (name == "auto") return engine::PrelimKind::Auto;
  if (name == "general") return engine::PrelimKind::General;
  if (name == "toeplitz") return engine::PrelimKind::ToeplitzQ;
  if (name == "cheb") return engine::PrelimKind::HelmholtzCheb;
  raise(Err::Config, "unknown preliminary kind: " + name);
}

std::vector<double> make_rhs(const std::string& spec, Index n, std::uint64_t seed) {
  if (spec == "ones") return std::vector<double>(static_cast<size_t>(n), 1.0);
  if (spec == "random") {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> f(static_cast<size_t>(n));
    for (auto& x : f) x = dist(rng);
    return f;
  }
  std::ifstream in(spec);
  if (!in) raise(Err::Io, "cannot open rhs file: " + spec);
  auto f = read_vector(in);
  if (static_cast<Index>(f.size()) != n) raise(Err::Config, "rhs length disagrees with --n");
  return f;
}

void emit_rows(const std::vector<ReportRow>& rows, const std::string& format,
               const std::string& output) {
  std::ostringstream buf;
  if (format == "json")
    write_rows_json(buf, rows);
  else
    write_rows_csv(buf, rows);
  if (output.empty()) {
    std::cout << buf.str();
  } else {
    std::ofstream out(output);
    if (!out) raise(Err::Io, "cannot open output file: " + output);
    out << buf.str();
  }
}

struct CommonArgs {
  Index n = 1024;
  int p = 4;
  std::string toeplitz_bands;
  std::string matrix_file;
  std::string rhs = "ones";
  std::string prelim = "auto";
  std::string mode = "deterministic";
  std::string format = "csv";
  std::string output;
  std::string solution_file;
  std::string trace_file;
  std::uint64_t seed = 1;
  double lambda = 0.0;
  double h = 0.0;
  bool have_lambda = false;
};

engine::DichotomySolver build_solver(const CommonArgs& args, const engine::SolveOptions& opt) {
  if (args.have_lambda) {
    const double h = (args.h > 0.0) ? args.h : 1.0 / static_cast<double>(args.n + 1);
    return engine::DichotomySolver::helmholtz(args.lambda, h, args.n, args.p, opt);
  }
  if (!args.matrix_file.empty()) {
    std::ifstream in(args.matrix_file);
    if (!in) raise(Err::Io, "cannot open matrix file: " + args.matrix_file);
    return engine::DichotomySolver(read_matrix(in), args.p, opt);
  }
  if (!args.toeplitz_bands.empty())
    return engine::DichotomySolver(parse_toeplitz(args.toeplitz_bands, args.n), args.p, opt);
  raise(Err::Config, "one of --toeplitz, --matrix or --lambda is required");
}

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--n", args.n, "system size");
  cmd->add_option("--p", args.p, "logical rank count");
  cmd->add_option("--toeplitz", args.toeplitz_bands, "inline bands t_minus,t_zero,t_plus");
  cmd->add_option("--matrix", args.matrix_file, "general tridiagonal matrix file");
  cmd->add_option("--lambda", args.lambda, "Helmholtz shift (uses the Chebyshev path)")
      ->each([&args](const std::string&) { args.have_lambda = true; });
  cmd->add_option("--mesh-h", args.h, "mesh width for --lambda (default 1/(n+1))");
  cmd->add_option("--rhs", args.rhs, "ones | random | file path");
  cmd->add_option("--prelim", args.prelim, "auto | general | toeplitz | cheb");
  cmd->add_option("--mode", args.mode, "deterministic | concurrent");
  cmd->add_option("--format", args.format, "csv | json");
  cmd->add_option("--output", args.output, "report file (default stdout)");
  cmd->add_option("--solution", args.solution_file, "write the solution vector here");
  cmd->add_option("--trace", args.trace_file, "fabric event log (CSV)");
  cmd->add_option("--seed", args.seed, "rhs seed for --rhs random");
}

int run_solve_or_series(const CommonArgs& args, int m_rhs) {
  engine::SolveOptions opt;
  opt.mode = parse_mode(args.mode);
  opt.prelim = parse_prelim(args.prelim);
  std::ofstream trace;
  if (!args.trace_file.empty()) {
    trace.open(args.trace_file);
    if (!trace) raise(Err::Io, "cannot open trace file: " + args.trace_file);
    opt.trace = &trace;
  }

  engine::DichotomySolver solver = build_solver(args, opt);
  const Index n = solver.matrix().n;
  const std::string cmd = (m_rhs > 1) ? "series" : "solve";

  std::vector<ReportRow> rows;
  std::vector<double> last_solution;
  for (int j = 0; j < m_rhs; ++j) {
    const auto f = make_rhs(args.rhs, n, args.seed + static_cast<std::uint64_t>(j));
    SolveReport rep = solver.solve(f);
    rows.push_back(report_row_from(rep, cmd, n, args.mode, j));
    last_solution = std::move(rep.solution);
  }
  emit_rows(rows, args.format, args.output);
  if (!args.solution_file.empty()) {
    std::ofstream out(args.solution_file);
    if (!out) raise(Err::Io, "cannot open solution file: " + args.solution_file);
    write_vector(out, last_solution);
  }
  return 0;
}

int run_poisson(double lambda, int p, Index grid_n, bool study, int from_exp, int to_exp,
                const std::string& prelim, const std::string& input,
                const std::string& output) {
  poisson::PoissonOptions opt;
  opt.prelim = parse_prelim(prelim);
  if (study) {
    const auto rows = poisson::convergence_study(lambda, p, from_exp, to_exp, opt);
    if (output.empty()) {
      poisson::write_convergence_csv(std::cout, rows);
    } else {
      std::ofstream out(output);
      if (!out) raise(Err::Io, "cannot open output file: " + output);
      poisson::write_convergence_csv(out, rows);
    }
    return 0;
  }
  poisson::Grid2D f;
  if (!input.empty()) {
    std::ifstream in(input);
    if (!in) raise(Err::Io, "cannot open grid file: " + input);
    f = poisson::read_grid(in);
  } else {
    f = poisson::make_grid(grid_n);
    for (Index i = 0; i < f.n1; ++i)
      for (Index j = 0; j < f.n2; ++j)
        f.at(i, j) = std::sin(M_PI * static_cast<double>(i + 1) * f.h) *
                     std::sin(M_PI * static_cast<double>(j + 1) * f.h);
  }
  const auto u = poisson::poisson_solve(f, lambda, p, opt);
  if (output.empty()) {
    poisson::write_grid(std::cout, u);
  } else {
    std::ofstream out(output);
    if (!out) raise(Err::Io, "cannot open output file: " + output);
    poisson::write_grid(out, u);
  }
  return 0;
}

int run_cost_model(double alpha, double beta, double gamma, double l, int p_max,
                   const std::string& output) {
  std::ostringstream buf;
  buf.precision(10);
  buf << "p,t_dichotomy,t_cyclic,t_dichotomy_approx\n";
  for (int p = 2; p <= p_max; p *= 2) {
    CostParams params{alpha, beta, gamma, l, p};
    const auto est = cost_model(params);
    buf << p << ',' << est.t_dichotomy << ',' << est.t_cyclic << ','
        << dichotomy_cost_approx(params) << '\n';
  }
  if (output.empty()) {
    std::cout << buf.str();
  } else {
    std::ofstream out(output);
    if (!out) raise(Err::Io, "cannot open output file: " + output);
    out << buf.str();
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"parallel dichotomy solver for tridiagonal and Toeplitz systems"};
  app.require_subcommand(1);

  CommonArgs solve_args, series_args;
  int m_rhs = 100;
  auto* solve_cmd = app.add_subcommand("solve", "solve one system and report");
  add_common(solve_cmd, solve_args);
  auto* series_cmd = app.add_subcommand("series", "solve M right-hand sides, one build");
  add_common(series_cmd, series_args);
  series_cmd->add_option("--m", m_rhs, "number of right-hand sides");

  double p_lambda = 0.0;
  int p_ranks = 4;
  Index grid_n = 63;
  bool study = false;
  int from_exp = 5, to_exp = 7;
  std::string p_prelim = "cheb", p_input, p_output;
  auto* poisson_cmd = app.add_subcommand("poisson", "2-D Dirichlet Helmholtz solver");
  poisson_cmd->add_option("--lambda", p_lambda, "zeroth-order coefficient");
  poisson_cmd->add_option("--p", p_ranks, "logical rank count");
  poisson_cmd->add_option("--grid", grid_n, "interior points per dimension");
  poisson_cmd->add_flag("--study", study, "3-level convergence study (CSV)");
  poisson_cmd->add_option("--from", from_exp, "study: first grid exponent");
  poisson_cmd->add_option("--to", to_exp, "study: last grid exponent");
  poisson_cmd->add_option("--prelim", p_prelim, "cheb | general");
  poisson_cmd->add_option("--input", p_input, "right-hand-side grid file");
  poisson_cmd->add_option("--output", p_output, "output file (default stdout)");

  auto* verify_cmd = app.add_subcommand("verify", "run the acceptance suite");

  double alpha = 0.0, beta = 1.0, gamma = 1.0, series_l = 1.0;
  int p_max = 4096;
  std::string cm_output;
  auto* cost_cmd = app.add_subcommand("cost-model", "evaluate both cost formulas");
  cost_cmd->add_option("--alpha", alpha, "latency per message");
  cost_cmd->add_option("--beta", beta, "per-real transfer time");
  cost_cmd->add_option("--gamma", gamma, "per-addition time");
  cost_cmd->add_option("--l", series_l, "series width");
  cost_cmd->add_option("--p-max", p_max, "largest rank count (powers of two)");
  cost_cmd->add_option("--output", cm_output, "output file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve_cmd->parsed()) return run_solve_or_series(solve_args, 1);
    if (series_cmd->parsed()) {
      if (m_rhs < 1) raise(Err::Config, "--m must be >= 1");
      return run_solve_or_series(series_args, m_rhs);
    }
    if (poisson_cmd->parsed())
      return run_poisson(p_lambda, p_ranks, grid_n, study, from_exp, to_exp, p_prelim, p_input,
                         p_output);
    if (verify_cmd->parsed()) {
      const auto results = run_acceptance(&std::cout);
      for (const auto& r : results)
        if (!r.pass) return 2;
      return 0;
    }
    if (cost_cmd->parsed()) return run_cost_model(alpha, beta, gamma, series_l, p_max, cm_output);
  } catch (const SolverError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
