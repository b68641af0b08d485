#ifndef DICHO_ENGINE_HPP
#define DICHO_ENGINE_HPP

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <unordered_map>

#include "dicho/fabric.hpp"
#include "dicho/preliminary.hpp"
#include "dicho/tridiag.hpp"

namespace dicho::engine {

enum class PrelimKind { Auto, General, ToeplitzQ, HelmholtzCheb };

struct SolveOptions {
  fabric::Mode mode = fabric::Mode::Deterministic;
  double gamma_cap = 3.0;       // a-priori guard threshold on max |Z|
  bool posterior_check = true;  // forced anyway whenever gamma > 1
  PrelimKind prelim = PrelimKind::Auto;
  double recv_timeout_seconds = 10.0;
  std::ostream* trace = nullptr;
};

// Mutable per-rank solve state. beta_l/beta_r carry the chained hat-updates
// between levels; flops counts the arithmetic spent after the preliminary
// step (the quantity the complexity regression checks).
struct RankState {
  double beta_l = 0.0, beta_r = 0.0;
  double x_first = 0.0, x_last = 0.0;
  std::vector<double> interior_x;
  int level = 0;
  std::uint64_t flops = 0;
};

std::pair<double, double> compute_betas(std::span<const double> block_f,
                                        const prelim::AuxVectors& aux);

// x_first = xi_R + xi_L*ratio_first + beta_L, x_last = xi_R*ratio_last + xi_L + beta_R
std::pair<double, double> boundary_solve(double xi_r, double xi_l, double beta_l, double beta_r,
                                         const prelim::AuxVectors& aux);

// gamma = max |Z| component in use, bound = gamma^levels * machine epsilon
std::pair<double, double> error_monitor(const std::vector<prelim::AuxVectors>& aux, int levels);

/** Holds the preliminary data for one matrix and rank count; solve() may be
 *  called for any number of right-hand sides and reuses the build. */
class DichotomySolver {
public:
  DichotomySolver(GeneralTridiagonal a, int p, SolveOptions opt = {});
  DichotomySolver(const ToeplitzTridiagonal& t, int p, SolveOptions opt = {});
  static DichotomySolver helmholtz(double lambda, double h, Index n, int p,
                                   SolveOptions opt = {});

  SolveReport solve(std::span<const double> f);

  const prelim::BlockLayout& layout() const { return layout_; }
  const std::vector<prelim::AuxVectors>& aux() const { return aux_; }
  const GeneralTridiagonal& matrix() const { return a_; }
  int ranks() const { return p_; }
  int levels() const { return levels_; }
  double step1_seconds() const { return step1_seconds_; }
  std::pair<double, double> monitor() const;  // (gamma, bound)

private:
  DichotomySolver(GeneralTridiagonal a, std::optional<ToeplitzTridiagonal> t,
                  std::optional<std::pair<double, double>> lambda_h, int p, SolveOptions opt);
  void build();

  GeneralTridiagonal a_;
  std::optional<ToeplitzTridiagonal> toeplitz_;
  std::optional<std::pair<double, double>> lambda_h_;  // (lambda, h) for the Chebyshev path
  int p_;
  SolveOptions opt_;
  prelim::BlockLayout layout_;
  std::vector<prelim::AuxVectors> aux_;
  std::vector<GeneralTridiagonal> interior_blocks_;
  std::vector<bool> interior_dominant_;
  bool dominant_ = false;
  int levels_ = 0;
  double gamma_ = 1.0;
  double step1_seconds_ = 0.0;
  bool first_solve_pending_ = true;
  std::vector<std::string> build_warnings_;
};

SolveReport dichotomy_solve(const GeneralTridiagonal& a, std::span<const double> f, int p,
                            const SolveOptions& opt = {});
SolveReport dichotomy_solve(const ToeplitzTridiagonal& t, std::span<const double> f, int p,
                            const SolveOptions& opt = {});
SolveReport dichotomy_solve_helmholtz(double lambda, double h, Index n,
                                      std::span<const double> f, int p,
                                      const SolveOptions& opt = {});

/** Cache of built solvers keyed by (matrix fingerprint, n, p, path), serving
 *  series workloads where one preliminary build covers many right-hand
 *  sides. Thread-safe. */
class SolverCache {
public:
  std::shared_ptr<DichotomySolver> general(const GeneralTridiagonal& a, int p,
                                           const SolveOptions& opt = {});
  std::shared_ptr<DichotomySolver> toeplitz(const ToeplitzTridiagonal& t, int p,
                                            const SolveOptions& opt = {});
  std::shared_ptr<DichotomySolver> helmholtz(double lambda, double h, Index n, int p,
                                             const SolveOptions& opt = {});
  std::size_t size() const;
  std::uint64_t builds() const { return builds_; }

private:
  struct Key {
    int tag;  // 0 general, 1 toeplitz, 2 helmholtz
    Index n;
    int p;
    double a, b, c;
    std::uint64_t hash;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const;
  };
  std::shared_ptr<DichotomySolver> lookup(const Key& key,
                                          const std::function<DichotomySolver()>& build);

  mutable std::mutex mu_;
  std::unordered_map<Key, std::shared_ptr<DichotomySolver>, KeyHash> map_;
  std::uint64_t builds_ = 0;
};

std::uint64_t fingerprint(const GeneralTridiagonal& a);

}  // namespace dicho::engine

#endif
