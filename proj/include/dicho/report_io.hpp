#ifndef DICHO_REPORT_IO_HPP
#define DICHO_REPORT_IO_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "dicho/tridiag.hpp"

namespace dicho {

// One emitted record of a solve/series run. CSV and JSON writers carry the
// same numeric payload, printed with max_digits10 so parsers round-trip the
// exact doubles.
struct ReportRow {
  std::string command;
  Index n = 0;
  int p = 1;
  int rhs_index = 0;
  std::string mode;
  double residual_inf = 0.0;
  bool dominant = false;
  double gamma = 0.0;
  double error_bound = 0.0;
  int levels = 0;
  double step1_seconds = 0.0;
  double step2_seconds = 0.0;
  std::uint64_t ops_per_rank_max = 0;
  std::string warnings;  // semicolon-joined tags
};

ReportRow report_row_from(const SolveReport& rep, const std::string& command, Index n,
                          const std::string& mode, int rhs_index = 0);

void write_rows_csv(std::ostream& out, const std::vector<ReportRow>& rows);
void write_rows_json(std::ostream& out, const std::vector<ReportRow>& rows);

// Text vector format: first line n, then one value per line.
std::vector<double> read_vector(std::istream& in);
void write_vector(std::ostream& out, std::span<const double> v);

// Text matrix format: first line n, then n lines "lower diag upper".
GeneralTridiagonal read_matrix(std::istream& in);
void write_matrix(std::ostream& out, const GeneralTridiagonal& a);

// Inline Toeplitz bands "t_minus,t_zero,t_plus".
ToeplitzTridiagonal parse_toeplitz(const std::string& text, Index n);

}  // namespace dicho

#endif
