#include "dicho/report_io.hpp"

#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace dicho {

namespace {

std::string join_warnings(const std::vector<std::string>& tags) {
  std::string out;
  for (const auto& t : tags) {
    if (!out.empty()) out += ';';
    out += t;
  }
  return out;
}

}  // namespace

ReportRow report_row_from(const SolveReport& rep, const std::string& command, Index n,
                          const std::string& mode, int rhs_index) {
  ReportRow row;
  row.command = command;
  row.n = n;
  row.p = rep.ranks;
  row.rhs_index = rhs_index;
  row.mode = mode;
  row.residual_inf = rep.residual_inf;
  row.dominant = rep.dominant;
  row.gamma = rep.gamma;
  row.error_bound = rep.error_bound;
  row.levels = rep.levels;
  row.step1_seconds = rep.step1_seconds;
  row.step2_seconds = rep.step2_seconds;
  row.ops_per_rank_max = rep.ops_per_rank_max;
  row.warnings = join_warnings(rep.warnings);
  return row;
}

void write_rows_csv(std::ostream& out, const std::vector<ReportRow>& rows) {
  out.precision(std::numeric_limits<double>::max_digits10);
  out << "command,n,p,rhs_index,mode,residual_inf,dominant,gamma,error_bound,levels,"
         "step1_seconds,step2_seconds,ops_per_rank_max,warnings\n";
  for (const auto& r : rows) {
    out << r.command << ',' << r.n << ',' << r.p << ',' << r.rhs_index << ',' << r.mode << ','
        << r.residual_inf << ',' << (r.dominant ? 1 : 0) << ',' << r.gamma << ','
        << r.error_bound << ',' << r.levels << ',' << r.step1_seconds << ','
        << r.step2_seconds << ',' << r.ops_per_rank_max << ',' << r.warnings << '\n';
  }
  if (!out) raise(Err::Io, "csv write failed");
}

void write_rows_json(std::ostream& out, const std::vector<ReportRow>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    arr.push_back({{"command", r.command},
                   {"n", r.n},
                   {"p", r.p},
                   {"rhs_index", r.rhs_index},
                   {"mode", r.mode},
                   {"residual_inf", r.residual_inf},
                   {"dominant", r.dominant},
                   {"gamma", r.gamma},
                   {"error_bound", r.error_bound},
                   {"levels", r.levels},
                   {"step1_seconds", r.step1_seconds},
                   {"step2_seconds", r.step2_seconds},
                   {"ops_per_rank_max", r.ops_per_rank_max},
                   {"warnings", r.warnings}});
  }
  out << arr.dump(2) << '\n';
  if (!out) raise(Err::Io, "json write failed");
}

std::vector<double> read_vector(std::istream& in) {
  Index n = 0;
  if (!(in >> n) || n < 1) raise(Err::Io, "vector header unreadable");
  std::vector<double> v(static_cast<size_t>(n));
  for (auto& x : v)
    if (!(in >> x)) raise(Err::Io, "vector values truncated");
  return v;
}

void write_vector(std::ostream& out, std::span<const double> v) {
  out.precision(std::numeric_limits<double>::max_digits10);
  out << v.size() << '\n';
  for (double x : v) out << x << '\n';
  if (!out) raise(Err::Io, "vector write failed");
}

GeneralTridiagonal read_matrix(std::istream& in) {
  Index n = 0;
  if (!(in >> n) || n < 1) raise(Err::Io, "matrix header unreadable");
  std::vector<double> lo(static_cast<size_t>(n)), di(static_cast<size_t>(n)),
      up(static_cast<size_t>(n));
  for (Index i = 0; i < n; ++i)
    if (!(in >> lo[i] >> di[i] >> up[i])) raise(Err::Io, "matrix rows truncated", i);
  return make_general(std::move(lo), std::move(di), std::move(up));
}

void write_matrix(std::ostream& out, const GeneralTridiagonal& a) {
  out.precision(std::numeric_limits<double>::max_digits10);
  out << a.n << '\n';
  for (Index i = 0; i < a.n; ++i)
    out << a.lower[i] << ' ' << a.diag[i] << ' ' << a.upper[i] << '\n';
  if (!out) raise(Err::Io, "matrix write failed");
}

ToeplitzTridiagonal parse_toeplitz(const std::string& text, Index n) {
  std::string s = text;
  for (auto& c : s)
    if (c == ',') c = ' ';
  std::istringstream in(s);
  ToeplitzTridiagonal t;
  t.n = n;
  if (!(in >> t.t_minus >> t.t_zero >> t.t_plus))
    raise(Err::Config, "expected t_minus,t_zero,t_plus");
  std::string rest;
  if (in >> rest) raise(Err::Config, "trailing tokens after the three bands");
  return t;
}

}  // namespace dicho
