#ifndef DICHO_ACCEPTANCE_HPP
#define DICHO_ACCEPTANCE_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace dicho {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

// Runs every acceptance criterion; one result per criterion, in order.
// When `progress` is given, a pass/fail line is printed as each finishes.
std::vector<CriterionResult> run_acceptance(std::ostream* progress = nullptr);

}  // namespace dicho

#endif
