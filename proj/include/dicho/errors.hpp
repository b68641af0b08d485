#ifndef DICHO_ERRORS_HPP
#define DICHO_ERRORS_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

namespace dicho {

enum class Err {
  ZeroPivot,        // forward elimination hit a pivot below the floor
  Singular,         // no usable pivot at all / singular (sub)system
  Overflow,         // value exceeds the largest finite double
  DomainError,      // argument outside the function's domain
  NoSolution,       // q1^{N+1} == q2^{N+1} with q1 != q2
  DegenerateRoots,  // characteristic roots too close for the closed form
  NearEigenvalue,   // shift lands on (or near) the operator spectrum
  TooManyRanks,     // block decomposition needs at least 2 rows per rank
  MismatchedWidth,  // reduction contributions disagree on payload width
  Deadlock,         // no rank can make progress / recv timed out
  UnknownRank,      // message endpoint outside the fabric (or self-send)
  NonFiniteRatio,   // boundary transfer ratio is not finite
  Config,           // invalid configuration or malformed input
  Io,               // file read/write failure
};

const char* err_name(Err e);

class SolverError : public std::runtime_error {
public:
  SolverError(Err kind, const std::string& msg, std::int64_t index = -1)
      : std::runtime_error(std::string(err_name(kind)) + ": " + msg),
        kind_(kind),
        index_(index) {}

  Err kind() const { return kind_; }
  std::int64_t index() const { return index_; }

private:
  Err kind_;
  std::int64_t index_;
};

[[noreturn]] inline void raise(Err kind, const std::string& msg, std::int64_t index = -1) {
  throw SolverError(kind, msg, index);
}

}  // namespace dicho

#endif
