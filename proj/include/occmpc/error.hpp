#pragma once

#include <stdexcept>
#include <string>

namespace occmpc {

// Exception hierarchy. Everything derives from std::runtime_error except
// InvalidArgument, which keeps std::invalid_argument semantics.

struct InvalidArgument : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct DegeneratePosterior : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Parse failure in an input file; carries the 1-based line number.
struct ParseError : std::runtime_error {
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(what + " (line " + std::to_string(line) + ")"),
        line(line) {}
  std::size_t line;
};

struct InvalidGeometry : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SingularCapacitance : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SolverFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace occmpc
