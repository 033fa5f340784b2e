#pragma once

#include <stdexcept>
#include <string>

namespace crlab {

enum class ErrorCode {
  coefficient_validation,
  resolution,
  ambiguous_window,
  precondition,
  fredholm,
  tracking,
  assembly,
  numerical,
  indecision,
  instability,
  incompatible_ends,
  graph,
  input,
  config,
};

const char* to_string(ErrorCode code);

// Single exception type for the library; the code lets callers (and the CLI
// exit-code contract) distinguish failure classes without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::coefficient_validation: return "coefficient-validation error";
    case ErrorCode::resolution: return "resolution error";
    case ErrorCode::ambiguous_window: return "ambiguous-window error";
    case ErrorCode::precondition: return "precondition error";
    case ErrorCode::fredholm: return "Fredholm-criterion error";
    case ErrorCode::tracking: return "tracking error";
    case ErrorCode::assembly: return "assembly error";
    case ErrorCode::numerical: return "numerical error";
    case ErrorCode::indecision: return "indecision error";
    case ErrorCode::instability: return "instability error";
    case ErrorCode::incompatible_ends: return "incompatible-ends error";
    case ErrorCode::graph: return "graph error";
    case ErrorCode::input: return "input error";
    case ErrorCode::config: return "config error";
  }
  return "error";
}

}  // namespace crlab
