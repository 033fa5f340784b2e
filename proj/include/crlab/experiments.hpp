#pragma once

// Declarative experiment runner behind the command-line front end.  Each run
// writes CSV/JSON tables and a summary.txt into the output directory.
//
// Exit codes: 0 every expectation holds, 1 error or a wrong value, 2 a rank
// decision was indecisive (and nothing was wrong).

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "crlab/io.hpp"

namespace crlab {

enum class ExperimentKind { spectrum, index, sweep, glue, vdim, reproduce_all };

const char* to_string(ExperimentKind k);
ExperimentKind experiment_kind_from_string(const std::string& s);

struct ExperimentConfig {
  std::string name;
  ExperimentKind kind = ExperimentKind::index;
  Json inputs = Json::object();
  std::string output_dir = "out";
  std::uint64_t seed = 0;
  std::optional<Grid> grid;     // replaces every problem grid
  std::optional<double> s_max;  // replaces every truncation length

  bool operator==(const ExperimentConfig&) const = default;
};

Json to_json(const ExperimentConfig& c);
/// Validates the top level and the kind-specific payload.
ExperimentConfig experiment_from_json(const Json& j);
/// "96x32" -> Grid.
Grid parse_grid(const std::string& text);

enum class Verdict { pass = 0, wrong = 1, indecisive = 2 };

/// Folds verdicts: wrong dominates indecisive dominates pass.
Verdict combine(Verdict a, Verdict b);

struct RunResult {
  Verdict verdict = Verdict::pass;
  std::vector<std::filesystem::path> files;
  std::string summary;

  int exit_code() const { return static_cast<int>(verdict); }
};

RunResult run_experiment(const ExperimentConfig& config);

}  // namespace crlab
