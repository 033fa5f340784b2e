#pragma once

// JSON (de)serialization of problems, reports and graphs; CSV helpers with
// 17-significant-digit floats; atomic file output.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "crlab/cylinder_ops.hpp"
#include "crlab/gluing.hpp"
#include "crlab/index_engine.hpp"
#include "crlab/loop_ops.hpp"
#include "crlab/moduli_dim.hpp"

namespace crlab {

using Json = nlohmann::json;

/// Tracks a JSON-pointer path for config errors.
class JsonReader {
 public:
  JsonReader(const Json& j, std::string path = "") : j_(j), path_(std::move(path)) {}

  const Json& json() const { return j_; }
  const std::string& path() const { return path_; }
  bool has(const std::string& key) const { return j_.is_object() && j_.contains(key); }
  JsonReader at(const std::string& key) const;
  JsonReader at(std::size_t index) const;
  std::size_t size() const;

  double number() const;
  int integer() const;
  bool boolean() const;
  std::string string() const;
  Eigen::MatrixXd matrix() const;

  double number(const std::string& key, double fallback) const;
  int integer(const std::string& key, int fallback) const;
  bool boolean(const std::string& key, bool fallback) const;
  std::string string(const std::string& key, const std::string& fallback) const;

  [[noreturn]] void fail(const std::string& what) const;
  void expect_object() const;
  void expect_array() const;
  /// Rejects keys outside `allowed`.
  void only_keys(const std::vector<std::string>& allowed) const;

 private:
  const Json& j_;
  std::string path_;
};

std::string format_double(double x);

Json to_json(const Eigen::MatrixXd& m);
Json to_json(const LoopOperatorSpec& spec);
Json to_json(const SpectrumReport& report);
Json to_json(const CRProblem& problem);
Json to_json(const IndexReport& report);
Json to_json(const TolerancePolicy& policy);
Json to_json(const ConfigurationGraph& graph);
Json to_json(const AdditivityReport& report);

LoopOperatorSpec loop_spec_from_json(const JsonReader& r);
/// Accepts the explicit form or a {"builder": ...} shorthand.
CRProblem problem_from_json(const JsonReader& r);
TolerancePolicy policy_from_json(const JsonReader& r);
ConfigurationGraph graph_from_json(const JsonReader& r);

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  CsvWriter& cell(const std::string& s);
  CsvWriter& cell(double x);
  CsvWriter& cell(int x);
  CsvWriter& cell(bool x);
  void end_row();
  std::string str() const;

 private:
  std::string out_;
  std::size_t columns_ = 0;
  std::size_t in_row_ = 0;
};

/// Write to a temporary sibling and rename over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

}  // namespace crlab
