#include <doctest.h>

#include <filesystem>
#include <string>

#include "crlab/io.hpp"

using namespace crlab;

namespace {

std::string config_error(const Json& j, CRProblem (*parse)(const JsonReader&)) {
  try {
    parse(JsonReader(j));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::config);
    return e.what();
  }
  return {};
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("17 significant digits") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(-2.0) == "-2");
  CHECK(format_double(6.283185307179586) == "6.2831853071795862");
}

TEST_CASE("csv quoting and row widths") {
  CsvWriter w({"a", "b"});
  w.cell(std::string("x,y")).cell(1.5);
  w.end_row();
  CHECK(w.str() == "a,b\n\"x,y\",1.5\n");
  w.cell(1);
  CHECK_THROWS_AS(w.end_row(), Error);
}

TEST_CASE("problem JSON round trip") {
  const Json builders[] = {
      Json{{"builder", "trivial_cylinder"}, {"weights", {-1.0, 1.0}}, {"shifts", {1, 2}}},
      Json{{"builder", "plane"}, {"weight", -1.0}, {"grid", {{"s_nodes", 64}, {"t_nodes", 16}}}},
      Json{{"builder", "contact_fiber_cylinder"},
           {"minus", {{"S", {{"scalar", -1.0}}}}},
           {"plus", {{"S", {{"trig", {{"c0", {{1.0, 0.0}, {0.0, 2.0}}}, {"cos", {{{0.1, 0.0}, {0.0, 0.1}}}}}}}}}},
           {"truncation", {{"s_max", 10.0}, {"neck", 4.0}}}},
  };
  for (const auto& b : builders) {
    const CRProblem p = problem_from_json(JsonReader(b));
    const Json j = to_json(p);
    const CRProblem q = problem_from_json(JsonReader(j));
    CHECK(to_json(q) == j);
    CHECK(q.grid == p.grid);
    CHECK(q.ends.size() == p.ends.size());
  }
}

TEST_CASE("config errors carry a JSON pointer") {
  const auto msg = config_error(
      Json{{"builder", "trivial_cylinder"}, {"grid", {{"s_nodes", "many"}}}}, &problem_from_json);
  CHECK(msg.find("/grid/s_nodes") != std::string::npos);
  const auto unknown = config_error(Json{{"builder", "trivial_cylinder"}, {"wieghts", {1, 1}}},
                                    &problem_from_json);
  CHECK(unknown.find("/wieghts") != std::string::npos);
  const auto builder = config_error(Json{{"builder", "torus"}}, &problem_from_json);
  CHECK(builder.find("/builder") != std::string::npos);
  // validation failures inside a builder are reported as config errors
  const auto fredholm = config_error(Json{{"builder", "plane"}, {"weight", 0.0}}, &problem_from_json);
  CHECK_FALSE(fredholm.empty());
}

TEST_CASE("explicit problem form") {
  const Json j = {{"domain_kind", "cylinder"},
                  {"fiber", "contact_fiber"},
                  {"ends",
                   {{{"sign", "negative"}, {"weight", 0.0}, {"asymptotic", {{"S", {{"scalar", 1.0}}}}}},
                    {{"sign", "positive"}, {"weight", 0.0}, {"asymptotic", {{"S", {{"scalar", 1.0}}}}}}}},
                  {"coefficient_knots", {{{"s", 0.0}, {"S", {{"scalar", 1.0}}}}}}};
  const auto p = problem_from_json(JsonReader(j));
  CHECK(p.fiber == Fiber::contact_fiber);
  CHECK(p.coefficient_at(3.0)(0.2)(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("graph JSON round trip") {
  const Json j = {{"components",
                   {{{"pos", {{{"id", "x"}, {"action", 1.0}}}}, {"ind_L2", 1}, {"domain_symmetry_dim", 4}},
                    {{"neg", {{{"id", "x"}, {"action", 1.0}}}}, {"target_level", 1}, {"domain_symmetry_dim", 4}}}},
                  {"seams", {{0, 0, 1, 0}}}};
  const auto g = graph_from_json(JsonReader(j));
  const auto h = graph_from_json(JsonReader(to_json(g)));
  CHECK(g == h);
}

TEST_CASE("atomic write replaces the file") {
  const auto dir = std::filesystem::temp_directory_path() / "crlab_io_test";
  std::filesystem::remove_all(dir);
  write_file_atomic(dir / "a.txt", "one\n");
  write_file_atomic(dir / "a.txt", "two\n");
  CHECK(read_file(dir / "a.txt") == "two\n");
  int entries = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir)) ++entries;
  CHECK(entries == 1);
  std::filesystem::remove_all(dir);
}

}  // TEST_SUITE
