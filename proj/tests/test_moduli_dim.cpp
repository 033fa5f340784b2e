#include <doctest.h>

#include <chrono>
#include <random>

#include "crlab/errors.hpp"
#include "crlab/moduli_dim.hpp"

using namespace crlab;

namespace {

Component comp(std::vector<OrbitLabel> neg, std::vector<OrbitLabel> pos, int ind, int level = 0) {
  Component c;
  c.neg_ends = std::move(neg);
  c.pos_ends = std::move(pos);
  c.ind_L2 = ind;
  c.target_level = level;
  return c;
}

}  // namespace

TEST_SUITE("moduli_dim") {

TEST_CASE("hand-counted dimensions for a plane bubble") {
  // plane (one end) + three-ended sphere, one seam:
  //   parameters 2 + 2 - 1 = 3; symmetry 4 + 0 - 1 = 3; target 2  -> -2
  // the smooth cylinder: 2 - 2 - 1 = -1
  const auto cases = canonical_cases();
  const auto& c = cases.at(0);
  CHECK(c.name == "one_bubble");
  CHECK(configuration_dim(c.degenerate) == 3);
  CHECK(symmetry_dim(c.degenerate) == 3);
  CHECK(target_symmetry_count(c.degenerate) == 2);
  CHECK(unparameterized_dim(c.degenerate) == -2);
  CHECK(unparameterized_dim(c.smooth) == -1);
}

TEST_CASE("canonical codimensions") {
  const auto cases = canonical_cases();
  REQUIRE(cases.size() == 5);
  const std::vector<int> want{1, 1, 1, 1, 2};
  for (std::size_t i = 0; i < cases.size(); ++i) {
    CHECK(codimension(cases[i].degenerate, cases[i].smooth) == want[i]);
    CHECK(cases[i].expected_codimension == want[i]);
  }
}

TEST_CASE("randomized budgets keep the codimension") {
  std::mt19937_64 rng(2024);
  const auto t0 = std::chrono::steady_clock::now();
  for (const auto& family : degeneration_families()) {
    for (int i = 0; i < 100; ++i) {
      const auto c = randomized_case(family, rng);
      CHECK(total_ind_L2(c.degenerate) == total_ind_L2(c.smooth));
      CHECK(codimension(c.degenerate, c.smooth) == c.expected_codimension);
    }
  }
  CHECK(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() < 1.0);
}

TEST_CASE("splicing a trivial cylinder into a seam is neutral") {
  std::mt19937_64 rng(3);
  for (const auto& family : degeneration_families()) {
    for (int i = 0; i < 10; ++i) {
      const auto c = randomized_case(family, rng);
      const auto spliced = splice_trivial(c.degenerate, 0);
      CHECK(spliced.components.size() == c.degenerate.components.size() + 1);
      CHECK(uses_b0(spliced, static_cast<int>(spliced.components.size()) - 1));
      CHECK(unparameterized_dim(spliced) == unparameterized_dim(c.degenerate));
    }
  }
}

TEST_CASE("component dimension with and without B0") {
  Component c = comp({{"x", 1.0}}, {{"x", 1.0}}, 0);
  c.trivial = true;
  CHECK(component_dim(c) == 2);
  CHECK(component_dim(c, true) == 1);
  CHECK(preset_domain_symmetry(c, true) == 1);
  CHECK(preset_domain_symmetry(c, false) == 2);
}

TEST_CASE("graph validation") {
  const OrbitLabel x{"x", 1.0};
  const OrbitLabel y{"y", 2.0};
  ConfigurationGraph g;
  g.components = {comp({}, {x}, 0), comp({y}, {}, 0, 1)};
  g.seams = {{0, 0, 1, 0}};
  try {
    g.validate();
    FAIL("expected orbit mismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::graph);
  }

  // two seams between the same pair form a cycle
  ConfigurationGraph cyc;
  cyc.components = {comp({}, {x, y}, 0), comp({x, y}, {}, 0, 1)};
  cyc.seams = {{0, 0, 1, 0}, {0, 1, 1, 1}};
  CHECK_THROWS_AS(cyc.validate(), Error);

  // an end used twice
  ConfigurationGraph twice;
  twice.components = {comp({}, {x}, 0), comp({x}, {}, 0, 1), comp({x}, {}, 0, 1)};
  twice.seams = {{0, 0, 1, 0}, {0, 0, 2, 0}};
  CHECK_THROWS_AS(twice.validate(), Error);

  ConfigurationGraph ok;
  ok.components = {comp({}, {x}, 1), comp({x}, {}, 0, 1)};
  ok.seams = {{0, 0, 1, 0}};
  CHECK_NOTHROW(ok.validate());
  CHECK(ok.levels() == 2);
}

TEST_CASE("mismatched budgets are rejected") {
  auto c = canonical_cases().at(1);
  c.smooth.components[0].ind_L2 += 1;
  CHECK_THROWS_AS(codimension(c.degenerate, c.smooth), Error);
}

TEST_CASE("missing symmetry data") {
  ConfigurationGraph g;
  g.components = {comp({{"x", 1.0}}, {{"y", 2.0}}, 0)};
  CHECK_THROWS_AS(symmetry_dim(g), Error);
  CHECK(symmetry_dim(with_preset_symmetries(g)) == 2);
}

}  // TEST_SUITE
