#include <doctest.h>

#include <cmath>

#include "crlab/gluing.hpp"

using namespace crlab;

namespace {
const Truncation kTr{8.0, 3.0};
const Grid kGrid{33, 16};  // spacing 0.5
}  // namespace

TEST_SUITE("gluing") {

TEST_CASE("cutoffs") {
  GluingConfig c{8.0, 3.0};
  CHECK(c.rho() == 5.0);
  CHECK(c.beta_u(0.0) == 1.0);
  CHECK(c.beta_u(7.0) == 1.0);
  CHECK(c.beta_u(8.0) == 0.0);
  CHECK(c.beta_w(-8.0) == 0.0);
  CHECK(c.beta_w(-7.0) == 1.0);
  CHECK_THROWS_AS((GluingConfig{5.0, 3.0}).validate(), Error);
}

TEST_CASE("glued geometry") {
  const auto u = build_trivial_cylinder(-1.0, -1.0, 0, 0, kTr, kGrid);
  const auto w = build_trivial_cylinder(1.0, -1.0, 0, 0, kTr, kGrid);
  const auto g = glue_with_layout(u, w, 6.0);
  CHECK(g.shift_u == -6.0);
  CHECK(g.shift_w == 6.0);
  CHECK(g.problem.truncation.s_max == doctest::Approx(14.0));
  CHECK(g.problem.grid.s_nodes == 57);
  CHECK(g.problem.end(EndSign::negative).weight == -1.0);
  CHECK(g.problem.end(EndSign::positive).weight == -1.0);
  // the glued weight rate equals the components' in their own regions
  CHECK(g.problem.weight_rate_at(-13.0) == doctest::Approx(u.weight_rate_at(-7.0)));
  CHECK(g.problem.weight_rate_at(13.0) == doctest::Approx(w.weight_rate_at(7.0)));
}

TEST_CASE("incompatible ends are rejected") {
  const auto u = build_trivial_cylinder(-1.0, 1.0, 0, 0, kTr, kGrid);
  const auto w = build_trivial_cylinder(1.0, 1.0, 0, 0, kTr, kGrid);
  try {
    glue(u, w, 6.0);
    FAIL("expected incompatible ends");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::incompatible_ends);
  }
  const auto shifted = build_trivial_cylinder(-1.0, 1.0, 0, 2, kTr, kGrid);
  CHECK_THROWS_AS(glue(shifted, build_trivial_cylinder(-1.0, 1.0, 0, 0, kTr, kGrid), 6.0), Error);
  CHECK_THROWS_AS(glue(u, build_trivial_cylinder(-1.0, 1.0, 0, 0, kTr, Grid{65, 16}), 6.0), Error);
  // tau below N' + 2
  CHECK_THROWS_AS(glue(u, build_trivial_cylinder(-1.0, 1.0, 0, 0, kTr, kGrid), 4.5), Error);
}

TEST_CASE("kernel pair is additive on a coarse grid") {
  const auto u = build_trivial_cylinder(-1.0, -1.0, 0, 0, kTr, kGrid);
  const auto w = build_trivial_cylinder(1.0, -1.0, 0, 0, kTr, kGrid);
  const auto rep = verify_additivity(u, w, {6.0, 7.0, 8.0});
  REQUIRE(rep.rows.size() == 3);
  CHECK(rep.decay_rate == doctest::Approx(1.0));
  for (const auto& r : rep.rows) {
    CHECK(r.ind_u == 2);
    CHECK(r.ind_w == 0);
    CHECK(r.ind_glued == 2);
    CHECK(r.approx_kernel_dim == 2);
  }
  CHECK(rep.additive);
  CHECK(rep.dimension_match);
  // residuals shrink like e^{-rho}
  CHECK(rep.rows[2].max_residual < rep.rows[0].max_residual * std::exp(-1.5));
}

TEST_CASE("transplants need an aligned offset") {
  const auto u = build_trivial_cylinder(-1.0, -1.0, 0, 0, kTr, kGrid);
  const auto w = build_trivial_cylinder(1.0, -1.0, 0, 0, kTr, kGrid);
  CHECK_THROWS_AS(verify_additivity(u, w, {6.1}), Error);
}

}  // TEST_SUITE
