#include <doctest.h>

#include <cmath>
#include <sstream>

#include "crlab/cylinder_ops.hpp"

using namespace crlab;

TEST_SUITE("cylinder_ops") {

TEST_CASE("smoothstep is a C2 ramp") {
  CHECK(smoothstep(-1.0) == 0.0);
  CHECK(smoothstep(0.0) == 0.0);
  CHECK(smoothstep(1.0) == 1.0);
  CHECK(smoothstep(2.0) == 1.0);
  CHECK(smoothstep(0.5) == doctest::Approx(0.5));
  CHECK(smoothstep_derivative(0.0) == 0.0);
  CHECK(smoothstep_derivative(1.0) == 0.0);
  const double h = 1e-6;
  for (double x : {0.1, 0.3, 0.77}) {
    CHECK(smoothstep_derivative(x) == doctest::Approx((smoothstep(x + h) - smoothstep(x - h)) / (2 * h)));
  }
}

TEST_CASE("weight potential integrates the weight rate") {
  const auto p = build_trivial_cylinder(-1.0, 1.0);
  const double h = 1e-5;
  for (double s : {-11.0, -5.5, -0.3, 2.0, 5.9, 9.0}) {
    const double fd = (p.weight_potential_at(s + h) - p.weight_potential_at(s - h)) / (2 * h);
    CHECK(fd == doctest::Approx(p.weight_rate_at(s)).epsilon(1e-6));
  }
  CHECK(p.weight_rate_at(-12.0) == doctest::Approx(1.0));   // -delta_- with delta_- = -1
  CHECK(p.weight_rate_at(12.0) == doctest::Approx(1.0));
}

TEST_CASE("coefficient profile reaches the end operators") {
  const auto a = LoopOperatorSpec::scalar(2, -1.0);
  const auto b = LoopOperatorSpec::scalar(2, 2.0);
  const auto p = build_contact_fiber_cylinder(a, b);
  CHECK(p.coefficient_at(-10.0)(0.3)(0, 0) == doctest::Approx(-1.0));
  CHECK(p.coefficient_at(10.0)(0.3)(1, 1) == doctest::Approx(2.0));
  CHECK(p.coefficient_at(0.0)(0.3)(0, 0) == doctest::Approx(0.5));
}

TEST_CASE("operator dimensions") {
  const Grid g{48, 16};
  const auto op = assemble(build_trivial_cylinder(1.0, 1.0, 0, 0, {}, g));
  const int m = op.grid.block;
  CHECK(op.field_cols() == 48 * m);
  CHECK(op.cols() == op.field_cols());
  CHECK(op.residual_rows == 47 * m);
  CHECK(op.rows() == op.residual_rows + op.boundary_rows_lo + op.boundary_rows_hi);
  CHECK(op.grid_tag() == "48x16/S12");

  const auto aug = assemble(build_trivial_cylinder(1.0, 1.0, 2, 2, {}, g));
  CHECK(aug.augmentation_cols == 4);
  CHECK(aug.cols() == aug.field_cols() + 4);

  // one-dimensional shift at one end merges into the other end's columns
  const auto b0 = assemble(build_trivial_cylinder(1.0, 1.0, 1, 2, {}, g));
  CHECK(b0.augmentation_cols == 3);
}

TEST_CASE("preconditions") {
  CHECK_THROWS_AS(build_trivial_cylinder(0.0, 1.0), Error);
  CHECK_THROWS_AS(build_trivial_cylinder(1.0, 7.0), Error);
  CHECK_THROWS_AS(build_plane(0.0), Error);
  // coarse s-grid violates the spacing rule for a large weight
  try {
    assemble(build_trivial_cylinder(3.0, 3.0, 0, 0, {}, Grid{12, 16}));
    FAIL("expected a resolution error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::resolution);
  }
  // degenerate end at zero weight
  try {
    build_contact_fiber_cylinder(LoopOperatorSpec::zero(2), LoopOperatorSpec::scalar(2, 1.0));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK((e.code() == ErrorCode::precondition || e.code() == ErrorCode::fredholm));
  }
}

TEST_CASE("dual weights and variants") {
  const auto p = build_trivial_cylinder(-1.0, 0.5);
  const auto d = with_negated_weights(p);
  CHECK(d.end(EndSign::negative).weight == doctest::Approx(1.0));
  CHECK(d.end(EndSign::positive).weight == doctest::Approx(-0.5));
  CHECK(with_s_max(p, 16.0).truncation.s_max == 16.0);
  CHECK(with_grid(p, Grid{64, 16}).grid == Grid{64, 16});
  CHECK(build_plane(-1.0).s_lo() == 0.0);
}

TEST_CASE("matrix market export") {
  const auto op = assemble(build_trivial_cylinder(0.1, 0.1, 0, 0, {}, Grid{8, 8}));
  std::ostringstream os;
  op.write_matrix_market(os);
  const std::string s = os.str();
  CHECK(s.rfind("%%MatrixMarket matrix coordinate real general", 0) == 0);
  CHECK(s.find('\r') == std::string::npos);
}

}  // TEST_SUITE
