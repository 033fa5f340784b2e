#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "crlab/cylinder_ops.hpp"
#include "crlab/linalg.hpp"

using namespace crlab;

namespace {

// M = U diag(sigma) V^T with random orthogonal U, V.
SparseMatrix planted(int rows, int cols, const std::vector<double>& sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd a = Eigen::MatrixXd::NullaryExpr(rows, rows, [&] { return nd(rng); });
  Eigen::MatrixXd b = Eigen::MatrixXd::NullaryExpr(cols, cols, [&] { return nd(rng); });
  Eigen::MatrixXd u = Eigen::HouseholderQR<Eigen::MatrixXd>(a).householderQ();
  Eigen::MatrixXd v = Eigen::HouseholderQR<Eigen::MatrixXd>(b).householderQ();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(rows, cols);
  for (std::size_t i = 0; i < sigma.size(); ++i) d(i, i) = sigma[i];
  Eigen::MatrixXd m = u * d * v.transpose();
  return m.sparseView();
}

}  // namespace

TEST_SUITE("linalg") {

TEST_CASE("largest singular value") {
  const auto m = planted(30, 20, {5.0, 3.0, 1.0}, 1);
  CHECK(largest_singular_value(m) == doctest::Approx(5.0).epsilon(1e-3));
}

TEST_CASE("saddle spectrum pairs singular values") {
  std::vector<double> sigma;
  for (int i = 0; i < 20; ++i) sigma.push_back(1.0 + i);
  const auto m = planted(24, 20, sigma, 2);
  SaddleOptions opts;
  opts.method = SolverMethod::dense;
  const auto sp = saddle_spectrum(m, 10, opts);
  // |rows - cols| structural zeros come first
  for (int i = 0; i < 4; ++i) CHECK(std::abs(sp.eigenvalues[i]) < 1e-10);
  CHECK(std::abs(sp.eigenvalues[4]) == doctest::Approx(1.0));
  CHECK(std::abs(sp.eigenvalues[5]) == doctest::Approx(1.0));
}

TEST_CASE("dense and shift-invert Lanczos agree on an assembled operator") {
  const auto op = assemble(build_trivial_cylinder(1.0, 1.0, 0, 0, {}, Grid{48, 8}));
  SaddleOptions dense;
  dense.method = SolverMethod::dense;
  SaddleOptions lanczos;
  lanczos.method = SolverMethod::lanczos;
  const auto a = saddle_spectrum(op.matrix, 12, dense);
  const auto b = saddle_spectrum(op.matrix, 12, lanczos);
  CHECK(b.method == SolverMethod::lanczos);
  const double scale = a.sigma_max;
  for (int i = 0; i < 12; ++i) {
    CHECK(std::abs(std::abs(a.eigenvalues[i]) - std::abs(b.eigenvalues[i])) < 1e-7 * scale);
  }
}

TEST_CASE("deflation removes the given directions") {
  const auto m = planted(20, 20, std::vector<double>(20, 2.0), 3);
  Eigen::MatrixXd n = Eigen::MatrixXd::Zero(20, 2);
  n(0, 0) = 1.0;
  n(1, 1) = 1.0;
  SaddleOptions opts;
  opts.method = SolverMethod::dense;
  const auto sp = saddle_spectrum(m, 6, opts, &n);
  int zeros = 0;
  for (double v : sp.eigenvalues) zeros += std::abs(v) < 1e-10;
  CHECK(zeros == 4);  // each deflated column gives a +-0 pair
}

TEST_CASE("orthonormal range") {
  Eigen::MatrixXd a(4, 2);
  a << 1, 1, 0, 1, 0, 0, 0, 0;
  const auto q = orthonormal_range(a, 2);
  CHECK((q.transpose() * q - Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-12);
}

TEST_CASE("solver method names") {
  CHECK(solver_method_from_string("dense") == SolverMethod::dense);
  CHECK(std::string(to_string(SolverMethod::lanczos)) == "lanczos");
  CHECK_THROWS_AS(solver_method_from_string("magic"), Error);
}

}  // TEST_SUITE
