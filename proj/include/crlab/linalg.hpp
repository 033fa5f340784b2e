#pragma once

// Near-zero singular structure of sparse rectangular matrices.
//
// Everything goes through the symmetric saddle matrix H = [[0, M], [M^T, 0]],
// whose eigenvalues are +-sigma_i plus |rows - cols| structural zeros.  Small
// problems use a dense eigensolver; larger ones use shift-invert block Lanczos
// with full reorthogonalization around a tiny shift mu.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace crlab {

using SparseMatrix = Eigen::SparseMatrix<double>;

enum class SolverMethod { automatic, dense, lanczos };

const char* to_string(SolverMethod m);
SolverMethod solver_method_from_string(const std::string& s);

struct SaddleOptions {
  SolverMethod method = SolverMethod::automatic;
  /// automatic picks dense when rows + cols does not exceed this.
  int dense_limit = 1600;
  int block_size = 8;
  int max_blocks = 80;
  /// Relative Ritz residual accepted for the shift-inverted eigenvalues.
  double tolerance = 1e-7;
  /// Accepted instead when the Krylov budget runs out.
  double fallback_tolerance = 1e-4;
  std::uint64_t seed = 0x5eed;
  bool vectors = true;
};

/// Eigenpairs of H (or of H with the right factor deflated) closest to zero.
struct SaddleSpectrum {
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  std::vector<double> eigenvalues;  // ascending in |lambda|
  Eigen::MatrixXd vectors;          // (rows + cols) x n, or empty
  double sigma_max = 0.0;
  SolverMethod method = SolverMethod::dense;
};

/// Largest singular value, to a few digits.
double largest_singular_value(const SparseMatrix& m, std::uint64_t seed = 0x5eed);

/// At least `count` eigenpairs of H nearest zero.  With `deflate` (orthonormal
/// columns N, cols x k) the matrix is M (I - N N^T) instead of M.
SaddleSpectrum saddle_spectrum(const SparseMatrix& m, int count, const SaddleOptions& opts = {},
                               const Eigen::MatrixXd* deflate = nullptr);

/// Orthonormal basis (columns) for the dominant `rank` directions of `a`.
Eigen::MatrixXd orthonormal_range(const Eigen::MatrixXd& a, Eigen::Index rank);

}  // namespace crlab
