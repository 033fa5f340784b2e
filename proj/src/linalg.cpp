#include "crlab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>

#include <Eigen/SparseLU>

#include "crlab/errors.hpp"

namespace crlab {

namespace {

using Apply = std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>;

SparseMatrix saddle(const SparseMatrix& m, double shift) {
  const Eigen::Index r = m.rows();
  const Eigen::Index c = m.cols();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(2 * m.nonZeros() + r + c);
  for (int k = 0; k < m.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
      trips.emplace_back(it.row(), r + it.col(), it.value());
      trips.emplace_back(r + it.col(), it.row(), it.value());
    }
  }
  if (shift != 0.0) {
    for (Eigen::Index i = 0; i < r + c; ++i) trips.emplace_back(i, i, -shift);
  }
  SparseMatrix h(r + c, r + c);
  h.setFromTriplets(trips.begin(), trips.end());
  h.makeCompressed();
  return h;
}

Eigen::MatrixXd random_block(Eigen::Index n, int b, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd x(n, b);
  for (Eigen::Index j = 0; j < b; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) x(i, j) = normal(rng);
  }
  return x;
}

// Orthonormalize `w` against the first `used` columns of `basis`, then itself.
// Columns that collapse are replaced with fresh random directions.
Eigen::MatrixXd orthonormalize_block(const Eigen::MatrixXd& basis, Eigen::Index used,
                                     Eigen::MatrixXd w, std::mt19937_64& rng) {
  for (int pass = 0; pass < 3; ++pass) {
    for (int sweep = 0; sweep < 2 && used > 0; ++sweep) {
      const auto q = basis.leftCols(used);
      w -= q * (q.transpose() * w);
    }
    const double scale = std::max(1.0, w.cwiseAbs().maxCoeff());
    Eigen::Index good = 0;
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      for (Eigen::Index i = 0; i < good; ++i) w.col(j) -= w.col(i).dot(w.col(j)) * w.col(i);
      for (Eigen::Index i = 0; i < good; ++i) w.col(j) -= w.col(i).dot(w.col(j)) * w.col(i);
      const double n = w.col(j).norm();
      if (n > 1e-10 * scale) {
        w.col(j) /= n;
        if (good != j) w.col(good) = w.col(j);
        ++good;
      }
    }
    if (good == w.cols()) return w;
    w.rightCols(w.cols() - good) = random_block(w.rows(), static_cast<int>(w.cols() - good), rng);
  }
  throw Error(ErrorCode::numerical, "block Lanczos could not extend the Krylov basis");
}

struct RitzResult {
  Eigen::VectorXd values;  // eigenvalues of the applied operator
  Eigen::MatrixXd vectors;
};

// Block Lanczos (as Rayleigh-Ritz on the full block Krylov space) for the
// `count` eigenvalues of a symmetric operator with the largest magnitude.
RitzResult block_lanczos(const Apply& apply, Eigen::Index n, int count, const SaddleOptions& opts,
                         bool want_vectors) {
  const int b = std::max(opts.block_size, 1);
  const Eigen::Index cap = std::min<Eigen::Index>(n, static_cast<Eigen::Index>(b) * opts.max_blocks);
  std::mt19937_64 rng(opts.seed);
  Eigen::MatrixXd q(n, cap);
  Eigen::MatrixXd aq(n, cap);
  Eigen::Index used = 0;

  Eigen::MatrixXd next = orthonormalize_block(q, 0, random_block(n, b, rng), rng);
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(cap, cap);
  const Eigen::Index min_dim = std::min<Eigen::Index>(cap, 2 * count + 2 * b);
  int since_check = 0;
  while (true) {
    const Eigen::Index take = std::min<Eigen::Index>(next.cols(), cap - used);
    q.middleCols(used, take) = next.leftCols(take);
    aq.middleCols(used, take) = apply(next.leftCols(take));
    // Projected operator, grown by one block row/column at a time.
    const Eigen::MatrixXd fresh = q.leftCols(used + take).transpose() * aq.middleCols(used, take);
    t.block(0, used, used + take, take) = fresh;
    t.block(used, 0, take, used + take) = fresh.transpose();
    used += take;

    const bool exhausted = used >= cap;
    if ((used >= min_dim && ++since_check >= 2) || exhausted) {
      since_check = 0;
      Eigen::MatrixXd tu = t.topLeftCorner(used, used);
      tu = 0.5 * (tu + tu.transpose()).eval();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tu);
      if (es.info() != Eigen::Success) throw Error(ErrorCode::numerical, "Ritz eigensolver failed");
      std::vector<Eigen::Index> order(used);
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index c) {
        return std::abs(es.eigenvalues()(a)) > std::abs(es.eigenvalues()(c));
      });
      const int k = static_cast<int>(std::min<Eigen::Index>(count, used));
      Eigen::MatrixXd s(used, k);
      Eigen::VectorXd theta(k);
      for (int i = 0; i < k; ++i) {
        s.col(i) = es.eigenvectors().col(order[i]);
        theta(i) = es.eigenvalues()(order[i]);
      }
      const Eigen::MatrixXd y = q.leftCols(used) * s;
      const Eigen::MatrixXd r = aq.leftCols(used) * s - y * theta.asDiagonal();
      // Round-off in the dominant (structural) directions sets an absolute floor.
      const double floor = 1e-13 * std::abs(theta(0));
      bool converged = true;
      double worst = 0.0;
      for (int i = 0; i < k; ++i) {
        const double rel = (r.col(i).norm() - floor) / std::abs(theta(i));
        worst = std::max(worst, rel);
        if (rel > opts.tolerance) converged = false;
      }
      // Tight clusters can stall the last digits.  Each Ritz value is within
      // its residual of an eigenvalue, so a looser bound still pins the
      // singular values far below what a rank decision needs.
      if (exhausted && !converged && worst <= opts.fallback_tolerance) converged = true;
      if (converged || exhausted || used >= n) {
        if (!converged && used < n) {
          throw Error(ErrorCode::numerical, "shift-invert Lanczos did not converge");
        }
        RitzResult out;
        out.values = theta;
        if (want_vectors) out.vectors = y;
        return out;
      }
    }
    next = orthonormalize_block(q, used, aq.middleCols(used - take, take), rng);
  }
}

std::vector<Eigen::Index> order_by_magnitude(const Eigen::VectorXd& v) {
  std::vector<Eigen::Index> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return std::abs(v(a)) < std::abs(v(b)); });
  return idx;
}

}  // namespace

const char* to_string(SolverMethod m) {
  switch (m) {
    case SolverMethod::automatic: return "auto";
    case SolverMethod::dense: return "dense";
    case SolverMethod::lanczos: return "lanczos";
  }
  return "auto";
}

SolverMethod solver_method_from_string(const std::string& s) {
  if (s == "auto") return SolverMethod::automatic;
  if (s == "dense") return SolverMethod::dense;
  if (s == "lanczos") return SolverMethod::lanczos;
  throw Error(ErrorCode::input, "unknown solver method '" + s + "'");
}

double largest_singular_value(const SparseMatrix& m, std::uint64_t seed) {
  if (m.nonZeros() == 0) return 0.0;
  // Plain Lanczos on M^T M; extreme eigenvalues converge in a few dozen steps.
  const Eigen::Index n = m.cols();
  const int steps = static_cast<int>(std::min<Eigen::Index>(n, 40));
  std::mt19937_64 rng(seed);
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, steps + 1);
  q.col(0) = random_block(n, 1, rng).col(0).normalized();
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(steps, steps);
  int used = 0;
  for (int j = 0; j < steps; ++j) {
    Eigen::VectorXd w = m.transpose() * (m * q.col(j));
    for (int pass = 0; pass < 2; ++pass) {
      for (int i = 0; i <= j; ++i) {
        const double c = q.col(i).dot(w);
        if (pass == 0) t(i, j) += c;
        w -= c * q.col(i);
      }
    }
    used = j + 1;
    const double beta = w.norm();
    if (j + 1 < steps) {
      if (beta < 1e-13 * std::abs(t(j, j))) break;
      t(j + 1, j) = beta;
      q.col(j + 1) = w / beta;
    }
  }
  Eigen::MatrixXd tt = t.topLeftCorner(used, used);
  tt = 0.5 * (tt + tt.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tt, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

SaddleSpectrum saddle_spectrum(const SparseMatrix& m, int count, const SaddleOptions& opts,
                               const Eigen::MatrixXd* deflate) {
  SaddleSpectrum out;
  out.rows = m.rows();
  out.cols = m.cols();
  const Eigen::Index n = m.rows() + m.cols();
  for (int k = 0; k < m.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
      if (!std::isfinite(it.value())) throw Error(ErrorCode::numerical, "matrix has non-finite entries");
    }
  }
  if (deflate && deflate->rows() != m.cols()) {
    throw Error(ErrorCode::numerical, "deflation basis has the wrong length");
  }
  out.sigma_max = largest_singular_value(m, opts.seed);
  count = static_cast<int>(std::min<Eigen::Index>(count, n));

  SolverMethod method = opts.method;
  if (method == SolverMethod::automatic) {
    method = n <= opts.dense_limit ? SolverMethod::dense : SolverMethod::lanczos;
  }
  out.method = method;

  if (method == SolverMethod::dense) {
    Eigen::MatrixXd md = Eigen::MatrixXd(m);
    if (deflate) md -= (md * *deflate) * deflate->transpose();
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
    h.topRightCorner(m.rows(), m.cols()) = md;
    h.bottomLeftCorner(m.cols(), m.rows()) = md.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        h, opts.vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw Error(ErrorCode::numerical, "dense eigensolver failed");
    const auto idx = order_by_magnitude(es.eigenvalues());
    if (opts.vectors) out.vectors.resize(n, count);
    for (int i = 0; i < count; ++i) {
      out.eigenvalues.push_back(es.eigenvalues()(idx[i]));
      if (opts.vectors) out.vectors.col(i) = es.eigenvectors().col(idx[i]);
    }
    return out;
  }

  // Shift off zero by an amount far below any rank threshold but far above
  // round-off, so the factorization stays well defined with an exact kernel.
  const double mu = 0.7316 * 1e-9 * std::max(out.sigma_max, 1e-300);
  const SparseMatrix h = saddle(m, mu);
  Eigen::SparseLU<SparseMatrix> lu;
  lu.analyzePattern(h);
  lu.factorize(h);
  if (lu.info() != Eigen::Success) {
    throw Error(ErrorCode::numerical, "sparse LU of the shifted saddle matrix failed: " + lu.lastErrorMessage());
  }

  Apply apply = [&lu](const Eigen::MatrixXd& x) -> Eigen::MatrixXd { return lu.solve(x); };
  Eigen::MatrixXd z;
  Eigen::MatrixXd u;
  Eigen::PartialPivLU<Eigen::MatrixXd> small;
  if (deflate && deflate->cols() > 0) {
    // Woodbury update for H - [[0, M N N^T], [N N^T M^T, 0]].
    const Eigen::Index k = deflate->cols();
    u = Eigen::MatrixXd::Zero(n, 2 * k);
    u.topLeftCorner(m.rows(), k) = m * *deflate;
    u.bottomRightCorner(m.cols(), k) = *deflate;
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(2 * k, 2 * k);
    c.topRightCorner(k, k) = -Eigen::MatrixXd::Identity(k, k);
    c.bottomLeftCorner(k, k) = -Eigen::MatrixXd::Identity(k, k);
    z = lu.solve(u);
    small.compute(c + u.transpose() * z);
    apply = [&lu, &z, &u, &small](const Eigen::MatrixXd& x) -> Eigen::MatrixXd {
      Eigen::MatrixXd y = lu.solve(x);
      return y - z * small.solve(u.transpose() * y);
    };
  }

  const RitzResult ritz = block_lanczos(apply, n, count, opts, opts.vectors);
  Eigen::VectorXd lambda(ritz.values.size());
  for (Eigen::Index i = 0; i < lambda.size(); ++i) lambda(i) = mu + 1.0 / ritz.values(i);
  const auto idx = order_by_magnitude(lambda);
  if (opts.vectors) out.vectors.resize(n, lambda.size());
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    out.eigenvalues.push_back(lambda(idx[i]));
    if (opts.vectors) out.vectors.col(i) = ritz.vectors.col(idx[i]);
  }
  return out;
}

Eigen::MatrixXd orthonormal_range(const Eigen::MatrixXd& a, Eigen::Index rank) {
  if (rank <= 0 || a.cols() == 0) return Eigen::MatrixXd(a.rows(), 0);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU);
  return svd.matrixU().leftCols(std::min<Eigen::Index>(rank, svd.matrixU().cols()));
}

}  // namespace crlab
