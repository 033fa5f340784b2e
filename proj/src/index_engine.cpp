#include "crlab/index_engine.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <cmath>
#include <numbers>
#include <sstream>

namespace crlab {

namespace {

constexpr int kReportedSingularValues = 10;

// Signed N(hi) - N(lo), N(x) = #{eigenvalues < x}.
int counting_difference(const SpectrumReport& spec, double from, double to) {
  if (from == to) return 0;
  try {
    if (from < to) return count_window(spec, from, to);
    return -count_window(spec, to, from);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ambiguous_window) {
      throw Error(ErrorCode::precondition, std::string("weight on the asymptotic spectrum: ") + e.what());
    }
    throw;
  }
}

SpectrumReport end_spectrum(const EndSpec& e, int t_nodes) {
  return spectrum(assemble_loop_operator(e.asymptotic, t_nodes));
}

// Shift of the asymptotic operator seen by the weight-conjugated problem.
double end_shift(const EndSpec& e) { return e.weight_rate(); }

KernelBasis analyze(const SparseMatrix& m, const TolerancePolicy& policy, const std::string& tag,
                    bool want_vectors) {
  const Eigen::Index rows = m.rows();
  const Eigen::Index cols = m.cols();
  const Eigen::Index n = rows + cols;
  const auto d = static_cast<int>(std::abs(rows - cols));

  SaddleOptions opts;
  opts.method = policy.solver;
  opts.seed = policy.seed;
  opts.vectors = want_vectors;

  int count = d + 2 * (kReportedSingularValues + 2);
  SaddleSpectrum sp;
  double theta = 0.0;
  int z_total = 0;
  while (true) {
    sp = saddle_spectrum(m, count, opts);
    theta = policy.rel_threshold * sp.sigma_max;
    z_total = static_cast<int>(std::count_if(sp.eigenvalues.begin(), sp.eigenvalues.end(),
                                             [theta](double l) { return std::abs(l) < theta; }));
    // Keep at least one accepted pair beyond the cut.
    if (z_total + 2 < static_cast<int>(sp.eigenvalues.size()) || count >= n) break;
    count = static_cast<int>(std::min<Eigen::Index>(n, 2 * count));
  }

  std::vector<double> sigma;
  for (std::size_t i = d; i + 1 < sp.eigenvalues.size(); i += 2) {
    sigma.push_back(0.5 * (std::abs(sp.eigenvalues[i]) + std::abs(sp.eigenvalues[i + 1])));
  }
  if (static_cast<Eigen::Index>(sp.eigenvalues.size()) == n && (sp.eigenvalues.size() - d) % 2 == 1) {
    sigma.push_back(std::abs(sp.eigenvalues.back()));
  }
  const auto z = static_cast<int>(
      std::count_if(sigma.begin(), sigma.end(), [theta](double s) { return s < theta; }));
  const bool parity_ok = z_total == d + 2 * z;

  KernelBasis out;
  IndexReport& r = out.report;
  const Eigen::Index rank = std::min(rows, cols) - z;
  r.dim_ker = static_cast<int>(cols - rank);
  r.dim_coker = static_cast<int>(rows - rank);
  r.index = r.dim_ker - r.dim_coker;
  for (std::size_t i = 0; i < sigma.size() && i < kReportedSingularValues; ++i) {
    r.singular_values.push_back(sigma[i]);
  }
  const double floor = 1e-3 * theta;
  const double rejected = z > 0 ? std::max(sigma[z - 1], floor) : floor;
  r.gap_ratio = z < static_cast<int>(sigma.size()) ? sigma[z] / rejected
                                                   : std::numeric_limits<double>::infinity();
  r.decisive = parity_ok && r.gap_ratio >= policy.min_gap;
  r.method = IndexMethod::direct_svd;
  r.grid_tag = tag;
  r.tolerance_policy = policy;
  r.sigma_max = sp.sigma_max;
  r.threshold = theta;
  r.solver = sp.method;

  if (!r.decisive && policy.strict) {
    std::ostringstream msg;
    msg << "rank decision at threshold " << theta << " has gap ratio " << r.gap_ratio
        << (parity_ok ? "" : " and inconsistent zero pairing") << " (grid " << tag << ")";
    throw Error(ErrorCode::indecision, msg.str());
  }
  if (want_vectors) {
    const Eigen::MatrixXd y = sp.vectors.leftCols(z_total);
    out.kernel = orthonormal_range(y.bottomRows(cols), r.dim_ker);
    out.cokernel = orthonormal_range(y.topRows(rows), r.dim_coker);
  }
  return out;
}

}  // namespace

const char* to_string(IndexMethod m) {
  switch (m) {
    case IndexMethod::direct_svd: return "direct_svd";
    case IndexMethod::analytic_wallcrossing: return "analytic_wallcrossing";
    case IndexMethod::spectral_flow: return "spectral_flow";
  }
  return "direct_svd";
}

IndexReport numerical_index(const SparseMatrix& m, const TolerancePolicy& policy,
                            const std::string& grid_tag) {
  return analyze(m, policy, grid_tag, false).report;
}

IndexReport numerical_index(const DiscreteOperator& op, const TolerancePolicy& policy) {
  return numerical_index(op.matrix, policy, op.grid_tag());
}

KernelBasis kernel_basis(const SparseMatrix& m, const TolerancePolicy& policy,
                         const std::string& grid_tag) {
  return analyze(m, policy, grid_tag, true);
}

int multi_end_index(int positive_ends, int negative_ends) {
  if (positive_ends < 0 || negative_ends < 0 || positive_ends + negative_ends == 0) {
    throw Error(ErrorCode::input, "need at least one puncture");
  }
  return 2 - 2 * (positive_ends + negative_ends);
}

CRProblem with_weights(const CRProblem& p, double weight_minus, double weight_plus) {
  CRProblem q = p;
  for (auto& e : q.ends) e.weight = e.sign == EndSign::negative ? weight_minus : weight_plus;
  if (q.domain_kind == DomainKind::plane) {
    for (auto& k : q.weight_knots) k.rate = weight_plus;
  } else {
    q.weight_knots.front().rate = -weight_minus;
    q.weight_knots.back().rate = weight_plus;
    if (q.weight_knots.size() == 1) {
      throw Error(ErrorCode::input, "cylinder weight profile needs two knots");
    }
  }
  return q;
}

int predicted_index_change(const CRProblem& a, const CRProblem& b) {
  if (a.ends.size() != b.ends.size()) throw Error(ErrorCode::input, "problems differ in ends");
  int change = b.augmentation_dims() - a.augmentation_dims();
  for (std::size_t i = 0; i < a.ends.size(); ++i) {
    const auto spec = end_spectrum(a.ends[i], a.grid.t_nodes);
    const double from = end_shift(a.ends[i]);
    const double to = end_shift(b.ends[i]);
    // Index = #{lambda_- < w'_-} - #{lambda_+ < w'_+} + const.
    const int diff = counting_difference(spec, from, to);
    change += a.ends[i].sign == EndSign::negative ? diff : -diff;
  }
  return change;
}

int analytic_index(const CRProblem& p) {
  p.validate();
  const int aug = p.augmentation_dims();
  if (p.domain_kind == DomainKind::plane) {
    // Anchor: weight -pi admits exactly the constants.
    if (p.fiber != Fiber::complex_line) {
      throw Error(ErrorCode::input, "plane problems are complex-line only");
    }
    const CRProblem anchor = with_weights(p, 0.0, -std::numbers::pi);
    CRProblem bare = p;
    for (auto& e : bare.ends) e.shift_dims = 0;
    CRProblem bare_anchor = anchor;
    for (auto& e : bare_anchor.ends) e.shift_dims = 0;
    return 2 + predicted_index_change(bare_anchor, bare) + aug;
  }
  if (p.fiber == Fiber::complex_line) {
    // Anchor: mixed weights with w' constant, which is invertible.
    const double dp = p.end(EndSign::positive).weight;
    CRProblem bare = p;
    for (auto& e : bare.ends) e.shift_dims = 0;
    const CRProblem anchor = with_weights(bare, -dp, dp);
    return predicted_index_change(anchor, bare) + aug;
  }
  // Contact fiber: minus the flow of s -> S(s) - w'(s) across the whole box.
  const double lo = p.s_lo();
  const double hi = p.s_hi();
  LoopPath path = [&p, lo, hi](double u) {
    const double s = lo + u * (hi - lo);
    LoopOperatorSpec spec;
    spec.dim = p.dim;
    spec.coeff = p.coefficient_at(s).shifted(-p.weight_rate_at(s));
    return spec;
  };
  return -spectral_flow(path, 200, p.grid.t_nodes) + aug;
}

IndexReport analytic_report(const CRProblem& p) {
  IndexReport r;
  r.index = analytic_index(p);
  r.dim_ker = std::max(r.index, 0);
  r.dim_coker = std::max(-r.index, 0);
  r.method = p.fiber == Fiber::contact_fiber && p.domain_kind == DomainKind::cylinder
                 ? IndexMethod::spectral_flow
                 : IndexMethod::analytic_wallcrossing;
  r.decisive = true;
  r.gap_ratio = std::numeric_limits<double>::infinity();
  std::ostringstream tag;
  tag << "analytic/t" << p.grid.t_nodes;
  r.grid_tag = tag.str();
  return r;
}

SweepResult delta_sweep(const CRProblem& problem, const std::vector<double>& deltas,
                        const Grid& grid, const TolerancePolicy& policy) {
  SweepResult out;
  auto sign_of = [](double w) { return w < 0.0 ? -1.0 : 1.0; };
  const bool has_minus = problem.has_end(EndSign::negative);
  const double sm = has_minus ? sign_of(problem.end(EndSign::negative).weight) : 0.0;
  const double sp = sign_of(problem.end(EndSign::positive).weight);
  std::vector<std::pair<double, CRProblem>> accepted;
  for (double delta : deltas) {
    if (!(delta > 0.0)) throw Error(ErrorCode::input, "sweep deltas must be positive");
    if (problem.fiber == Fiber::complex_line && delta >= 2.0 * std::numbers::pi) {
      std::ostringstream msg;
      msg << "delta " << delta << " leaves (0, 2 pi); the complex-line model is only Fredholm-tracked there";
      throw Error(ErrorCode::precondition, msg.str());
    }
    SweepSample sample;
    sample.delta = delta;
    CRProblem q = with_weights(problem, sm * delta, sp * delta);
    q.grid = grid;
    try {
      sample.analytic = analytic_index(q);
      sample.report = numerical_index(assemble(q), policy);
      accepted.emplace_back(delta, q);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::fredholm && e.code() != ErrorCode::precondition &&
          e.code() != ErrorCode::ambiguous_window) {
        throw;
      }
      sample.flag = e.what();
      sample.report.reset();
    }
    out.samples.push_back(std::move(sample));
  }
  std::size_t prev = out.samples.size();
  std::size_t k = 0;
  for (std::size_t i = 0; i < out.samples.size(); ++i) {
    if (!out.samples[i].report) continue;
    if (prev < out.samples.size()) {
      const auto& a = out.samples[prev];
      const auto& b = out.samples[i];
      const int jump = b.report->index - a.report->index;
      const int crossed = predicted_index_change(accepted[k - 1].second, accepted[k].second);
      if (jump != 0 || crossed != 0) out.jumps.push_back({a.delta, b.delta, jump, crossed});
    }
    prev = i;
    ++k;
  }
  return out;
}

std::vector<ConvergenceRow> convergence_study(const CRProblem& problem,
                                              const std::vector<Grid>& grids,
                                              const TolerancePolicy& policy) {
  if (grids.size() < 3) throw Error(ErrorCode::input, "convergence study needs at least 3 grids");
  for (std::size_t i = 1; i < grids.size(); ++i) {
    if (grids[i].s_nodes <= grids[i - 1].s_nodes || grids[i].t_nodes < grids[i - 1].t_nodes) {
      throw Error(ErrorCode::input, "convergence grids must increase in resolution");
    }
  }
  std::vector<ConvergenceRow> rows;
  for (const auto& g : grids) {
    const auto t0 = std::chrono::steady_clock::now();
    ConvergenceRow row;
    row.grid = g;
    row.report = numerical_index(assemble(problem, g), policy);
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rows.push_back(std::move(row));
  }
  const auto& a = rows[rows.size() - 2].report;
  const auto& b = rows.back().report;
  if (a.index != b.index || a.dim_ker != b.dim_ker) {
    std::ostringstream msg;
    msg << "index did not stabilize over the finest grids: " << a.index << " (" << a.grid_tag
        << ") vs " << b.index << " (" << b.grid_tag << ")";
    throw Error(ErrorCode::instability, msg.str());
  }
  return rows;
}

DualityCheck duality_check(const CRProblem& problem, const TolerancePolicy& policy) {
  DualityCheck c;
  const auto op = assemble(problem);
  c.index = numerical_index(op, policy).index;
  const SparseMatrix mt = op.matrix.transpose();
  c.index_transpose = numerical_index(mt, policy, op.grid_tag() + "/T").index;
  c.index_dual_weights = numerical_index(assemble(with_negated_weights(problem)), policy).index;
  const int aug = problem.augmentation_dims();
  c.holds = c.index == -c.index_transpose && (c.index - aug) == -(c.index_dual_weights - aug);
  return c;
}

}  // namespace crlab
