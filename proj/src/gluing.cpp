#include "crlab/gluing.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

namespace crlab {

namespace {

int aligned_offset(double from, double to, double h) {
  const double steps = (from - to) / h;
  const double rounded = std::round(steps);
  if (std::abs(steps - rounded) > 1e-6) {
    std::ostringstream msg;
    msg << "component grid is offset by " << steps
        << " glued grid steps; choose tau as a multiple of half the s-spacing";
    throw Error(ErrorCode::precondition, msg.str());
  }
  return static_cast<int>(rounded);
}

void transplant(const DiscreteOperator& op, const CRProblem& component, const Eigen::MatrixXd& ker,
                double shift, const std::function<double(double)>& beta, const GluedProblem& glued,
                const DiscreteOperator& op_glued, Eigen::MatrixXd& out, Eigen::Index first_col) {
  if (ker.cols() == 0) return;
  if (op.augmentation_cols != 0) {
    throw Error(ErrorCode::precondition, "transplants of augmented kernels are not supported");
  }
  const auto& g = op.grid;
  const auto& gg = op_glued.grid;
  if (g.block != gg.block || std::abs(g.spacing - gg.spacing) > 1e-12 * gg.spacing) {
    throw Error(ErrorCode::precondition, "component and glued grids differ in spacing or t-resolution");
  }
  const int offset = aligned_offset(g.s_lo + shift, gg.s_lo, gg.spacing);
  const int m = g.block;
  for (Eigen::Index c = 0; c < ker.cols(); ++c) {
    for (int j = 0; j < g.s_nodes; ++j) {
      const double s = g.node(j);
      const double b = beta(s);
      if (b == 0.0) continue;
      const int jj = j + offset;
      if (jj < 0 || jj >= gg.s_nodes) continue;
      // Re-conjugate: the glued potential differs from the component's by a constant.
      const double factor =
          b * std::exp(glued.problem.weight_potential_at(s + shift) - component.weight_potential_at(s));
      out.block(static_cast<Eigen::Index>(jj) * m, first_col + c, m, 1) =
          factor * ker.block(static_cast<Eigen::Index>(j) * m, c, m, 1);
    }
  }
}

std::vector<double> paired_singular_values(const SaddleSpectrum& sp) {
  const auto d = static_cast<std::size_t>(std::abs(sp.rows - sp.cols));
  std::vector<double> sigma;
  for (std::size_t i = d; i + 1 < sp.eigenvalues.size(); i += 2) {
    sigma.push_back(0.5 * (std::abs(sp.eigenvalues[i]) + std::abs(sp.eigenvalues[i + 1])));
  }
  return sigma;
}

}  // namespace

double GluingConfig::beta_u(double s) const { return 1.0 - smoothstep(s - tau + 1.0); }
double GluingConfig::beta_w(double s) const { return smoothstep(s + tau); }

void GluingConfig::validate() const {
  if (!(tau > neck + 2.0)) {
    std::ostringstream msg;
    msg << "gluing parameter tau = " << tau << " must exceed N' + 2 = " << neck + 2.0;
    throw Error(ErrorCode::precondition, msg.str());
  }
}

GluedProblem glue_with_layout(const CRProblem& u, const CRProblem& w, double tau) {
  u.validate();
  w.validate();
  if (w.domain_kind != DomainKind::cylinder) {
    throw Error(ErrorCode::incompatible_ends, "the upper component must be a cylinder");
  }
  if (u.fiber != w.fiber || u.dim != w.dim) {
    throw Error(ErrorCode::incompatible_ends, "components have different fibers");
  }
  const EndSpec& up = u.end(EndSign::positive);
  const EndSpec& wm = w.end(EndSign::negative);
  if (!up.asymptotic.coeff.same_as(wm.asymptotic.coeff, 1e-12)) {
    throw Error(ErrorCode::incompatible_ends,
                "shared end: u's positive and w's negative asymptotic operators differ");
  }
  if (std::abs(up.weight_rate() - wm.weight_rate()) > 1e-12) {
    std::ostringstream msg;
    msg << "shared end weights do not match (u: " << up.weight << ", w: " << wm.weight
        << "; need delta_u = -delta_w)";
    throw Error(ErrorCode::incompatible_ends, msg.str());
  }
  if (up.shift_dims != 0 || wm.shift_dims != 0) {
    throw Error(ErrorCode::incompatible_ends, "the shared end cannot carry shift parameters");
  }
  if (u.truncation.neck != w.truncation.neck) {
    throw Error(ErrorCode::incompatible_ends, "components use different N'");
  }
  if (u.grid.t_nodes != w.grid.t_nodes) {
    throw Error(ErrorCode::incompatible_ends, "components use different t-resolutions");
  }
  const double hu = (u.s_hi() - u.s_lo()) / (u.grid.s_nodes - 1);
  const double hw = (w.s_hi() - w.s_lo()) / (w.grid.s_nodes - 1);
  if (std::abs(hu - hw) > 1e-12 * hu) {
    throw Error(ErrorCode::incompatible_ends, "components use different s-spacings");
  }

  GluedProblem out;
  out.config = {tau, u.truncation.neck};
  out.config.validate();
  const bool plane = u.domain_kind == DomainKind::plane;
  // Centered coordinate for cylinders; plane keeps its cap at g = 0.
  out.shift_u = plane ? 0.0 : -tau;
  out.shift_w = plane ? 2.0 * tau : tau;

  CRProblem& p = out.problem;
  p.domain_kind = u.domain_kind;
  p.fiber = u.fiber;
  p.dim = u.dim;
  p.decay_rate = std::min(u.decay_rate, w.decay_rate);
  const double lo = u.s_lo() + out.shift_u;
  const double hi = w.s_hi() + out.shift_w;
  p.truncation.s_max = hi;
  p.truncation.neck = u.truncation.neck + (plane ? 2.0 * tau : tau);
  if (plane && lo != 0.0) throw Error(ErrorCode::assembly, "glued plane must start at 0");
  if (!plane && std::abs(lo + hi) > 1e-12 * hi) {
    throw Error(ErrorCode::incompatible_ends, "components have different truncation lengths");
  }

  if (!plane) {
    EndSpec e = u.end(EndSign::negative);
    e.cutoff -= out.shift_u;
    p.ends.push_back(e);
  }
  EndSpec e = w.end(EndSign::positive);
  e.cutoff += out.shift_w;
  p.ends.push_back(e);

  for (const auto& k : u.coeff_knots) p.coeff_knots.push_back({k.s + out.shift_u, k.coeff});
  for (const auto& k : w.coeff_knots) p.coeff_knots.push_back({k.s + out.shift_w, k.coeff});
  for (const auto& k : u.weight_knots) p.weight_knots.push_back({k.s + out.shift_u, k.rate});
  for (const auto& k : w.weight_knots) p.weight_knots.push_back({k.s + out.shift_w, k.rate});
  const double neck_lo = u.coeff_knots.back().s + out.shift_u;
  const double neck_hi = w.coeff_knots.front().s + out.shift_w;
  if (!(neck_lo < neck_hi) ||
      !(u.weight_knots.back().s + out.shift_u < w.weight_knots.front().s + out.shift_w)) {
    throw Error(ErrorCode::precondition, "tau too small: component profiles overlap in the neck");
  }

  p.grid.t_nodes = u.grid.t_nodes;
  p.grid.s_nodes = static_cast<int>(std::lround((hi - lo) / hu)) + 1;
  p.validate();
  return out;
}

CRProblem glue(const CRProblem& u, const CRProblem& w, double tau) {
  return glue_with_layout(u, w, tau).problem;
}

Eigen::MatrixXd ApproximateKernel::orthonormal() const {
  if (basis.cols() == 0) return basis;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(basis);
  return qr.householderQ() * Eigen::MatrixXd::Identity(basis.rows(), basis.cols());
}

ApproximateKernel approximate_kernel(const DiscreteOperator& op_u, const Eigen::MatrixXd& ker_u,
                                     const DiscreteOperator& op_w, const Eigen::MatrixXd& ker_w,
                                     const GluedProblem& glued, const DiscreteOperator& op_glued) {
  glued.config.validate();
  ApproximateKernel out;
  out.m = static_cast<int>(ker_u.cols());
  out.n = static_cast<int>(ker_w.cols());
  out.basis = Eigen::MatrixXd::Zero(op_glued.cols(), out.m + out.n);
  if (out.m + out.n == 0) return out;
  // Components are reconstructed from the glued problem's inverse layout.
  const auto& cfg = glued.config;
  CRProblem cu;
  cu.weight_knots = {};
  for (const auto& k : glued.problem.weight_knots) {
    if (k.s - glued.shift_u <= cfg.tau) cu.weight_knots.push_back({k.s - glued.shift_u, k.rate});
  }
  CRProblem cw;
  for (const auto& k : glued.problem.weight_knots) {
    if (k.s - glued.shift_w >= -cfg.tau) cw.weight_knots.push_back({k.s - glued.shift_w, k.rate});
  }
  transplant(op_u, cu, ker_u, glued.shift_u, [&cfg](double s) { return cfg.beta_u(s); }, glued,
             op_glued, out.basis, 0);
  transplant(op_w, cw, ker_w, glued.shift_w, [&cfg](double s) { return cfg.beta_w(s); }, glued,
             op_glued, out.basis, out.m);
  Eigen::MatrixXd b = out.basis;
  for (Eigen::Index c = 0; c < b.cols(); ++c) {
    const double nrm = b.col(c).norm();
    if (nrm > 0.0) b.col(c) /= nrm;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(b.transpose() * b);
  const auto& sv = svd.singularValues();
  out.gram_condition = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1)
                                                : std::numeric_limits<double>::infinity();
  return out;
}

std::vector<double> transplant_residuals(const DiscreteOperator& op_glued,
                                         const ApproximateKernel& kernel) {
  std::vector<double> out;
  for (Eigen::Index c = 0; c < kernel.basis.cols(); ++c) {
    const Eigen::VectorXd f = kernel.basis.col(c);
    const double nrm = f.norm();
    out.push_back(nrm > 0.0 ? (op_glued.matrix * f).norm() / nrm : 0.0);
  }
  return out;
}

double stability_constant(const DiscreteOperator& op_glued, const ApproximateKernel& kernel,
                          const TolerancePolicy& policy) {
  const Eigen::MatrixXd n = kernel.orthonormal();
  const auto k = static_cast<int>(n.cols());
  const auto d = static_cast<int>(std::abs(op_glued.rows() - op_glued.cols()));
  SaddleOptions opts;
  opts.method = policy.solver;
  opts.seed = policy.seed;
  opts.vectors = false;
  const SaddleSpectrum sp =
      saddle_spectrum(op_glued.matrix, d + 2 * k + 8, opts, k > 0 ? &n : nullptr);
  const auto sigma = paired_singular_values(sp);
  if (static_cast<int>(sigma.size()) <= k) {
    throw Error(ErrorCode::numerical, "too few singular values for the stability constant");
  }
  return sigma[k];
}

double neck_decay_rate(const CRProblem& u) {
  const EndSpec& e = u.end(EndSign::positive);
  const auto spec = spectrum(assemble_loop_operator(e.asymptotic, u.grid.t_nodes));
  double best = std::numeric_limits<double>::infinity();
  for (const auto& v : spec.eigenvalues) best = std::min(best, std::abs(v.value - e.weight_rate()));
  return best;
}

AdditivityReport verify_additivity(const CRProblem& u, const CRProblem& w,
                                   const std::vector<double>& taus,
                                   const TolerancePolicy& policy) {
  if (taus.empty()) throw Error(ErrorCode::input, "no gluing parameters given");
  const auto op_u = assemble(u);
  const auto op_w = assemble(w);
  const auto ku = kernel_basis(op_u.matrix, policy, op_u.grid_tag());
  const auto kw = kernel_basis(op_w.matrix, policy, op_w.grid_tag());

  AdditivityReport rep;
  rep.decay_rate = neck_decay_rate(u);
  std::vector<double> sorted = taus;
  std::sort(sorted.begin(), sorted.end());
  for (double tau : sorted) {
    const auto gp = glue_with_layout(u, w, tau);
    const auto op = assemble(gp.problem);
    AdditivityRow row;
    row.tau = tau;
    row.ind_u = ku.report.index;
    row.ind_w = kw.report.index;
    const auto r = numerical_index(op, policy);
    row.ind_glued = r.index;
    row.dim_ker_glued = r.dim_ker;
    row.decisive = r.decisive && ku.report.decisive && kw.report.decisive;
    const auto nk = approximate_kernel(op_u, ku.kernel, op_w, kw.kernel, gp, op);
    row.approx_kernel_dim = static_cast<int>(nk.size());
    row.gram_condition = nk.gram_condition;
    const auto res = transplant_residuals(op, nk);
    row.max_residual = res.empty() ? 0.0 : *std::max_element(res.begin(), res.end());
    row.scaled_residual = row.max_residual * std::exp(rep.decay_rate * gp.config.rho());
    row.stability_constant = stability_constant(op, nk, policy);
    rep.rows.push_back(row);
  }

  std::size_t first = rep.rows.size();
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    if (rep.rows[i].decisive) {
      first = i;
      break;
    }
  }
  rep.additive = first < rep.rows.size();
  for (std::size_t i = first; i < rep.rows.size(); ++i) {
    const auto& row = rep.rows[i];
    if (row.decisive && row.ind_glued != row.ind_u + row.ind_w) rep.additive = false;
  }

  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  bool any = false;
  for (const auto& row : rep.rows) {
    if (row.approx_kernel_dim == 0) continue;
    any = true;
    lo = std::min(lo, row.scaled_residual);
    hi = std::max(hi, row.scaled_residual);
  }
  rep.residual_decay = !any || (lo > 0.0 && hi / lo <= 3.0);

  const std::size_t half = rep.rows.size() / 2;
  double slo = std::numeric_limits<double>::infinity();
  double shi = 0.0;
  for (std::size_t i = half; i < rep.rows.size(); ++i) {
    slo = std::min(slo, rep.rows[i].stability_constant);
    shi = std::max(shi, rep.rows[i].stability_constant);
  }
  rep.stability_plateau = slo > 0.0 && (shi - slo) / slo < 0.1;

  const bool surjective = ku.report.dim_coker == 0 && kw.report.dim_coker == 0;
  rep.dimension_match = !surjective || rep.rows.back().dim_ker_glued ==
                                           static_cast<int>(ku.kernel.cols() + kw.kernel.cols());
  return rep;
}

}  // namespace crlab
