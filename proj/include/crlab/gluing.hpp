#pragma once

// Operator-level gluing of two cylinder problems along a shared end, cutoff
// transplants of their kernels, and the stability constant of the glued
// operator on the complement of the transplants.

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "crlab/cylinder_ops.hpp"
#include "crlab/index_engine.hpp"

namespace crlab {

struct GluingConfig {
  double tau = 10.0;
  double neck = 6.0;  // N'

  double rho() const { return tau - neck; }
  /// beta_{tau,u} in u's own coordinate: 1 for s < tau - 1, 0 for s > tau.
  double beta_u(double s) const;
  /// beta_{tau,w} in w's own coordinate: 1 for s > -tau + 1, 0 for s < -tau.
  double beta_w(double s) const;
  void validate() const;
};

/// The glued problem plus the coordinate offsets g = s_u + shift_u = s_w + shift_w.
struct GluedProblem {
  CRProblem problem;
  GluingConfig config;
  double shift_u = 0.0;
  double shift_w = 0.0;
};

GluedProblem glue_with_layout(const CRProblem& u, const CRProblem& w, double tau);
CRProblem glue(const CRProblem& u, const CRProblem& w, double tau);

struct ApproximateKernel {
  Eigen::MatrixXd basis;  // glued cols x (m + n), raw transplants
  int m = 0;
  int n = 0;
  double gram_condition = 1.0;

  Eigen::Index size() const { return basis.cols(); }
  /// Orthonormal basis of the span (empty when there are no transplants).
  Eigen::MatrixXd orthonormal() const;
};

/// Transplants beta_u * f_i and beta_w * g_j onto the glued grid.  Kernel
/// vectors are given in the component operators' column coordinates.
ApproximateKernel approximate_kernel(const DiscreteOperator& op_u, const Eigen::MatrixXd& ker_u,
                                     const DiscreteOperator& op_w, const Eigen::MatrixXd& ker_w,
                                     const GluedProblem& glued, const DiscreteOperator& op_glued);

/// Per-transplant relative residual ||D f|| / ||f||.
std::vector<double> transplant_residuals(const DiscreteOperator& op_glued,
                                         const ApproximateKernel& kernel);

/// Smallest singular value of the glued operator restricted to N_tau^perp.
double stability_constant(const DiscreteOperator& op_glued, const ApproximateKernel& kernel,
                          const TolerancePolicy& policy = {});

/// Distance of the shared-end weight rate to the shared end's spectrum: the
/// rate at which kernel elements decay into the neck.
double neck_decay_rate(const CRProblem& u);

struct AdditivityRow {
  double tau = 0.0;
  int ind_u = 0;
  int ind_w = 0;
  int ind_glued = 0;
  bool decisive = false;
  double stability_constant = 0.0;
  double max_residual = 0.0;
  int dim_ker_glued = 0;
  int approx_kernel_dim = 0;
  double gram_condition = 1.0;
  double scaled_residual = 0.0;  // max_residual * e^{decay * rho}
};

struct AdditivityReport {
  std::vector<AdditivityRow> rows;
  double decay_rate = 0.0;
  bool additive = false;          // equality at every tau from the first decisive one
  bool residual_decay = false;    // scaled residual within a factor 3 across taus
  bool stability_plateau = false; // < 10% variation over the top half of taus
  bool dimension_match = false;   // dim ker glued == m + n at the top tau
};

AdditivityReport verify_additivity(const CRProblem& u, const CRProblem& w,
                                   const std::vector<double>& taus,
                                   const TolerancePolicy& policy = {});

}  // namespace crlab
