#pragma once

// Kernel/cokernel dimensions and Fredholm indices of assembled operators, the
// analytic integer bookkeeping they are checked against, weight sweeps and
// grid-convergence studies.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "crlab/cylinder_ops.hpp"
#include "crlab/linalg.hpp"

namespace crlab {

enum class IndexMethod { direct_svd, analytic_wallcrossing, spectral_flow };

const char* to_string(IndexMethod m);

struct TolerancePolicy {
  double rel_threshold = 1e-6;  // theta = rel_threshold * sigma_max
  double min_gap = 1e3;
  bool strict = false;  // indecisive rank -> indecision error
  SolverMethod solver = SolverMethod::automatic;
  std::uint64_t seed = 0x5eed;
};

struct IndexReport {
  int dim_ker = 0;
  int dim_coker = 0;
  int index = 0;
  std::vector<double> singular_values;  // smallest (up to 10), ascending
  double gap_ratio = 0.0;
  bool decisive = false;
  IndexMethod method = IndexMethod::direct_svd;
  std::string grid_tag;
  TolerancePolicy tolerance_policy;
  double sigma_max = 0.0;
  double threshold = 0.0;
  SolverMethod solver = SolverMethod::dense;

  double min_singular_value() const {
    return singular_values.empty() ? 0.0 : singular_values.front();
  }
};

IndexReport numerical_index(const SparseMatrix& m, const TolerancePolicy& policy = {},
                            const std::string& grid_tag = {});
IndexReport numerical_index(const DiscreteOperator& op, const TolerancePolicy& policy = {});

struct KernelBasis {
  IndexReport report;
  Eigen::MatrixXd kernel;    // cols x dim_ker, orthonormal
  Eigen::MatrixXd cokernel;  // rows x dim_coker, orthonormal
};

KernelBasis kernel_basis(const SparseMatrix& m, const TolerancePolicy& policy = {},
                         const std::string& grid_tag = {});

/// Integer index without assembling the 2D operator.
int analytic_index(const CRProblem& problem);
IndexReport analytic_report(const CRProblem& problem);

/// L_1 index of a sphere with l positive and m negative punctures, all weights +delta.
int multi_end_index(int positive_ends, int negative_ends);

/// Replace the end weights (and rebuild the weight-rate profile).
CRProblem with_weights(const CRProblem& p, double weight_minus, double weight_plus);

/// Signed index change predicted from the end spectra when the weights move
/// from configuration a to configuration b.
int predicted_index_change(const CRProblem& a, const CRProblem& b);

struct SweepSample {
  double delta = 0.0;
  std::optional<IndexReport> report;  // empty when skipped
  std::string flag;                   // reason for skipping
  std::optional<int> analytic;
};

struct JumpRow {
  double delta_lo = 0.0;
  double delta_hi = 0.0;
  int jump = 0;
  int crossed_multiplicity = 0;  // signed, from the end spectra
};

struct SweepResult {
  std::vector<SweepSample> samples;
  std::vector<JumpRow> jumps;
};

/// Each end keeps the sign of its current weight (+ when zero) and takes
/// magnitude delta.
SweepResult delta_sweep(const CRProblem& problem, const std::vector<double>& deltas,
                        const Grid& grid, const TolerancePolicy& policy = {});

struct ConvergenceRow {
  Grid grid;
  IndexReport report;
  double seconds = 0.0;
};

std::vector<ConvergenceRow> convergence_study(const CRProblem& problem,
                                              const std::vector<Grid>& grids,
                                              const TolerancePolicy& policy = {});

struct DualityCheck {
  int index = 0;
  int index_transpose = 0;     // index of the transposed matrix
  int index_dual_weights = 0;  // index with every weight negated
  bool holds = false;
};

DualityCheck duality_check(const CRProblem& problem, const TolerancePolicy& policy = {});

}  // namespace crlab
