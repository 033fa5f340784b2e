#pragma once

// Cauchy-Riemann type operators d/ds + J0 d/dt + B(s,t) on truncated cylinders
// [-S, S] x S^1 and capped planes [0, S] x S^1.
//
// The operator is assembled in weight-conjugated form: with w'(s) the weight
// rate (w' -> delta_+ at the positive end, -delta_- at the negative end) the
// unknown eta = e^{w} xi satisfies d/ds eta + (A(s) - w'(s)) eta = e^{w} f, so
// the weighted problem becomes an unweighted one with shifted asymptotics.
//
// Discretization: Fourier Galerkin in t, box scheme (midpoint rule) in s.
// Rows at each end project the boundary trace onto the eigenspaces of the
// shifted asymptotic operator that are incompatible with decay (positive
// spectrum at s_lo, negative at s_hi); the plane replaces the s = 0 rows by
// the cap condition.  Without these rows a truncated problem has index zero
// regardless of the weights.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "crlab/loop_ops.hpp"

namespace crlab {

enum class EndSign { negative, positive };
enum class DomainKind { cylinder, plane };
enum class Fiber { complex_line, contact_fiber };

const char* to_string(EndSign s);
const char* to_string(DomainKind k);
const char* to_string(Fiber f);
EndSign end_sign_from_string(const std::string& s);
DomainKind domain_kind_from_string(const std::string& s);
Fiber fiber_from_string(const std::string& s);

struct EndSpec {
  EndSign sign = EndSign::positive;
  LoopOperatorSpec asymptotic;
  /// Positive demands decay like e^{-weight |s|}; negative permits growth.
  double weight = 0.0;
  /// 2: both shifts d'_1, d'_2; 1: d'_2 identified with the other end's; 0: none.
  int shift_dims = 0;
  /// The shift cutoff beta ramps from 0 to 1 over |s| in [cutoff, cutoff + 1].
  double cutoff = 6.0;

  /// w'(s) on this end: weight at the positive end, -weight at the negative end.
  double weight_rate() const { return sign == EndSign::positive ? weight : -weight; }
};

struct Truncation {
  double s_max = 12.0;
  double neck = 6.0;  // N'
};

struct Grid {
  int s_nodes = 96;
  int t_nodes = 32;
  bool operator==(const Grid&) const = default;
};

/// Node of the piecewise quintic-smoothstep coefficient profile s -> S(s, .).
struct CoefficientKnot {
  double s = 0.0;
  LoopCoefficient coeff;
};

/// Node of the weight-rate profile s -> w'(s).
struct RateKnot {
  double s = 0.0;
  double rate = 0.0;
};

struct CRProblem {
  DomainKind domain_kind = DomainKind::cylinder;
  Fiber fiber = Fiber::complex_line;
  int dim = 2;
  std::vector<EndSpec> ends;  // cylinder: {negative, positive}; plane: {positive}
  Truncation truncation;
  Grid grid;
  std::vector<CoefficientKnot> coeff_knots;
  std::vector<RateKnot> weight_knots;
  /// Exponential convergence rate of B to its end limits.
  double decay_rate = 1.0;

  double s_lo() const { return domain_kind == DomainKind::plane ? 0.0 : -truncation.s_max; }
  double s_hi() const { return truncation.s_max; }

  LoopCoefficient coefficient_at(double s) const;
  double weight_rate_at(double s) const;
  /// w(s) with w(0) = 0.
  double weight_potential_at(double s) const;

  const EndSpec& end(EndSign sign) const;
  bool has_end(EndSign sign) const;
  int augmentation_dims() const;
  double max_abs_weight() const;

  /// Structural checks; spectral (Fredholm) checks run at assembly time.
  void validate() const;
};

double smoothstep(double x);
double smoothstep_derivative(double x);

/// Complex-line d/ds + i d/dt over R x S^1; weights are signed.
CRProblem build_trivial_cylinder(double weight_minus, double weight_plus, int shifts_minus = 0,
                                 int shifts_plus = 0, Truncation truncation = {}, Grid grid = {});

/// d/ds + J0 d/dt + B(s,t) with B(s,.) running S_- -> waypoints -> S_+ by
/// quintic smoothstep over [-N', N'] (waypoints evenly spaced).
CRProblem build_contact_fiber_cylinder(const LoopOperatorSpec& minus, const LoopOperatorSpec& plus,
                                       const std::vector<LoopOperatorSpec>& waypoints = {},
                                       Truncation truncation = {}, Grid grid = {},
                                       double weight_minus = 0.0, double weight_plus = 0.0);

/// Complex-line problem on [0, S] x S^1 capped by the disk at s = 0.
CRProblem build_plane(double weight, int shift_dims = 0, Truncation truncation = {},
                      Grid grid = {});

/// Same operator with every weight negated (the dual weight configuration).
CRProblem with_negated_weights(const CRProblem& p);
CRProblem with_grid(const CRProblem& p, Grid grid);
CRProblem with_s_max(const CRProblem& p, double s_max);

struct DiscreteGrid {
  int s_nodes = 0;
  int t_nodes = 0;
  double s_lo = 0.0;
  double s_hi = 0.0;
  double spacing = 0.0;
  int block = 0;  // unknowns per s-node

  double node(int j) const { return s_lo + j * spacing; }
};

struct DiscreteOperator {
  Eigen::SparseMatrix<double> matrix;
  DiscreteGrid grid;
  bool weight_conjugated = false;
  int augmentation_cols = 0;
  int residual_rows = 0;
  int boundary_rows_lo = 0;
  int boundary_rows_hi = 0;

  Eigen::Index rows() const { return matrix.rows(); }
  Eigen::Index cols() const { return matrix.cols(); }
  int field_cols() const { return grid.s_nodes * grid.block; }
  std::string grid_tag() const;
  void write_matrix_market(std::ostream& os) const;
};

DiscreteOperator assemble(const CRProblem& problem);
DiscreteOperator assemble(const CRProblem& problem, const Grid& grid);

}  // namespace crlab
