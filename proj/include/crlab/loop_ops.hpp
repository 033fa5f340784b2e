#pragma once

// Asymptotic loop operators A = J0 d/dt + S(t) on L^2(S^1, R^{2n}).
//
// Two discretizations are provided.  The default is a Galerkin projection onto
// the orthonormal real Fourier basis {1, sqrt2 cos 2pi k t, sqrt2 sin 2pi k t},
// |k| <= K with K = (t_resolution - 1) / 2; it is exact for constant S.  The
// second is a staggered second-order finite-difference scheme (x-components on
// integer nodes, y-components on half nodes) whose only use is cross-checking.

#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "crlab/errors.hpp"

namespace crlab {

/// S(t) = c0 + sum_k cos_k cos(2 pi k t) + sin_k sin(2 pi k t); cos_terms[k-1] is harmonic k.
struct TrigSeries {
  Eigen::MatrixXd c0;
  std::vector<Eigen::MatrixXd> cos_terms;
  std::vector<Eigen::MatrixXd> sin_terms;

  int harmonics() const { return static_cast<int>(std::max(cos_terms.size(), sin_terms.size())); }
};

/// The symmetric coefficient loop t -> S(t), 1-periodic.
class LoopCoefficient {
 public:
  using Callable = std::function<Eigen::MatrixXd(double)>;

  LoopCoefficient() = default;

  static LoopCoefficient constant(const Eigen::MatrixXd& s);
  static LoopCoefficient scalar(int dim, double a);
  static LoopCoefficient trig(TrigSeries series);
  /// Samples at t_j = j/Q, j = 0..Q-1; stored as the interpolating trig series.
  static LoopCoefficient from_samples(const std::vector<Eigen::MatrixXd>& samples);
  static LoopCoefficient callable(int dim, Callable fn);

  Eigen::MatrixXd operator()(double t) const;

  int dim() const { return dim_; }
  bool is_constant() const;
  /// Declarative form, absent for callables.
  const std::optional<TrigSeries>& series() const { return series_; }
  /// max over a sample grid of the entrywise sup norm.
  double sup_norm() const;

  LoopCoefficient shifted(double shift) const;
  LoopCoefficient scaled(double factor) const;
  /// (1 - phi) a + phi b
  static LoopCoefficient blend(const LoopCoefficient& a, const LoopCoefficient& b, double phi);

  bool same_as(const LoopCoefficient& other, double tol = 0.0) const;

 private:
  int dim_ = 0;
  std::optional<TrigSeries> series_;
  Callable fn_;
};

/// The asymptotic operator at one end.  `period` is the orbit action c; the
/// coefficient S already carries the c factor, so period is descriptive only.
struct LoopOperatorSpec {
  int dim = 2;
  double period = 1.0;
  LoopCoefficient coeff;

  static LoopOperatorSpec zero(int dim = 2);
  static LoopOperatorSpec scalar(int dim, double a);
  static LoopOperatorSpec constant(const Eigen::MatrixXd& s);

  /// Throws coefficient_validation on odd/zero dim, non-symmetric or non-periodic S.
  void validate() const;
  LoopOperatorSpec shifted(double shift) const;
};

enum class LoopMethod { fourier, finite_difference };

const char* to_string(LoopMethod m);
LoopMethod loop_method_from_string(const std::string& s);

struct LoopOperator {
  Eigen::MatrixXd matrix;  // symmetric
  LoopMethod method = LoopMethod::fourier;
  int t_resolution = 0;
  int dim = 0;
  double period = 1.0;
  double coeff_norm = 0.0;
};

// Fourier-basis building blocks, shared with the cylinder assembly.
int fourier_max_mode(int t_resolution);
int fourier_space_dim(int dim, int t_resolution);
/// J0 d/dt in the real Fourier basis; layout index = mode * dim + component.
Eigen::MatrixXd fourier_cr_operator(int dim, int t_resolution);
/// Galerkin matrix of multiplication by S(t).
Eigen::MatrixXd fourier_multiplication(const LoopCoefficient& coeff, int t_resolution);
/// Coefficient vector of the constant section t -> direction.
Eigen::VectorXd fourier_constant_section(const Eigen::VectorXd& direction, int t_resolution);

LoopOperator assemble_loop_operator(const LoopOperatorSpec& spec, int t_resolution,
                                    LoopMethod method = LoopMethod::fourier);

struct SpectralValue {
  double value = 0.0;
  int multiplicity = 1;
  bool reliable = true;
};

struct SpectrumReport {
  int dim = 0;
  double period = 1.0;
  int t_resolution = 0;
  LoopMethod method = LoopMethod::fourier;
  std::vector<SpectralValue> eigenvalues;  // ascending, clustered
  double zero_tolerance = 0.0;

  int total_multiplicity() const;
  std::vector<double> flat() const;  // with repetition
  double min_abs() const;
};

/// Scale-aware zero threshold 1e-8 * (1 + ||S||_inf).
double degeneracy_tolerance(double coeff_norm);

SpectrumReport spectrum(const LoopOperator& op);

/// Total multiplicity strictly inside (lo, hi).  Throws ambiguous_window when an
/// endpoint sits on an eigenvalue.
int count_window(const SpectrumReport& report, double lo, double hi);

struct Nondegeneracy {
  bool nondegenerate = false;
  double margin = 0.0;
};

/// tol < 0 selects degeneracy_tolerance(||S||).
Nondegeneracy is_nondegenerate(const LoopOperatorSpec& spec, int t_resolution, double tol = -1.0);

using LoopPath = std::function<LoopOperatorSpec(double)>;

/// Net crossings on [s_lo, s_hi] under the library convention.
struct Crossing {
  double s_lo = 0.0;
  double s_hi = 0.0;
  int net = 0;
};

struct SpectralFlowResult {
  int flow = 0;
  std::vector<Crossing> crossings;
  int evaluations = 0;
};

// Sign convention: flow = #(pos -> neg) - #(neg -> pos).  With it the index of
// d/ds + A(s) on the line equals minus the flow of s -> A(s).
SpectralFlowResult spectral_flow_detailed(const LoopPath& path, int steps, int t_resolution,
                                          int max_evaluations = 0);
int spectral_flow(const LoopPath& path, int steps, int t_resolution);

/// Straight-line path (1 - s) a + s b.
LoopPath linear_path(const LoopOperatorSpec& a, const LoopOperatorSpec& b);
/// Concatenation: first on [0, 1/2], second on [1/2, 1].
LoopPath concatenate(LoopPath first, LoopPath second);
LoopPath reverse(LoopPath path);

}  // namespace crlab
