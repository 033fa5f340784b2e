#include "crlab/loop_ops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace crlab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Eigen::MatrixXd evaluate_series(const TrigSeries& s, double t) {
  Eigen::MatrixXd out = s.c0;
  for (std::size_t k = 0; k < s.cos_terms.size(); ++k) {
    out += s.cos_terms[k] * std::cos(kTwoPi * static_cast<double>(k + 1) * t);
  }
  for (std::size_t k = 0; k < s.sin_terms.size(); ++k) {
    out += s.sin_terms[k] * std::sin(kTwoPi * static_cast<double>(k + 1) * t);
  }
  return out;
}

TrigSeries combine(const TrigSeries& a, double wa, const TrigSeries& b, double wb) {
  TrigSeries out;
  out.c0 = wa * a.c0 + wb * b.c0;
  auto merge = [&](const std::vector<Eigen::MatrixXd>& x, const std::vector<Eigen::MatrixXd>& y) {
    std::vector<Eigen::MatrixXd> r;
    const std::size_t n = std::max(x.size(), y.size());
    for (std::size_t k = 0; k < n; ++k) {
      Eigen::MatrixXd term = Eigen::MatrixXd::Zero(a.c0.rows(), a.c0.cols());
      if (k < x.size()) term += wa * x[k];
      if (k < y.size()) term += wb * y[k];
      r.push_back(std::move(term));
    }
    return r;
  };
  out.cos_terms = merge(a.cos_terms, b.cos_terms);
  out.sin_terms = merge(a.sin_terms, b.sin_terms);
  return out;
}

// phi_0 = 1, phi_{2k-1} = sqrt2 cos(2 pi k t), phi_{2k} = sqrt2 sin(2 pi k t).
Eigen::VectorXd fourier_basis_values(int max_mode, double t) {
  Eigen::VectorXd v(2 * max_mode + 1);
  v(0) = 1.0;
  for (int k = 1; k <= max_mode; ++k) {
    v(2 * k - 1) = std::numbers::sqrt2 * std::cos(kTwoPi * k * t);
    v(2 * k) = std::numbers::sqrt2 * std::sin(kTwoPi * k * t);
  }
  return v;
}

Eigen::MatrixXd j0(int dim) {
  const int n = dim / 2;
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(dim, dim);
  j.topRightCorner(n, n) = -Eigen::MatrixXd::Identity(n, n);
  j.bottomLeftCorner(n, n) = Eigen::MatrixXd::Identity(n, n);
  return j;
}

Eigen::MatrixXd finite_difference_operator(const LoopOperatorSpec& spec, int res) {
  const int dim = spec.dim;
  const int n = dim / 2;
  const double h = 1.0 / res;
  const int size = dim * res;
  // Node j carries x_j (n values) followed by y_{j+1/2} (n values).
  auto xi = [&](int j, int c) { return ((j % res + res) % res) * dim + c; };
  auto yi = [&](int j, int c) { return ((j % res + res) % res) * dim + n + c; };
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(size, size);
  for (int j = 0; j < res; ++j) {
    const Eigen::MatrixXd sx = spec.coeff(j * h);
    const Eigen::MatrixXd sy = spec.coeff((j + 0.5) * h);
    for (int c = 0; c < n; ++c) {
      // row x_j: -(y_{j+1/2} - y_{j-1/2}) / h
      m(xi(j, c), yi(j, c)) += -1.0 / h;
      m(xi(j, c), yi(j - 1, c)) += 1.0 / h;
      // row y_{j+1/2}: (x_{j+1} - x_j) / h
      m(yi(j, c), xi(j + 1, c)) += 1.0 / h;
      m(yi(j, c), xi(j, c)) += -1.0 / h;
    }
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        m(xi(j, a), xi(j, b)) += sx(a, b);
        m(yi(j, a), yi(j, b)) += sy(n + a, n + b);
        m(xi(j, a), yi(j, b)) += 0.5 * sx(a, n + b);
        m(xi(j, a), yi(j - 1, b)) += 0.5 * sx(a, n + b);
        m(yi(j, a), xi(j, b)) += 0.5 * sy(n + a, b);
        m(yi(j, a), xi(j + 1, b)) += 0.5 * sy(n + a, b);
      }
    }
  }
  return 0.5 * (m + m.transpose());
}

std::vector<SpectralValue> cluster(std::vector<double> values, double band) {
  std::sort(values.begin(), values.end());
  std::vector<SpectralValue> out;
  for (double v : values) {
    const double tol = 1e-8 * (1.0 + std::abs(v));
    if (!out.empty() && std::abs(v - out.back().value) <= tol) {
      auto& last = out.back();
      last.value = (last.value * last.multiplicity + v) / (last.multiplicity + 1);
      ++last.multiplicity;
    } else {
      out.push_back({v, 1, true});
    }
  }
  for (auto& e : out) e.reliable = std::abs(e.value) <= band;
  return out;
}

Eigen::VectorXd sorted_eigenvalues(const LoopOperatorSpec& spec, int res) {
  const auto op = assemble_loop_operator(spec, res);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(op.matrix, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::numerical, "eigensolver failed on loop operator of size " +
                                          std::to_string(op.matrix.rows()));
  }
  return es.eigenvalues();
}

int count_negative(const Eigen::VectorXd& ev) {
  return static_cast<int>((ev.array() < 0.0).count());
}

}  // namespace

// ---------------------------------------------------------------------------
// LoopCoefficient

LoopCoefficient LoopCoefficient::constant(const Eigen::MatrixXd& s) {
  TrigSeries series;
  series.c0 = s;
  return trig(std::move(series));
}

LoopCoefficient LoopCoefficient::scalar(int dim, double a) {
  return constant(a * Eigen::MatrixXd::Identity(dim, dim));
}

LoopCoefficient LoopCoefficient::trig(TrigSeries series) {
  if (series.c0.rows() != series.c0.cols() || series.c0.rows() == 0) {
    throw Error(ErrorCode::coefficient_validation, "coefficient must be a non-empty square matrix");
  }
  for (const auto* terms : {&series.cos_terms, &series.sin_terms}) {
    for (const auto& m : *terms) {
      if (m.rows() != series.c0.rows() || m.cols() != series.c0.cols()) {
        throw Error(ErrorCode::coefficient_validation, "harmonic has mismatched shape");
      }
    }
  }
  LoopCoefficient c;
  c.dim_ = static_cast<int>(series.c0.rows());
  c.series_ = std::move(series);
  return c;
}

LoopCoefficient LoopCoefficient::from_samples(const std::vector<Eigen::MatrixXd>& samples) {
  const int q = static_cast<int>(samples.size());
  if (q == 0) throw Error(ErrorCode::coefficient_validation, "no samples");
  TrigSeries s;
  const auto rows = samples[0].rows();
  s.c0 = Eigen::MatrixXd::Zero(rows, samples[0].cols());
  for (const auto& m : samples) s.c0 += m / q;
  const int kmax = (q - 1) / 2;
  for (int k = 1; k <= kmax; ++k) {
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(rows, rows);
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(rows, rows);
    for (int j = 0; j < q; ++j) {
      const double t = static_cast<double>(j) / q;
      c += samples[j] * (2.0 / q) * std::cos(kTwoPi * k * t);
      d += samples[j] * (2.0 / q) * std::sin(kTwoPi * k * t);
    }
    s.cos_terms.push_back(c);
    s.sin_terms.push_back(d);
  }
  if (q % 2 == 0) {
    Eigen::MatrixXd nyq = Eigen::MatrixXd::Zero(rows, rows);
    for (int j = 0; j < q; ++j) nyq += samples[j] * ((j % 2 == 0) ? 1.0 : -1.0) / q;
    s.cos_terms.push_back(nyq);
    s.sin_terms.push_back(Eigen::MatrixXd::Zero(rows, rows));
  }
  return trig(std::move(s));
}

LoopCoefficient LoopCoefficient::callable(int dim, Callable fn) {
  if (!fn) throw Error(ErrorCode::coefficient_validation, "empty coefficient callable");
  LoopCoefficient c;
  c.dim_ = dim;
  c.fn_ = std::move(fn);
  return c;
}

Eigen::MatrixXd LoopCoefficient::operator()(double t) const {
  if (series_) return evaluate_series(*series_, t);
  if (fn_) return fn_(t);
  throw Error(ErrorCode::coefficient_validation, "coefficient is empty");
}

bool LoopCoefficient::is_constant() const {
  if (!series_) return false;
  auto zero = [](const std::vector<Eigen::MatrixXd>& v) {
    return std::all_of(v.begin(), v.end(), [](const Eigen::MatrixXd& m) { return m.isZero(0.0); });
  };
  return zero(series_->cos_terms) && zero(series_->sin_terms);
}

double LoopCoefficient::sup_norm() const {
  if (is_constant()) return series_->c0.cwiseAbs().maxCoeff();
  double best = 0.0;
  for (int j = 0; j < 64; ++j) best = std::max(best, (*this)(j / 64.0).cwiseAbs().maxCoeff());
  return best;
}

LoopCoefficient LoopCoefficient::shifted(double shift) const {
  if (shift == 0.0) return *this;
  if (series_) {
    TrigSeries s = *series_;
    s.c0 += shift * Eigen::MatrixXd::Identity(dim_, dim_);
    return trig(std::move(s));
  }
  auto fn = fn_;
  const int d = dim_;
  return callable(d, [fn, shift, d](double t) {
    return Eigen::MatrixXd(fn(t) + shift * Eigen::MatrixXd::Identity(d, d));
  });
}

LoopCoefficient LoopCoefficient::scaled(double factor) const {
  if (series_) return trig(combine(*series_, factor, *series_, 0.0));
  auto fn = fn_;
  return callable(dim_, [fn, factor](double t) { return Eigen::MatrixXd(factor * fn(t)); });
}

LoopCoefficient LoopCoefficient::blend(const LoopCoefficient& a, const LoopCoefficient& b,
                                       double phi) {
  if (a.dim_ != b.dim_) throw Error(ErrorCode::coefficient_validation, "blend of mismatched dims");
  if (phi == 0.0) return a;
  if (phi == 1.0) return b;
  if (a.series_ && b.series_) return trig(combine(*a.series_, 1.0 - phi, *b.series_, phi));
  return callable(a.dim_, [a, b, phi](double t) {
    return Eigen::MatrixXd((1.0 - phi) * a(t) + phi * b(t));
  });
}

bool LoopCoefficient::same_as(const LoopCoefficient& other, double tol) const {
  if (dim_ != other.dim_) return false;
  for (int j = 0; j < 37; ++j) {
    const double t = j / 37.0;
    if (((*this)(t) - other(t)).cwiseAbs().maxCoeff() > tol) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// LoopOperatorSpec

LoopOperatorSpec LoopOperatorSpec::zero(int dim) { return scalar(dim, 0.0); }

LoopOperatorSpec LoopOperatorSpec::scalar(int dim, double a) {
  LoopOperatorSpec s;
  s.dim = dim;
  s.coeff = LoopCoefficient::scalar(dim, a);
  return s;
}

LoopOperatorSpec LoopOperatorSpec::constant(const Eigen::MatrixXd& m) {
  LoopOperatorSpec s;
  s.dim = static_cast<int>(m.rows());
  s.coeff = LoopCoefficient::constant(m);
  return s;
}

void LoopOperatorSpec::validate() const {
  if (dim <= 0 || dim % 2 != 0) {
    throw Error(ErrorCode::coefficient_validation, "dim must be a positive even integer, got " +
                                                       std::to_string(dim));
  }
  if (!(period > 0.0)) throw Error(ErrorCode::coefficient_validation, "period must be positive");
  if (coeff.dim() != dim) {
    throw Error(ErrorCode::coefficient_validation, "coefficient dimension does not match dim");
  }
  for (int j = 0; j <= 16; ++j) {
    const Eigen::MatrixXd s = coeff(j / 16.0);
    if (!s.allFinite()) throw Error(ErrorCode::coefficient_validation, "non-finite coefficient");
    const double asym = (s - s.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * (1.0 + s.cwiseAbs().maxCoeff())) {
      std::ostringstream msg;
      msg << "S(t) not symmetric at t=" << j / 16.0 << " (asymmetry " << asym << ")";
      throw Error(ErrorCode::coefficient_validation, msg.str());
    }
  }
  const double gap = (coeff(0.0) - coeff(1.0 - 1e-9)).cwiseAbs().maxCoeff();
  if (gap > 1e-6 * (1.0 + coeff.sup_norm())) {
    throw Error(ErrorCode::coefficient_validation, "S(t) is not 1-periodic");
  }
}

LoopOperatorSpec LoopOperatorSpec::shifted(double shift) const {
  LoopOperatorSpec s = *this;
  s.coeff = coeff.shifted(shift);
  return s;
}

const char* to_string(LoopMethod m) {
  return m == LoopMethod::fourier ? "fourier" : "finite_difference";
}

LoopMethod loop_method_from_string(const std::string& s) {
  if (s == "fourier") return LoopMethod::fourier;
  if (s == "finite_difference") return LoopMethod::finite_difference;
  throw Error(ErrorCode::input, "unknown loop method '" + s + "'");
}

// ---------------------------------------------------------------------------
// Fourier building blocks

int fourier_max_mode(int t_resolution) { return (t_resolution - 1) / 2; }

int fourier_space_dim(int dim, int t_resolution) {
  return dim * (2 * fourier_max_mode(t_resolution) + 1);
}

Eigen::MatrixXd fourier_cr_operator(int dim, int t_resolution) {
  const int k_max = fourier_max_mode(t_resolution);
  const int modes = 2 * k_max + 1;
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(modes, modes);
  for (int k = 1; k <= k_max; ++k) {
    d(2 * k, 2 * k - 1) = -kTwoPi * k;  // (cos)' = -2 pi k sin
    d(2 * k - 1, 2 * k) = kTwoPi * k;   // (sin)' =  2 pi k cos
  }
  const Eigen::MatrixXd j = j0(dim);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(modes * dim, modes * dim);
  for (int a = 0; a < modes; ++a) {
    for (int b = 0; b < modes; ++b) {
      if (d(a, b) != 0.0) out.block(a * dim, b * dim, dim, dim) = d(a, b) * j;
    }
  }
  return out;
}

Eigen::MatrixXd fourier_multiplication(const LoopCoefficient& coeff, int t_resolution) {
  const int dim = coeff.dim();
  const int k_max = fourier_max_mode(t_resolution);
  const int modes = 2 * k_max + 1;
  const int size = modes * dim;
  if (coeff.is_constant()) {
    const Eigen::MatrixXd s = coeff(0.0);
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(size, size);
    for (int a = 0; a < modes; ++a) out.block(a * dim, a * dim, dim, dim) = s;
    return out;
  }
  // Trapezoid rule is exact for trig polynomials of degree < q.
  int q = 0;
  if (coeff.series()) {
    q = 2 * k_max + coeff.series()->harmonics() + 1;
  } else {
    q = std::max(8 * modes, 256);
  }
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(size, size);
  for (int j = 0; j < q; ++j) {
    const double t = static_cast<double>(j) / q;
    const Eigen::VectorXd phi = fourier_basis_values(k_max, t);
    const Eigen::MatrixXd s = coeff(t) / q;
    for (int a = 0; a < modes; ++a) {
      for (int b = 0; b < modes; ++b) {
        out.block(a * dim, b * dim, dim, dim) += (phi(a) * phi(b)) * s;
      }
    }
  }
  return 0.5 * (out + out.transpose());
}

Eigen::VectorXd fourier_constant_section(const Eigen::VectorXd& direction, int t_resolution) {
  const int dim = static_cast<int>(direction.size());
  Eigen::VectorXd v = Eigen::VectorXd::Zero(fourier_space_dim(dim, t_resolution));
  v.head(dim) = direction;
  return v;
}

LoopOperator assemble_loop_operator(const LoopOperatorSpec& spec, int t_resolution,
                                    LoopMethod method) {
  if (t_resolution < 8) {
    throw Error(ErrorCode::resolution,
                "t_resolution must be >= 8, got " + std::to_string(t_resolution));
  }
  spec.validate();
  LoopOperator op;
  op.method = method;
  op.t_resolution = t_resolution;
  op.dim = spec.dim;
  op.period = spec.period;
  op.coeff_norm = spec.coeff.sup_norm();
  if (method == LoopMethod::fourier) {
    op.matrix = fourier_cr_operator(spec.dim, t_resolution) +
                fourier_multiplication(spec.coeff, t_resolution);
  } else {
    op.matrix = finite_difference_operator(spec, t_resolution);
  }
  op.matrix = 0.5 * (op.matrix + op.matrix.transpose()).eval();
  return op;
}

// ---------------------------------------------------------------------------
// Spectra

int SpectrumReport::total_multiplicity() const {
  int n = 0;
  for (const auto& e : eigenvalues) n += e.multiplicity;
  return n;
}

std::vector<double> SpectrumReport::flat() const {
  std::vector<double> out;
  for (const auto& e : eigenvalues) out.insert(out.end(), e.multiplicity, e.value);
  return out;
}

double SpectrumReport::min_abs() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& e : eigenvalues) m = std::min(m, std::abs(e.value));
  return m;
}

double degeneracy_tolerance(double coeff_norm) { return 1e-8 * (1.0 + coeff_norm); }

SpectrumReport spectrum(const LoopOperator& op) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(op.matrix, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::numerical, "eigensolver failed (size " +
                                          std::to_string(op.matrix.rows()) + ", method " +
                                          to_string(op.method) + ")");
  }
  SpectrumReport r;
  r.dim = op.dim;
  r.period = op.period;
  r.t_resolution = op.t_resolution;
  r.method = op.method;
  r.zero_tolerance = degeneracy_tolerance(op.coeff_norm);
  const auto& ev = es.eigenvalues();
  const double band = 0.5 * std::numbers::pi * op.t_resolution;
  r.eigenvalues = cluster(std::vector<double>(ev.data(), ev.data() + ev.size()), band);
  return r;
}

int count_window(const SpectrumReport& report, double lo, double hi) {
  if (!(lo < hi)) throw Error(ErrorCode::precondition, "count_window needs lo < hi");
  int count = 0;
  for (const auto& e : report.eigenvalues) {
    const double tol = std::max(report.zero_tolerance, 1e-8 * (1.0 + std::abs(e.value)));
    if (std::abs(e.value - lo) <= tol || std::abs(e.value - hi) <= tol) {
      std::ostringstream msg;
      msg << "window endpoint within " << tol << " of eigenvalue " << e.value;
      throw Error(ErrorCode::ambiguous_window, msg.str());
    }
    if (e.value > lo && e.value < hi) count += e.multiplicity;
  }
  return count;
}

Nondegeneracy is_nondegenerate(const LoopOperatorSpec& spec, int t_resolution, double tol) {
  const auto report = spectrum(assemble_loop_operator(spec, t_resolution));
  if (tol < 0.0) tol = report.zero_tolerance;
  const double margin = report.min_abs();
  return {margin > tol, margin};
}

// ---------------------------------------------------------------------------
// Spectral flow

namespace {

struct Sample {
  double s;
  Eigen::VectorXd ev;
};

// Sorted-order eigenvalue motion near zero must stay below half the smallest
// cluster gap there, otherwise crossings cannot be attributed to the step.
bool step_is_tracked(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double move_all = (b - a).cwiseAbs().maxCoeff();
  const double window = 4.0 * move_all + 1e-9;
  std::vector<double> near;
  double move = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (std::min(std::abs(a(i)), std::abs(b(i))) <= window) {
      near.push_back(a(i));
      move = std::max(move, std::abs(b(i) - a(i)));
    }
  }
  std::sort(near.begin(), near.end());
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < near.size(); ++i) {
    const double d = near[i] - near[i - 1];
    if (d > 1e-8 * (1.0 + std::abs(near[i]))) gap = std::min(gap, d);
  }
  return move <= 0.5 * gap;
}

}  // namespace

SpectralFlowResult spectral_flow_detailed(const LoopPath& path, int steps, int t_resolution,
                                          int max_evaluations) {
  if (steps < 1) throw Error(ErrorCode::precondition, "steps must be >= 1");
  if (max_evaluations <= 0) max_evaluations = 64 * steps + 2048;

  SpectralFlowResult result;
  auto eval = [&](double s) {
    ++result.evaluations;
    if (result.evaluations > max_evaluations) {
      throw Error(ErrorCode::tracking, "adaptive refinement exceeded " +
                                           std::to_string(max_evaluations) + " evaluations");
    }
    return Sample{s, sorted_eigenvalues(path(s), t_resolution)};
  };

  for (double s : {0.0, 1.0}) {
    const auto spec = path(s);
    const auto nd = is_nondegenerate(spec, t_resolution);
    if (!nd.nondegenerate) {
      std::ostringstream msg;
      msg << "path endpoint s=" << s << " is degenerate (margin " << nd.margin << ")";
      throw Error(ErrorCode::precondition, msg.str());
    }
  }

  const Sample first = eval(0.0);
  std::vector<Sample> stack;
  // Process intervals left to right; refine by bisection until tracked.
  for (int i = steps; i >= 1; --i) stack.push_back(eval(static_cast<double>(i) / steps));
  Sample left = first;
  while (!stack.empty()) {
    Sample right = stack.back();
    const double width = right.s - left.s;
    if (!step_is_tracked(left.ev, right.ev) && width > 1e-9) {
      stack.push_back(eval(left.s + 0.5 * width));
      continue;
    }
    stack.pop_back();
    const int net = count_negative(right.ev) - count_negative(left.ev);
    if (net != 0) result.crossings.push_back({left.s, right.s, net});
    result.flow += net;
    left = std::move(right);
  }
  return result;
}

int spectral_flow(const LoopPath& path, int steps, int t_resolution) {
  return spectral_flow_detailed(path, steps, t_resolution).flow;
}

LoopPath linear_path(const LoopOperatorSpec& a, const LoopOperatorSpec& b) {
  return [a, b](double s) {
    LoopOperatorSpec out = a;
    out.coeff = LoopCoefficient::blend(a.coeff, b.coeff, s);
    return out;
  };
}

LoopPath concatenate(LoopPath first, LoopPath second) {
  return [first, second](double s) { return s <= 0.5 ? first(2.0 * s) : second(2.0 * s - 1.0); };
}

LoopPath reverse(LoopPath path) {
  return [path](double s) { return path(1.0 - s); };
}

}  // namespace crlab
