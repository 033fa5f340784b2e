#include "crlab/cylinder_ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <sstream>

namespace crlab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Integral of smoothstep over [0, x].
double smoothstep_integral(double x) {
  x = std::clamp(x, 0.0, 1.0);
  return std::pow(x, 6) - 3.0 * std::pow(x, 5) + 2.5 * std::pow(x, 4);
}

template <typename Knot>
void check_sorted(const std::vector<Knot>& knots, const char* what) {
  if (knots.empty()) throw Error(ErrorCode::input, std::string(what) + " profile has no knots");
  for (std::size_t i = 1; i < knots.size(); ++i) {
    if (!(knots[i].s > knots[i - 1].s)) {
      throw Error(ErrorCode::input, std::string(what) + " knots must be strictly increasing in s");
    }
  }
}

// Locate s in a knot profile: returns (i, phi) meaning blend(knot i, knot i+1, phi).
template <typename Knot>
std::pair<std::size_t, double> locate(const std::vector<Knot>& knots, double s) {
  if (s <= knots.front().s || knots.size() == 1) return {0, 0.0};
  if (s >= knots.back().s) return {knots.size() - 1, 0.0};
  std::size_t i = 0;
  while (s > knots[i + 1].s) ++i;
  return {i, smoothstep((s - knots[i].s) / (knots[i + 1].s - knots[i].s))};
}

Eigen::MatrixXd symmetric_eigenvectors(const Eigen::MatrixXd& a, Eigen::VectorXd& values) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::numerical, "eigensolver failed on boundary operator");
  }
  values = es.eigenvalues();
  return es.eigenvectors();
}

struct AugmentationColumn {
  std::vector<std::pair<const EndSpec*, int>> parts;  // (end, direction component)
};

std::vector<AugmentationColumn> augmentation_layout(const CRProblem& p) {
  std::vector<AugmentationColumn> cols;
  const int theta = p.dim / 2;  // J0 e_1
  for (const auto& e : p.ends) {
    if (e.shift_dims >= 1) cols.push_back({{{&e, 0}}});
  }
  std::optional<std::size_t> partner;
  for (const auto& e : p.ends) {
    if (e.shift_dims == 2) {
      if (!partner) partner = cols.size();
      cols.push_back({{{&e, theta}}});
    }
  }
  for (const auto& e : p.ends) {
    if (e.shift_dims == 1 && partner) cols[*partner].parts.emplace_back(&e, theta);
  }
  return cols;
}

double cutoff_derivative(const EndSpec& e, double s) {
  if (e.sign == EndSign::positive) return smoothstep_derivative(s - e.cutoff);
  return -smoothstep_derivative(-s - e.cutoff);
}

}  // namespace

const char* to_string(EndSign s) { return s == EndSign::negative ? "negative" : "positive"; }
const char* to_string(DomainKind k) { return k == DomainKind::cylinder ? "cylinder" : "plane"; }
const char* to_string(Fiber f) {
  return f == Fiber::complex_line ? "complex_line" : "contact_fiber";
}

EndSign end_sign_from_string(const std::string& s) {
  if (s == "negative") return EndSign::negative;
  if (s == "positive") return EndSign::positive;
  throw Error(ErrorCode::input, "unknown end sign '" + s + "'");
}

DomainKind domain_kind_from_string(const std::string& s) {
  if (s == "cylinder") return DomainKind::cylinder;
  if (s == "plane") return DomainKind::plane;
  throw Error(ErrorCode::input, "unknown domain kind '" + s + "'");
}

Fiber fiber_from_string(const std::string& s) {
  if (s == "complex_line") return Fiber::complex_line;
  if (s == "contact_fiber") return Fiber::contact_fiber;
  throw Error(ErrorCode::input, "unknown fiber '" + s + "'");
}

double smoothstep(double x) {
  x = std::clamp(x, 0.0, 1.0);
  return x * x * x * (x * (6.0 * x - 15.0) + 10.0);
}

double smoothstep_derivative(double x) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  return 30.0 * x * x * (x - 1.0) * (x - 1.0);
}

// ---------------------------------------------------------------------------
// CRProblem

LoopCoefficient CRProblem::coefficient_at(double s) const {
  const auto [i, phi] = locate(coeff_knots, s);
  if (phi == 0.0) return coeff_knots[i].coeff;
  return LoopCoefficient::blend(coeff_knots[i].coeff, coeff_knots[i + 1].coeff, phi);
}

double CRProblem::weight_rate_at(double s) const {
  const auto [i, phi] = locate(weight_knots, s);
  if (phi == 0.0) return weight_knots[i].rate;
  return (1.0 - phi) * weight_knots[i].rate + phi * weight_knots[i + 1].rate;
}

double CRProblem::weight_potential_at(double s) const {
  // Antiderivative anchored at the first knot, then re-anchored at s = 0.
  auto antiderivative = [this](double x) {
    const auto& k = weight_knots;
    if (x <= k.front().s) return k.front().rate * (x - k.front().s);
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < k.size(); ++i) {
      const double width = k[i + 1].s - k[i].s;
      const double u = std::min(x, k[i + 1].s);
      const double frac = (u - k[i].s) / width;
      acc += k[i].rate * (u - k[i].s) +
             (k[i + 1].rate - k[i].rate) * width * smoothstep_integral(frac);
      if (x <= k[i + 1].s) return acc;
    }
    return acc + k.back().rate * (x - k.back().s);
  };
  return antiderivative(s) - antiderivative(0.0);
}

const EndSpec& CRProblem::end(EndSign sign) const {
  for (const auto& e : ends) {
    if (e.sign == sign) return e;
  }
  throw Error(ErrorCode::input, std::string("problem has no ") + to_string(sign) + " end");
}

bool CRProblem::has_end(EndSign sign) const {
  return std::any_of(ends.begin(), ends.end(), [sign](const EndSpec& e) { return e.sign == sign; });
}

int CRProblem::augmentation_dims() const {
  int n = 0;
  for (const auto& e : ends) n += e.shift_dims;
  return n;
}

double CRProblem::max_abs_weight() const {
  double m = 0.0;
  for (const auto& k : weight_knots) m = std::max(m, std::abs(k.rate));
  return m;
}

void CRProblem::validate() const {
  if (dim <= 0 || dim % 2 != 0) throw Error(ErrorCode::input, "fiber dim must be even");
  if (fiber == Fiber::complex_line && dim != 2) {
    throw Error(ErrorCode::input, "complex_line fiber has dim 2");
  }
  if (!(truncation.s_max > 0.0) || !(truncation.neck >= 0.0) ||
      !(truncation.neck < truncation.s_max)) {
    throw Error(ErrorCode::input, "truncation needs 0 <= N' < S_max");
  }
  if (domain_kind == DomainKind::cylinder) {
    if (ends.size() != 2 || ends[0].sign != EndSign::negative ||
        ends[1].sign != EndSign::positive) {
      throw Error(ErrorCode::input, "cylinder needs ends {negative, positive}");
    }
  } else {
    if (ends.size() != 1 || ends[0].sign != EndSign::positive) {
      throw Error(ErrorCode::input, "plane needs a single positive end");
    }
  }
  for (const auto& e : ends) {
    if (e.shift_dims < 0 || e.shift_dims > 2) {
      throw Error(ErrorCode::input, "shift_dims must be 0, 1 or 2");
    }
    if (e.asymptotic.dim != dim) throw Error(ErrorCode::input, "end dim mismatch");
    e.asymptotic.validate();
  }
  check_sorted(coeff_knots, "coefficient");
  check_sorted(weight_knots, "weight");
  for (const auto& k : coeff_knots) {
    if (k.coeff.dim() != dim) throw Error(ErrorCode::input, "coefficient knot dim mismatch");
  }
  if (grid.s_nodes < 4 || grid.t_nodes < 8) {
    throw Error(ErrorCode::resolution, "grid needs s_nodes >= 4 and t_nodes >= 8");
  }
}

// ---------------------------------------------------------------------------
// Builders

CRProblem build_trivial_cylinder(double weight_minus, double weight_plus, int shifts_minus,
                                 int shifts_plus, Truncation truncation, Grid grid) {
  for (double w : {weight_minus, weight_plus}) {
    if (!(std::abs(w) > 0.0 && std::abs(w) < kTwoPi)) {
      std::ostringstream msg;
      msg << "weight magnitude " << std::abs(w)
          << " must lie in (0, 2 pi), the first nonzero eigenvalue of i d/dt";
      throw Error(ErrorCode::fredholm, msg.str());
    }
  }
  CRProblem p;
  p.domain_kind = DomainKind::cylinder;
  p.fiber = Fiber::complex_line;
  p.dim = 2;
  p.truncation = truncation;
  p.grid = grid;
  const auto zero = LoopOperatorSpec::zero(2);
  p.ends = {EndSpec{EndSign::negative, zero, weight_minus, shifts_minus, truncation.neck},
            EndSpec{EndSign::positive, zero, weight_plus, shifts_plus, truncation.neck}};
  p.coeff_knots = {{0.0, zero.coeff}};
  p.weight_knots = {{-truncation.neck, -weight_minus}, {truncation.neck, weight_plus}};
  p.validate();
  return p;
}

CRProblem build_contact_fiber_cylinder(const LoopOperatorSpec& minus, const LoopOperatorSpec& plus,
                                       const std::vector<LoopOperatorSpec>& waypoints,
                                       Truncation truncation, Grid grid, double weight_minus,
                                       double weight_plus) {
  if (minus.dim != plus.dim) throw Error(ErrorCode::input, "end specs differ in dim");
  for (const auto* spec : {&minus, &plus}) {
    const auto nd = is_nondegenerate(*spec, grid.t_nodes);
    if (!nd.nondegenerate) {
      std::ostringstream msg;
      msg << "asymptotic operator is degenerate (margin " << nd.margin << ")";
      throw Error(ErrorCode::precondition, msg.str());
    }
  }
  CRProblem p;
  p.domain_kind = DomainKind::cylinder;
  p.fiber = Fiber::contact_fiber;
  p.dim = minus.dim;
  p.truncation = truncation;
  p.grid = grid;
  p.ends = {EndSpec{EndSign::negative, minus, weight_minus, 0, truncation.neck},
            EndSpec{EndSign::positive, plus, weight_plus, 0, truncation.neck}};
  const double n = truncation.neck;
  const auto count = static_cast<double>(waypoints.size() + 1);
  p.coeff_knots.push_back({-n, minus.coeff});
  for (std::size_t i = 0; i < waypoints.size(); ++i) {
    p.coeff_knots.push_back({-n + 2.0 * n * static_cast<double>(i + 1) / count,
                             waypoints[i].coeff});
  }
  p.coeff_knots.push_back({n, plus.coeff});
  if (n == 0.0) p.coeff_knots = {{0.0, minus.coeff}};
  p.weight_knots = {{-n - 1.0, -weight_minus}, {n + 1.0, weight_plus}};
  p.validate();
  return p;
}

CRProblem build_plane(double weight, int shift_dims, Truncation truncation, Grid grid) {
  if (!(std::abs(weight) > 0.0 && std::abs(weight) < kTwoPi)) {
    throw Error(ErrorCode::fredholm, "plane weight magnitude must lie in (0, 2 pi)");
  }
  CRProblem p;
  p.domain_kind = DomainKind::plane;
  p.fiber = Fiber::complex_line;
  p.dim = 2;
  p.truncation = truncation;
  p.grid = grid;
  const auto zero = LoopOperatorSpec::zero(2);
  p.ends = {EndSpec{EndSign::positive, zero, weight, shift_dims, truncation.neck}};
  p.coeff_knots = {{0.0, zero.coeff}};
  p.weight_knots = {{0.0, weight}};
  p.validate();
  return p;
}

CRProblem with_negated_weights(const CRProblem& p) {
  CRProblem q = p;
  for (auto& e : q.ends) e.weight = -e.weight;
  for (auto& k : q.weight_knots) k.rate = -k.rate;
  return q;
}

CRProblem with_grid(const CRProblem& p, Grid grid) {
  CRProblem q = p;
  q.grid = grid;
  return q;
}

CRProblem with_s_max(const CRProblem& p, double s_max) {
  CRProblem q = p;
  q.truncation.s_max = s_max;
  q.validate();
  return q;
}

// ---------------------------------------------------------------------------
// Assembly

std::string DiscreteOperator::grid_tag() const {
  std::ostringstream os;
  os << grid.s_nodes << "x" << grid.t_nodes << "/S" << grid.s_hi;
  return os.str();
}

void DiscreteOperator::write_matrix_market(std::ostream& os) const {
  os << "%%MatrixMarket matrix coordinate real general\n";
  os << "% grid " << grid_tag() << ", augmentation columns " << augmentation_cols << "\n";
  os << matrix.rows() << " " << matrix.cols() << " " << matrix.nonZeros() << "\n";
  char buf[64];
  for (int k = 0; k < matrix.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(matrix, k); it; ++it) {
      std::snprintf(buf, sizeof buf, "%.17g", it.value());
      os << it.row() + 1 << " " << it.col() + 1 << " " << buf << "\n";
    }
  }
}

DiscreteOperator assemble(const CRProblem& problem) { return assemble(problem, problem.grid); }

DiscreteOperator assemble(const CRProblem& problem, const Grid& grid) {
  CRProblem p = problem;
  p.grid = grid;
  p.validate();

  const int t_nodes = grid.t_nodes;
  const int m = fourier_space_dim(p.dim, t_nodes);
  DiscreteGrid g;
  g.s_nodes = grid.s_nodes;
  g.t_nodes = t_nodes;
  g.s_lo = p.s_lo();
  g.s_hi = p.s_hi();
  g.spacing = (g.s_hi - g.s_lo) / (grid.s_nodes - 1);
  g.block = m;
  const double h = g.spacing;
  if (h * p.max_abs_weight() > 0.6) {
    std::ostringstream msg;
    msg << "s-spacing " << h << " does not resolve weight " << p.max_abs_weight()
        << " (need spacing * |delta| <= 0.6)";
    throw Error(ErrorCode::resolution, msg.str());
  }

  const Eigen::MatrixXd cr = fourier_cr_operator(p.dim, t_nodes);
  std::vector<Eigen::MatrixXd> knot_mult;
  knot_mult.reserve(p.coeff_knots.size());
  for (const auto& k : p.coeff_knots) knot_mult.push_back(fourier_multiplication(k.coeff, t_nodes));
  auto multiplication_at = [&](double s) -> Eigen::MatrixXd {
    const auto [i, phi] = locate(p.coeff_knots, s);
    if (phi == 0.0) return knot_mult[i];
    return (1.0 - phi) * knot_mult[i] + phi * knot_mult[i + 1];
  };
  auto shifted_at = [&](double s) -> Eigen::MatrixXd {
    Eigen::MatrixXd a = cr + multiplication_at(s);
    a.diagonal().array() -= p.weight_rate_at(s);
    return a;
  };

  // Coefficients must have settled to the end data at the truncation.
  const double settle = std::exp(-p.decay_rate * (p.truncation.s_max - p.truncation.neck));
  for (const auto& e : p.ends) {
    const double s_end = e.sign == EndSign::positive ? g.s_hi : g.s_lo;
    const Eigen::MatrixXd limit = fourier_multiplication(e.asymptotic.coeff, t_nodes);
    const double diff = (multiplication_at(s_end) - limit).cwiseAbs().maxCoeff() +
                        std::abs(p.weight_rate_at(s_end) - e.weight_rate());
    if (diff > settle) {
      std::ostringstream msg;
      msg << "coefficient at s=" << s_end << " differs from the " << to_string(e.sign)
          << " end limit by " << diff << " > " << settle;
      throw Error(ErrorCode::precondition, msg.str());
    }
  }

  std::vector<Eigen::Triplet<double>> trips;
  const int residual_rows = (grid.s_nodes - 1) * m;

  // Interior residual rows at midpoints: (eta_{j+1} - eta_j)/h + A_mid (eta_j + eta_{j+1})/2.
  for (int j = 0; j + 1 < grid.s_nodes; ++j) {
    const Eigen::MatrixXd a = shifted_at(g.node(j) + 0.5 * h);
    for (int r = 0; r < m; ++r) {
      for (int c = 0; c < m; ++c) {
        const double half = 0.5 * a(r, c);
        const double diag = (r == c) ? 1.0 / h : 0.0;
        if (half - diag != 0.0) trips.emplace_back(j * m + r, j * m + c, half - diag);
        if (half + diag != 0.0) trips.emplace_back(j * m + r, (j + 1) * m + c, half + diag);
      }
    }
  }

  int row = residual_rows;
  const double trace_scale = 1.0 / std::sqrt(h);
  auto add_boundary = [&](int node, const Eigen::MatrixXd& op, bool forbid_positive,
                          bool allow_zero, const char* where) {
    Eigen::VectorXd values;
    const Eigen::MatrixXd vecs = symmetric_eigenvectors(op, values);
    const double tol = 1e-8 * (1.0 + op.cwiseAbs().maxCoeff());
    int added = 0;
    for (Eigen::Index i = 0; i < values.size(); ++i) {
      const double v = values(i);
      if (std::abs(v) <= tol) {
        if (allow_zero) continue;
        std::ostringstream msg;
        msg << where << ": shifted asymptotic operator has eigenvalue " << v
            << " (weight on the spectrum, projector rank undefined)";
        throw Error(ErrorCode::fredholm, msg.str());
      }
      if ((v > 0.0) != forbid_positive) continue;
      for (int c = 0; c < m; ++c) {
        const double x = vecs(c, i) * trace_scale;
        if (x != 0.0) trips.emplace_back(row, node * m + c, x);
      }
      ++row;
      ++added;
    }
    return added;
  };

  DiscreteOperator op;
  op.grid = g;
  op.weight_conjugated = true;
  op.residual_rows = residual_rows;
  if (p.domain_kind == DomainKind::plane) {
    // Trace modes that do not extend holomorphically over the disk vanish.
    const Eigen::MatrixXd cap = cr + multiplication_at(0.0);
    op.boundary_rows_lo = add_boundary(0, cap, true, true, "cap");
  } else {
    op.boundary_rows_lo = add_boundary(0, shifted_at(g.s_lo), true, false, "negative end");
  }
  op.boundary_rows_hi =
      add_boundary(grid.s_nodes - 1, shifted_at(g.s_hi), false, false, "positive end");

  // Augmentation: DF(0)(0, d') = beta'_+ d'_+ + beta'_- d'_-, conjugated by e^{w}.
  const auto layout = augmentation_layout(p);
  const int field_cols = grid.s_nodes * m;
  for (std::size_t a = 0; a < layout.size(); ++a) {
    Eigen::VectorXd col = Eigen::VectorXd::Zero(residual_rows);
    for (const auto& [end, component] : layout[a].parts) {
      Eigen::VectorXd dir = Eigen::VectorXd::Zero(p.dim);
      dir(component) = 1.0;
      const Eigen::VectorXd section = fourier_constant_section(dir, t_nodes);
      for (int j = 0; j + 1 < grid.s_nodes; ++j) {
        const double s = g.node(j) + 0.5 * h;
        const double d = cutoff_derivative(*end, s);
        if (d == 0.0) continue;
        col.segment(j * m, m) += std::exp(p.weight_potential_at(s)) * d * std::sqrt(h) * section;
      }
    }
    const double norm = col.norm();
    if (norm == 0.0) {
      throw Error(ErrorCode::assembly, "augmentation cutoff lies outside the computational box");
    }
    col /= norm;
    for (int r = 0; r < residual_rows; ++r) {
      if (col(r) != 0.0) trips.emplace_back(r, field_cols + static_cast<int>(a), col(r));
    }
  }
  op.augmentation_cols = static_cast<int>(layout.size());

  op.matrix.resize(row, field_cols + op.augmentation_cols);
  op.matrix.setFromTriplets(trips.begin(), trips.end());
  op.matrix.makeCompressed();
  for (int k = 0; k < op.matrix.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(op.matrix, k); it; ++it) {
      if (!std::isfinite(it.value())) throw Error(ErrorCode::assembly, "non-finite matrix entry");
    }
  }
  return op;
}

}  // namespace crlab
