// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/QR>

#include "crlab/gluing.hpp"
#include "crlab/index_engine.hpp"
#include "crlab/loop_ops.hpp"
#include "crlab/moduli_dim.hpp"

using namespace crlab;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

std::vector<int> selected;  // empty: run everything

void report(int id, const std::string& name, const std::function<Outcome()>& body) {
  if (!selected.empty() && std::find(selected.begin(), selected.end(), id) == selected.end()) return;
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::printf("%s  criterion %2d  %-34s %7.2fs  %s\n", o.pass ? "PASS" : "FAIL", id, name.c_str(),
              seconds_since(t0), o.detail.c_str());
  std::fflush(stdout);
}

const Grid kGrid{96, 32};
const Truncation kTrunc{12.0, 6.0};

struct Timed {
  IndexReport report;
  double seconds = 0.0;
};

Timed timed_index(const CRProblem& p) {
  const auto t0 = Clock::now();
  Timed t;
  t.report = numerical_index(assemble(p));
  t.seconds = seconds_since(t0);
  return t;
}

Eigen::MatrixXd random_symmetric(int n, std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> nd(0.0, scale);
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) a(i, k) = nd(rng);
  return 0.5 * (a + a.transpose());
}

// Random constant endpoint with spectral margin at least `margin` from 0.
// Random constant end; the scalar shift moves the zero modes across 0 so that
// the paths carry nonzero flow.
LoopOperatorSpec random_endpoint(int dim, std::mt19937_64& rng, double margin) {
  std::uniform_real_distribution<double> shift(-4.0, 4.0);
  for (;;) {
    const Eigen::MatrixXd m = random_symmetric(dim, rng, 1.5) + shift(rng) * Eigen::MatrixXd::Identity(dim, dim);
    const auto spec = LoopOperatorSpec::constant(m);
    const auto nd = is_nondegenerate(spec, kGrid.t_nodes);
    if (nd.nondegenerate && nd.margin > margin) return spec;
  }
}

// Count of negative eigenvalues in the truncated loop space; the flow
// convention makes flow = N_neg(end) - N_neg(start).
int negative_count(const LoopOperatorSpec& s, int t_nodes) {
  int n = 0;
  for (double v : spectrum(assemble_loop_operator(s, t_nodes)).flat()) n += v < 0.0;
  return n;
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

}  // namespace

// Optional arguments select criteria by number.
int main(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  std::printf("acceptance suite, grid %dx%d, S_max %.0f\n", kGrid.s_nodes, kGrid.t_nodes, kTrunc.s_max);

  IndexReport plus_plus;
  IndexReport minus_plus;

  report(1, "cylinder_plus_plus_index", [&] {
    const auto t = timed_index(build_trivial_cylinder(1.0, 1.0, 0, 0, kTrunc, kGrid));
    plus_plus = t.report;
    const int formula = multi_end_index(1, 1);
    std::ostringstream d;
    d << "index " << t.report.index << " (closed form " << formula << "), gap " << fmt(t.report.gap_ratio)
      << ", " << fmt(t.seconds) << "s";
    return Outcome{t.report.index == -2 && formula == -2 && t.report.decisive &&
                       t.report.gap_ratio >= 1e3 && t.seconds < 10.0,
                   d.str()};
  });

  report(2, "cylinder_augmented_surjective", [&] {
    const auto t = timed_index(build_trivial_cylinder(1.0, 1.0, 2, 2, kTrunc, kGrid));
    std::ostringstream d;
    d << "index " << t.report.index << ", dim_coker " << t.report.dim_coker << ", " << fmt(t.seconds) << "s";
    return Outcome{t.report.index == 2 && t.report.dim_coker == 0 && t.report.decisive && t.seconds < 10.0,
                   d.str()};
  });

  report(3, "cylinder_minus_plus_invertible", [&] {
    std::ostringstream d;
    bool ok = true;
    double lo = 1e300;
    double hi = 0.0;
    for (auto [s_max, nodes] : {std::pair{10.0, 80}, {12.0, 96}, {16.0, 128}}) {
      const auto t = timed_index(build_trivial_cylinder(-1.0, 1.0, 0, 0, {s_max, 6.0}, {nodes, 32}));
      if (s_max == 12.0) minus_plus = t.report;
      const double sigma = t.report.min_singular_value();
      ok = ok && t.report.index == 0 && t.report.dim_ker == 0 && t.report.decisive && sigma > 0.05;
      lo = std::min(lo, sigma);
      hi = std::max(hi, sigma);
      d << "S" << s_max << ": ind " << t.report.index << " smin " << fmt(sigma) << "; ";
    }
    const double spread = (hi - lo) / lo;
    d << "spread " << fmt(spread);
    return Outcome{ok && spread < 0.1, d.str()};
  });

  report(4, "wall_crossing_relative_index", [&] {
    const auto zero = spectrum(assemble_loop_operator(LoopOperatorSpec::zero(2), kGrid.t_nodes));
    const int window = count_window(zero, -1.0, 1.0);
    const int diff = minus_plus.index - plus_plus.index;
    const int predicted = predicted_index_change(build_trivial_cylinder(1.0, 1.0, 0, 0, kTrunc, kGrid),
                                                 build_trivial_cylinder(-1.0, 1.0, 0, 0, kTrunc, kGrid));
    std::ostringstream d;
    d << "difference " << diff << ", window count " << window << ", predicted " << predicted;
    return Outcome{diff == 2 && window == 2 && predicted == 2, d.str()};
  });

  report(5, "plane_indices_and_constant_kernel", [&] {
    const auto p = build_plane(-1.0, 0, kTrunc, kGrid);
    const auto op = assemble(p);
    const auto kb = kernel_basis(op.matrix, {}, op.grid_tag());
    // Oracle: the box scheme maps a t-constant section with profile P_j to
    // P_{j+1} = P_j (1 + w' h / 2) / (1 - w' h / 2); anything else in the
    // kernel would show up as a residual after projection.
    const int m = op.grid.block;
    const double h = op.grid.spacing;
    Eigen::MatrixXd constants = Eigen::MatrixXd::Zero(op.cols(), 2);
    for (int c = 0; c < 2; ++c) {
      Eigen::VectorXd dir = Eigen::VectorXd::Zero(2);
      dir(c) = 1.0;
      const Eigen::VectorXd section = fourier_constant_section(dir, kGrid.t_nodes);
      double profile = 1.0;
      for (int j = 0; j < op.grid.s_nodes; ++j) {
        constants.block(j * m, c, m, 1) = profile * section;
        const double rate = p.weight_rate_at(op.grid.node(j) + 0.5 * h);
        profile *= (1.0 + 0.5 * rate * h) / (1.0 - 0.5 * rate * h);
      }
    }
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(constants).householderQ() *
                              Eigen::MatrixXd::Identity(constants.rows(), 2);
    const double residual =
        kb.kernel.cols() ? (kb.kernel - q * (q.transpose() * kb.kernel)).norm() : 1.0;
    const auto plus = timed_index(build_plane(1.0, 0, kTrunc, kGrid)).report;
    const auto plus_aug = timed_index(build_plane(1.0, 2, kTrunc, kGrid)).report;
    std::ostringstream d;
    d << "-delta: index " << kb.report.index << " ker " << kb.report.dim_ker << " residual " << fmt(residual)
      << "; +delta: " << plus.index << "; +delta aug: " << plus_aug.index;
    return Outcome{kb.report.index == 2 && kb.report.dim_ker == 2 && residual < 1e-6 && plus.index == 0 &&
                       plus_aug.index == 2 && kb.report.decisive && plus.decisive && plus_aug.decisive,
                   d.str()};
  });

  report(6, "contact_trivial_orbit_isomorphism", [&] {
    const auto id = LoopOperatorSpec::scalar(2, 1.0);
    const auto p = build_contact_fiber_cylinder(id, id, {}, kTrunc, kGrid);
    const auto rows = convergence_study(p, {Grid{64, 16}, Grid{96, 32}, Grid{128, 32}});
    bool ok = true;
    double lo = 1e300;
    double hi = 0.0;
    std::ostringstream d;
    for (const auto& r : rows) {
      const double s = r.report.min_singular_value();
      ok = ok && r.report.index == 0 && r.report.dim_ker == 0 && r.report.decisive && s > 0.0;
      lo = std::min(lo, s);
      hi = std::max(hi, s);
      d << r.grid.s_nodes << "x" << r.grid.t_nodes << ": ind " << r.report.index << " smin " << fmt(s) << "; ";
    }
    d << "spread " << fmt((hi - lo) / lo);
    return Outcome{ok && (hi - lo) / lo < 0.1, d.str()};
  });

  report(7, "index_equals_minus_spectral_flow", [&] {
    std::mt19937_64 rng(77);
    std::ostringstream d;
    bool ok = true;
    double slowest = 0.0;
    int nonzero = 0;
    for (int trial = 0; trial < 6; ++trial) {
      const int dim = trial < 3 ? 2 : 4;
      const auto a = random_endpoint(dim, rng, 0.3);
      const auto b = random_endpoint(dim, rng, 0.3);
      const auto mid = LoopOperatorSpec::constant(random_symmetric(dim, rng, 2.5));
      const auto p = build_contact_fiber_cylinder(a, b, {mid}, kTrunc, kGrid);
      const int flow = spectral_flow(concatenate(linear_path(a, mid), linear_path(mid, b)), 400, kGrid.t_nodes);
      const int oracle = negative_count(b, kGrid.t_nodes) - negative_count(a, kGrid.t_nodes);
      const auto t = timed_index(p);
      slowest = std::max(slowest, t.seconds);
      ok = ok && t.report.decisive && t.report.index == -flow && flow == oracle && t.seconds < 30.0;
      nonzero += flow != 0;
      d << "d" << dim << ":" << t.report.index << "/" << -flow << " ";
    }
    // a suite of trivial zero-flow paths would prove little
    ok = ok && nonzero >= 3;
    d << "nonzero " << nonzero << ", slowest " << fmt(slowest) << "s";
    return Outcome{ok, d.str()};
  });

  report(8, "gluing_additivity", [&] {
    const Truncation tr{12.0, 3.0};
    const Grid g{97, 32};
    const auto neg = LoopOperatorSpec::scalar(2, -1.0);
    const auto id = LoopOperatorSpec::scalar(2, 1.0);
    const auto c7 = LoopOperatorSpec::scalar(2, 7.0);
    struct Pair {
      std::string name;
      CRProblem u;
      CRProblem w;
    };
    const std::vector<Pair> pairs{
        {"kernel", build_trivial_cylinder(-1.0, -1.0, 0, 0, tr, g), build_trivial_cylinder(1.0, -1.0, 0, 0, tr, g)},
        {"invertible", build_trivial_cylinder(-1.0, 1.0, 0, 0, tr, g), build_trivial_cylinder(-1.0, 1.0, 0, 0, tr, g)},
        {"contact", build_contact_fiber_cylinder(id, id, {}, tr, g, 0.5, 0.5),
         build_contact_fiber_cylinder(id, id, {}, tr, g, -0.5, 0.5)},
        {"flow", build_contact_fiber_cylinder(neg, id, {}, tr, g, 0.5, 0.5),
         build_contact_fiber_cylinder(id, c7, {}, tr, g, -0.5, 0.5)},
    };
    bool ok = true;
    std::ostringstream d;
    for (const auto& pr : pairs) {
      const auto rep = verify_additivity(pr.u, pr.w, {6.0, 8.0, 10.0, 12.0});
      int decisive = 0;
      for (const auto& r : rep.rows) decisive += r.decisive;
      const auto& last = rep.rows.back();
      const bool pass = rep.additive && rep.residual_decay && rep.stability_plateau && rep.dimension_match;
      ok = ok && pass;
      d << pr.name << ":" << last.ind_u << "+" << last.ind_w << "=" << last.ind_glued << (pass ? "" : "(x)")
        << " dec" << decisive << " ";
    }
    return Outcome{ok, d.str()};
  });

  report(9, "b0_reduced_problem", [&] {
    const auto reduced = timed_index(build_trivial_cylinder(1.0, 1.0, 1, 2, kTrunc, kGrid)).report;
    const auto full = timed_index(build_trivial_cylinder(1.0, 1.0, 2, 2, kTrunc, kGrid)).report;
    std::ostringstream d;
    d << "reduced " << reduced.index << ", full " << full.index;
    return Outcome{reduced.index == 1 && full.index == 2 && reduced.decisive && full.decisive, d.str()};
  });

  report(10, "degeneration_codimensions", [&] {
    const auto t0 = Clock::now();
    bool ok = true;
    std::ostringstream d;
    for (const auto& c : canonical_cases()) {
      const int codim = codimension(c.degenerate, c.smooth);
      ok = ok && codim == c.expected_codimension;
      d << c.name << "=" << codim << " ";
    }
    std::mt19937_64 rng(10);
    int random_ok = 0;
    int total = 0;
    for (const auto& family : degeneration_families()) {
      for (int i = 0; i < 100; ++i) {
        const auto c = randomized_case(family, rng);
        ++total;
        random_ok += codimension(c.degenerate, c.smooth) == c.expected_codimension;
      }
    }
    const double secs = seconds_since(t0);
    d << "random " << random_ok << "/" << total << ", " << fmt(secs) << "s";
    return Outcome{ok && random_ok == total && secs < 1.0, d.str()};
  });

  report(11, "sweep_jumps_and_duality", [&] {
    std::mt19937_64 rng(11);
    const Truncation tr{8.0, 3.0};
    const Grid g{72, 16};
    int jumps_ok = 0;
    int jumps = 0;
    int sweeps = 0;
    int skipped = 0;
    while (sweeps < 20) {
      const auto s = LoopOperatorSpec::constant(random_symmetric(2, rng, 1.2));
      if (!is_nondegenerate(s, g.t_nodes).nondegenerate) continue;
      std::uniform_real_distribution<double> sign(0.0, 1.0);
      const double wm = sign(rng) < 0.5 ? -0.1 : 0.1;
      const double wp = sign(rng) < 0.5 ? -0.1 : 0.1;
      CRProblem p;
      try {
        p = build_contact_fiber_cylinder(s, s, {}, tr, g, wm, wp);
      } catch (const Error&) {
        continue;
      }
      const auto res = delta_sweep(p, {0.1, 0.6, 1.1, 1.6, 2.1, 2.6}, g);
      for (const auto& smp : res.samples) skipped += !smp.report.has_value();
      for (const auto& j : res.jumps) {
        ++jumps;
        jumps_ok += j.jump == j.crossed_multiplicity;
      }
      ++sweeps;
    }
    int dual_ok = 0;
    for (int i = 0; i < 10; ++i) {
      std::uniform_real_distribution<double> mag(0.2, 2.2);
      std::uniform_int_distribution<int> coin(0, 1);
      const double wm = (coin(rng) ? 1.0 : -1.0) * mag(rng);
      const double wp = (coin(rng) ? 1.0 : -1.0) * mag(rng);
      const auto dc = duality_check(build_trivial_cylinder(wm, wp, 0, 0, kTrunc, Grid{96, 16}));
      dual_ok += dc.holds;
    }
    std::ostringstream d;
    d << "jumps " << jumps_ok << "/" << jumps << " over " << sweeps << " sweeps (" << skipped
      << " samples on the spectrum), duality " << dual_ok << "/10";
    return Outcome{jumps > 0 && jumps_ok == jumps && dual_ok == 10, d.str()};
  });

  std::printf("%s: %d criteria failed\n", failures ? "FAILED" : "ALL PASSED", failures);
  return failures ? 1 : 0;
}
