#include "crlab/experiments.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "crlab/gluing.hpp"
#include "crlab/index_engine.hpp"
#include "crlab/loop_ops.hpp"
#include "crlab/moduli_dim.hpp"

namespace crlab {

const char* to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::spectrum: return "spectrum";
    case ExperimentKind::index: return "index";
    case ExperimentKind::sweep: return "sweep";
    case ExperimentKind::glue: return "glue";
    case ExperimentKind::vdim: return "vdim";
    case ExperimentKind::reproduce_all: return "reproduce_all";
  }
  return "?";
}

ExperimentKind experiment_kind_from_string(const std::string& s) {
  for (auto k : {ExperimentKind::spectrum, ExperimentKind::index, ExperimentKind::sweep,
                 ExperimentKind::glue, ExperimentKind::vdim, ExperimentKind::reproduce_all}) {
    if (s == to_string(k)) return k;
  }
  throw Error(ErrorCode::config, "unknown experiment kind '" + s + "'");
}

Grid parse_grid(const std::string& text) {
  const auto x = text.find('x');
  Grid g;
  try {
    if (x == std::string::npos) throw std::invalid_argument("no x");
    std::size_t used = 0;
    g.s_nodes = std::stoi(text.substr(0, x), &used);
    if (used != x) throw std::invalid_argument("trailing");
    const std::string t = text.substr(x + 1);
    g.t_nodes = std::stoi(t, &used);
    if (used != t.size()) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw Error(ErrorCode::config, "grid must look like <s>x<t>, got '" + text + "'");
  }
  if (g.s_nodes < 4 || g.t_nodes < 8) {
    throw Error(ErrorCode::config, "grid " + text + " is below the minimum 4x8");
  }
  return g;
}

Verdict combine(Verdict a, Verdict b) {
  if (a == Verdict::wrong || b == Verdict::wrong) return Verdict::wrong;
  if (a == Verdict::indecisive || b == Verdict::indecisive) return Verdict::indecisive;
  return Verdict::pass;
}

namespace {

const char* verdict_word(Verdict v) {
  switch (v) {
    case Verdict::pass: return "PASS";
    case Verdict::wrong: return "FAIL";
    case Verdict::indecisive: return "INDECISIVE";
  }
  return "?";
}

struct Context {
  const ExperimentConfig& config;
  std::filesystem::path dir;
  RunResult result;
  std::ostringstream summary;

  explicit Context(const ExperimentConfig& c) : config(c), dir(c.output_dir) {}

  void write(const std::string& file, const std::string& content) {
    write_file_atomic(dir / file, content);
    result.files.push_back(dir / file);
  }

  void note(Verdict v, const std::string& line) {
    result.verdict = combine(result.verdict, v);
    summary << verdict_word(v) << "  " << line << '\n';
  }

  CRProblem adjust(CRProblem p) const {
    if (config.s_max) p = with_s_max(p, *config.s_max);
    if (config.grid) p = with_grid(p, *config.grid);
    return p;
  }

  TolerancePolicy policy() const {
    const JsonReader in(config.inputs, "/inputs");
    return in.has("policy") ? policy_from_json(in.at("policy")) : TolerancePolicy{};
  }
};

std::vector<double> number_list(const JsonReader& r) {
  std::vector<double> out;
  for (std::size_t i = 0; i < r.size(); ++i) out.push_back(r.at(i).number());
  return out;
}

std::vector<double> delta_list(const JsonReader& r) {
  if (r.json().is_array()) return number_list(r);
  r.only_keys({"start", "stop", "count"});
  const double a = r.at("start").number();
  const double b = r.at("stop").number();
  const int n = r.at("count").integer();
  if (n < 2) r.fail("count must be at least 2");
  std::vector<double> out;
  for (int i = 0; i < n; ++i) out.push_back(a + (b - a) * i / (n - 1));
  return out;
}

// ---------------------------------------------------------------------------
// Payload validation (no numerics).

void validate_spectrum(const JsonReader& in) {
  in.only_keys({"operators", "t_resolution", "method"});
  if (in.has("t_resolution") && in.at("t_resolution").integer() < 3) {
    in.at("t_resolution").fail("t_resolution must be at least 3");
  }
  if (in.has("method")) {
    try {
      loop_method_from_string(in.at("method").string());
    } catch (const Error& e) {
      in.at("method").fail(e.what());
    }
  }
  const auto ops = in.at("operators");
  if (ops.size() == 0) ops.fail("no operators");
  for (std::size_t i = 0; i < ops.size(); ++i) {
    const auto op = ops.at(i);
    op.only_keys({"name", "operator", "expect"});
    op.at("name").string();
    loop_spec_from_json(op.at("operator"));
    if (op.has("expect")) {
      const auto ex = op.at("expect");
      ex.only_keys({"values", "multiplicities", "tolerance"});
      const auto v = number_list(ex.at("values"));
      if (ex.has("multiplicities") && ex.at("multiplicities").size() != v.size()) {
        ex.at("multiplicities").fail("needs one multiplicity per value");
      }
    }
  }
}

void validate_expect_index(const JsonReader& ex) {
  ex.only_keys({"index", "dim_ker", "dim_coker", "min_singular_value_above"});
  for (const char* k : {"index", "dim_ker", "dim_coker"}) {
    if (ex.has(k)) ex.at(k).integer();
  }
  if (ex.has("min_singular_value_above")) ex.at("min_singular_value_above").number();
}

void validate_index(const JsonReader& in) {
  in.only_keys({"problems", "policy"});
  if (in.has("policy")) policy_from_json(in.at("policy"));
  const auto ps = in.at("problems");
  if (ps.size() == 0) ps.fail("no problems");
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const auto p = ps.at(i);
    p.only_keys({"name", "problem", "method", "expect"});
    p.at("name").string();
    problem_from_json(p.at("problem"));
    const std::string m = p.string("method", "direct_svd");
    if (m != "direct_svd" && m != "analytic_wallcrossing" && m != "both") {
      p.at("method").fail("method is direct_svd, analytic_wallcrossing or both");
    }
    if (p.has("expect")) validate_expect_index(p.at("expect"));
  }
}

void validate_sweep(const JsonReader& in) {
  in.only_keys({"problem", "deltas", "policy"});
  problem_from_json(in.at("problem"));
  if (delta_list(in.at("deltas")).size() < 2) in.at("deltas").fail("need at least two deltas");
  if (in.has("policy")) policy_from_json(in.at("policy"));
}

void validate_glue(const JsonReader& in) {
  in.only_keys({"pairs", "taus", "policy"});
  if (in.has("policy")) policy_from_json(in.at("policy"));
  if (in.has("taus")) number_list(in.at("taus"));
  const auto ps = in.at("pairs");
  if (ps.size() == 0) ps.fail("no pairs");
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const auto p = ps.at(i);
    p.only_keys({"name", "u", "w", "taus"});
    p.at("name").string();
    problem_from_json(p.at("u"));
    problem_from_json(p.at("w"));
    if (p.has("taus")) number_list(p.at("taus"));
    if (!p.has("taus") && !in.has("taus")) p.fail("no gluing parameters (taus)");
  }
}

void validate_vdim(const JsonReader& in) {
  in.only_keys({"canonical", "random_per_family", "cases"});
  in.boolean("canonical", true);
  if (in.integer("random_per_family", 0) < 0) in.at("random_per_family").fail("must be >= 0");
  if (in.has("cases")) {
    const auto cs = in.at("cases");
    for (std::size_t i = 0; i < cs.size(); ++i) {
      const auto c = cs.at(i);
      c.only_keys({"name", "degenerate", "smooth", "expected_codimension"});
      c.at("name").string();
      graph_from_json(c.at("degenerate"));
      graph_from_json(c.at("smooth"));
      if (c.has("expected_codimension")) c.at("expected_codimension").integer();
    }
  }
}

void validate_reproduce(const JsonReader& in) {
  in.only_keys({"include_gluing", "policy"});
  in.boolean("include_gluing", true);
  if (in.has("policy")) policy_from_json(in.at("policy"));
}

void validate_inputs(ExperimentKind kind, const JsonReader& in) {
  in.expect_object();
  switch (kind) {
    case ExperimentKind::spectrum: validate_spectrum(in); break;
    case ExperimentKind::index: validate_index(in); break;
    case ExperimentKind::sweep: validate_sweep(in); break;
    case ExperimentKind::glue: validate_glue(in); break;
    case ExperimentKind::vdim: validate_vdim(in); break;
    case ExperimentKind::reproduce_all: validate_reproduce(in); break;
  }
}

// ---------------------------------------------------------------------------
// Runners

void run_spectrum(Context& ctx) {
  const JsonReader in(ctx.config.inputs, "/inputs");
  int t_res = in.integer("t_resolution", 33);
  if (ctx.config.grid) t_res = ctx.config.grid->t_nodes;
  const auto method = loop_method_from_string(in.string("method", "fourier"));
  CsvWriter csv({"operator", "value", "multiplicity", "reliable"});
  Json out = Json::array();
  const auto ops = in.at("operators");
  for (std::size_t i = 0; i < ops.size(); ++i) {
    const auto entry = ops.at(i);
    const std::string name = entry.at("name").string();
    const auto spec = loop_spec_from_json(entry.at("operator"));
    const auto rep = spectrum(assemble_loop_operator(spec, t_res, method));
    for (const auto& e : rep.eigenvalues) {
      csv.cell(name).cell(e.value).cell(e.multiplicity).cell(e.reliable);
      csv.end_row();
    }
    out.push_back({{"name", name}, {"spectrum", to_json(rep)}});
    if (!entry.has("expect")) continue;
    const auto ex = entry.at("expect");
    const auto values = number_list(ex.at("values"));
    const double tol = ex.number("tolerance", 1e-9);
    int missing = 0;
    for (std::size_t k = 0; k < values.size(); ++k) {
      const int mult = ex.has("multiplicities") ? ex.at("multiplicities").at(k).integer() : -1;
      bool found = false;
      for (const auto& e : rep.eigenvalues) {
        if (std::abs(e.value - values[k]) <= tol * (1.0 + std::abs(values[k])) &&
            (mult < 0 || e.multiplicity == mult)) {
          found = true;
        }
      }
      if (!found) ++missing;
    }
    std::ostringstream line;
    line << "spectrum " << name << ": " << values.size() - missing << "/" << values.size()
         << " expected eigenvalues present";
    ctx.note(missing == 0 ? Verdict::pass : Verdict::wrong, line.str());
  }
  ctx.write("spectrum.csv", csv.str());
  ctx.write("spectrum.json", out.dump(2) + "\n");
}

Verdict check_index(const JsonReader& ex, const IndexReport& r, std::string& detail) {
  Verdict v = Verdict::pass;
  std::ostringstream d;
  auto cmp = [&](const char* key, int got) {
    if (!ex.has(key)) return;
    const int want = ex.at(key).integer();
    d << ' ' << key << '=' << got << (got == want ? "" : " (expected " + std::to_string(want) + ")");
    if (got != want) v = Verdict::wrong;
  };
  cmp("index", r.index);
  cmp("dim_ker", r.dim_ker);
  cmp("dim_coker", r.dim_coker);
  if (ex.has("min_singular_value_above")) {
    const double lo = ex.at("min_singular_value_above").number();
    d << " sigma_min=" << format_double(r.min_singular_value());
    if (!(r.min_singular_value() > lo)) v = Verdict::wrong;
  }
  detail = d.str();
  return v;
}

void run_index(Context& ctx) {
  const JsonReader in(ctx.config.inputs, "/inputs");
  const auto policy = ctx.policy();
  CsvWriter csv({"name", "method", "grid", "index", "dim_ker", "dim_coker", "sigma_min",
                 "gap_ratio", "decisive", "pass"});
  CsvWriter svs({"name", "k", "singular_value"});
  Json out = Json::array();
  const auto ps = in.at("problems");
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const auto entry = ps.at(i);
    const std::string name = entry.at("name").string();
    const auto problem = ctx.adjust(problem_from_json(entry.at("problem")));
    const std::string method = entry.string("method", "direct_svd");
    std::vector<IndexReport> reports;
    if (method != "analytic_wallcrossing") reports.push_back(numerical_index(assemble(problem), policy));
    if (method != "direct_svd") reports.push_back(analytic_report(problem));
    Json jr = Json::array();
    for (const auto& r : reports) {
      Verdict v = Verdict::pass;
      std::string detail = " index=" + std::to_string(r.index);
      if (entry.has("expect")) v = check_index(entry.at("expect"), r, detail);
      if (v == Verdict::pass && !r.decisive) v = Verdict::indecisive;
      if (reports.size() == 2 && reports[0].index != reports[1].index) v = Verdict::wrong;
      csv.cell(name).cell(std::string(to_string(r.method))).cell(r.grid_tag).cell(r.index);
      csv.cell(r.dim_ker).cell(r.dim_coker).cell(r.min_singular_value()).cell(r.gap_ratio);
      csv.cell(r.decisive).cell(v == Verdict::pass);
      csv.end_row();
      for (std::size_t k = 0; k < r.singular_values.size(); ++k) {
        svs.cell(name).cell(static_cast<int>(k)).cell(r.singular_values[k]);
        svs.end_row();
      }
      jr.push_back(to_json(r));
      ctx.note(v, "index " + name + " [" + to_string(r.method) + "]" + detail);
    }
    out.push_back({{"name", name}, {"problem", to_json(problem)}, {"reports", jr}});
  }
  ctx.write("index.csv", csv.str());
  ctx.write("singular_values.csv", svs.str());
  ctx.write("index.json", out.dump(2) + "\n");
}

void run_sweep(Context& ctx) {
  const JsonReader in(ctx.config.inputs, "/inputs");
  const auto problem = ctx.adjust(problem_from_json(in.at("problem")));
  const auto deltas = delta_list(in.at("deltas"));
  const auto res = delta_sweep(problem, deltas, problem.grid, ctx.policy());
  CsvWriter csv({"delta", "index", "dim_ker", "dim_coker", "decisive", "analytic", "flag"});
  bool indecisive = false;
  for (const auto& s : res.samples) {
    csv.cell(s.delta);
    if (s.report) {
      csv.cell(s.report->index).cell(s.report->dim_ker).cell(s.report->dim_coker).cell(s.report->decisive);
      if (!s.report->decisive) indecisive = true;
    } else {
      csv.cell(std::string()).cell(std::string()).cell(std::string()).cell(std::string());
    }
    if (s.analytic) {
      csv.cell(*s.analytic);
    } else {
      csv.cell(std::string());
    }
    csv.cell(s.flag);
    csv.end_row();
  }
  CsvWriter jumps({"delta_lo", "delta_hi", "jump", "crossed_multiplicity", "match"});
  int mismatched = 0;
  for (const auto& j : res.jumps) {
    const bool ok = j.jump == j.crossed_multiplicity;
    if (!ok) ++mismatched;
    jumps.cell(j.delta_lo).cell(j.delta_hi).cell(j.jump).cell(j.crossed_multiplicity).cell(ok);
    jumps.end_row();
  }
  ctx.write("sweep.csv", csv.str());
  ctx.write("jumps.csv", jumps.str());
  std::ostringstream line;
  line << "sweep: " << res.jumps.size() - mismatched << "/" << res.jumps.size()
       << " jumps equal the crossed multiplicity";
  Verdict v = mismatched ? Verdict::wrong : (indecisive ? Verdict::indecisive : Verdict::pass);
  ctx.note(v, line.str());
}

void run_glue(Context& ctx) {
  const JsonReader in(ctx.config.inputs, "/inputs");
  const auto policy = ctx.policy();
  CsvWriter csv({"pair", "tau", "ind_u", "ind_w", "ind_glued", "decisive", "stability_constant",
                 "max_residual", "scaled_residual", "dim_ker_glued", "approx_kernel_dim"});
  Json out = Json::array();
  const auto ps = in.at("pairs");
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const auto entry = ps.at(i);
    const std::string name = entry.at("name").string();
    const auto u = ctx.adjust(problem_from_json(entry.at("u")));
    const auto w = ctx.adjust(problem_from_json(entry.at("w")));
    const auto taus = number_list(entry.has("taus") ? entry.at("taus") : in.at("taus"));
    const auto rep = verify_additivity(u, w, taus, policy);
    bool all_decisive = true;
    for (const auto& r : rep.rows) {
      csv.cell(name).cell(r.tau).cell(r.ind_u).cell(r.ind_w).cell(r.ind_glued).cell(r.decisive);
      csv.cell(r.stability_constant).cell(r.max_residual).cell(r.scaled_residual);
      csv.cell(r.dim_ker_glued).cell(r.approx_kernel_dim);
      csv.end_row();
      all_decisive = all_decisive && r.decisive;
    }
    Json jr = to_json(rep);
    jr["name"] = name;
    out.push_back(jr);
    const bool ok = rep.additive && rep.residual_decay && rep.stability_plateau && rep.dimension_match;
    std::ostringstream line;
    line << "glue " << name << ": additive=" << rep.additive << " residual_decay=" << rep.residual_decay
         << " stability_plateau=" << rep.stability_plateau << " dimension_match=" << rep.dimension_match;
    ctx.note(!ok ? Verdict::wrong : (all_decisive ? Verdict::pass : Verdict::indecisive), line.str());
  }
  ctx.write("glue.csv", csv.str());
  ctx.write("glue.json", out.dump(2) + "\n");
}

void run_vdim(Context& ctx) {
  const JsonReader in(ctx.config.inputs, "/inputs");
  std::vector<std::pair<std::string, DegenerationCase>> cases;
  if (in.boolean("canonical", true)) {
    for (auto& c : canonical_cases()) cases.emplace_back(c.name, c);
  }
  std::mt19937_64 rng(ctx.config.seed);
  const int per_family = in.integer("random_per_family", 0);
  for (const auto& family : degeneration_families()) {
    for (int i = 0; i < per_family; ++i) {
      auto c = randomized_case(family, rng);
      c.name = family + "_random_" + std::to_string(i);
      cases.emplace_back(family, c);
    }
  }
  if (in.has("cases")) {
    const auto cs = in.at("cases");
    for (std::size_t i = 0; i < cs.size(); ++i) {
      const auto c = cs.at(i);
      DegenerationCase d;
      d.name = c.at("name").string();
      d.degenerate = graph_from_json(c.at("degenerate"));
      d.smooth = graph_from_json(c.at("smooth"));
      d.expected_codimension = c.integer("expected_codimension", -1);
      cases.emplace_back("custom", d);
    }
  }
  CsvWriter csv({"case", "family", "dim_degenerate", "dim_smooth", "codimension", "expected", "pass"});
  int failures = 0;
  for (const auto& [family, c] : cases) {
    const int dd = unparameterized_dim(c.degenerate);
    const int ds = unparameterized_dim(c.smooth);
    const int codim = codimension(c.degenerate, c.smooth);
    const bool ok = c.expected_codimension < 0 || codim == c.expected_codimension;
    if (!ok) ++failures;
    csv.cell(c.name).cell(family).cell(dd).cell(ds).cell(codim).cell(c.expected_codimension).cell(ok);
    csv.end_row();
  }
  ctx.write("vdim.csv", csv.str());
  std::ostringstream line;
  line << "vdim: " << cases.size() - failures << "/" << cases.size() << " codimensions as expected";
  ctx.note(failures ? Verdict::wrong : Verdict::pass, line.str());
}

// Fixed suite of the headline integers.
void run_reproduce_all(Context& ctx) {
  const JsonReader in(ctx.config.inputs, "/inputs");
  const auto policy = ctx.policy();
  CsvWriter csv({"experiment", "quantity", "expected", "observed", "decisive", "pass"});

  auto row = [&](const std::string& exp, const std::string& qty, const std::string& want,
                 const std::string& got, bool decisive, bool ok) {
    const Verdict v = !ok ? Verdict::wrong : (decisive ? Verdict::pass : Verdict::indecisive);
    csv.cell(exp).cell(qty).cell(want).cell(got).cell(decisive).cell(ok);
    csv.end_row();
    ctx.note(v, exp + " " + qty + ": expected " + want + ", observed " + got);
  };
  auto index_row = [&](const std::string& exp, const CRProblem& p, int want) {
    const auto r = numerical_index(assemble(ctx.adjust(p)), policy);
    row(exp, "index", std::to_string(want), std::to_string(r.index), r.decisive, r.index == want);
    return r;
  };

  const auto plus_plus = index_row("cylinder_weights_plus_plus", build_trivial_cylinder(1, 1), -2);
  row("cylinder_weights_plus_plus", "closed_form_l1_m1", "-2", std::to_string(multi_end_index(1, 1)),
      true, multi_end_index(1, 1) == -2);
  const auto minus_plus = index_row("cylinder_weights_minus_plus", build_trivial_cylinder(-1, 1), 0);
  row("cylinder_weights_minus_plus", "min_singular_value>0.05", "true",
      format_double(minus_plus.min_singular_value()), minus_plus.decisive,
      minus_plus.min_singular_value() > 0.05);
  const auto aug = index_row("cylinder_augmented", build_trivial_cylinder(1, 1, 2, 2), 2);
  row("cylinder_augmented", "dim_coker", "0", std::to_string(aug.dim_coker), aug.decisive,
      aug.dim_coker == 0);

  const auto zero_spec = spectrum(assemble_loop_operator(LoopOperatorSpec::zero(2), 33));
  const int window = count_window(zero_spec, -1.0, 1.0);
  row("wall_crossing", "index_difference", "2", std::to_string(minus_plus.index - plus_plus.index),
      minus_plus.decisive && plus_plus.decisive, minus_plus.index - plus_plus.index == 2);
  row("wall_crossing", "window_count", "2", std::to_string(window), true, window == 2);

  index_row("plane_weight_minus", build_plane(-1), 2);
  index_row("plane_weight_plus", build_plane(1), 0);
  index_row("plane_weight_plus_augmented", build_plane(1, 2), 2);

  const auto id = LoopOperatorSpec::scalar(2, 1.0);
  const auto contact = index_row("contact_trivial_orbit", build_contact_fiber_cylinder(id, id), 0);
  row("contact_trivial_orbit", "dim_ker", "0", std::to_string(contact.dim_ker), contact.decisive,
      contact.dim_ker == 0);

  const auto neg = LoopOperatorSpec::scalar(2, -1.0);
  const int flow = spectral_flow(linear_path(neg, id), 200, 33);
  index_row("spectral_flow_contract", build_contact_fiber_cylinder(neg, id), -flow);

  index_row("b0_reduced_problem", build_trivial_cylinder(1, 1, 1, 2), 1);
  index_row("b0_full_problem", build_trivial_cylinder(1, 1, 2, 2), 2);

  if (in.boolean("include_gluing", true)) {
    const Truncation tr{12.0, 3.0};
    const Grid g{97, 32};
    const auto c7 = LoopOperatorSpec::scalar(2, 7.0);
    const auto u = build_contact_fiber_cylinder(neg, id, {}, tr, g, 0.5, 0.5);
    const auto w = build_contact_fiber_cylinder(id, c7, {}, tr, g, -0.5, 0.5);
    const auto rep = verify_additivity(u, w, {6, 8, 10, 12}, policy);
    bool decisive = true;
    for (const auto& r : rep.rows) decisive = decisive && r.decisive;
    const bool ok = rep.additive && rep.residual_decay && rep.stability_plateau && rep.dimension_match;
    row("gluing_additivity", "additive+decay+plateau", "true", ok ? "true" : "false", decisive, ok);
  }

  for (const auto& c : canonical_cases()) {
    const int codim = codimension(c.degenerate, c.smooth);
    row("degeneration_" + c.name, "codimension", std::to_string(c.expected_codimension),
        std::to_string(codim), true, codim == c.expected_codimension);
  }
  ctx.write("reproduce_all.csv", csv.str());
}

}  // namespace

Json to_json(const ExperimentConfig& c) {
  Json j{{"name", c.name},
         {"kind", to_string(c.kind)},
         {"inputs", c.inputs},
         {"output_dir", c.output_dir},
         {"seed", c.seed}};
  if (c.grid) j["grid"] = std::to_string(c.grid->s_nodes) + "x" + std::to_string(c.grid->t_nodes);
  if (c.s_max) j["s_max"] = *c.s_max;
  return j;
}

ExperimentConfig experiment_from_json(const Json& j) {
  const JsonReader r(j);
  r.only_keys({"$schema", "name", "kind", "inputs", "output_dir", "seed", "grid", "s_max"});
  ExperimentConfig c;
  c.name = r.at("name").string();
  if (c.name.empty()) r.at("name").fail("name must be nonempty");
  try {
    c.kind = experiment_kind_from_string(r.at("kind").string());
  } catch (const Error& e) {
    r.at("kind").fail(e.what());
  }
  c.inputs = r.has("inputs") ? r.at("inputs").json() : Json::object();
  c.output_dir = r.string("output_dir", "out");
  if (c.output_dir.empty()) r.at("output_dir").fail("output_dir must be nonempty");
  if (r.has("seed")) {
    const auto& s = r.at("seed").json();
    if (!s.is_number_unsigned()) r.at("seed").fail("seed must be a non-negative integer");
    c.seed = s.get<std::uint64_t>();
  }
  if (r.has("grid")) {
    try {
      c.grid = parse_grid(r.at("grid").string());
    } catch (const Error& e) {
      r.at("grid").fail(e.what());
    }
  }
  if (r.has("s_max")) {
    c.s_max = r.at("s_max").number();
    if (!(*c.s_max > 0.0)) r.at("s_max").fail("s_max must be positive");
  }
  validate_inputs(c.kind, JsonReader(c.inputs, "/inputs"));
  return c;
}

RunResult run_experiment(const ExperimentConfig& config) {
  Context ctx(config);
  std::error_code ec;
  std::filesystem::create_directories(ctx.dir, ec);
  if (ec) throw Error(ErrorCode::config, "/output_dir: not writable: " + ec.message());
  switch (config.kind) {
    case ExperimentKind::spectrum: run_spectrum(ctx); break;
    case ExperimentKind::index: run_index(ctx); break;
    case ExperimentKind::sweep: run_sweep(ctx); break;
    case ExperimentKind::glue: run_glue(ctx); break;
    case ExperimentKind::vdim: run_vdim(ctx); break;
    case ExperimentKind::reproduce_all: run_reproduce_all(ctx); break;
  }
  std::ostringstream head;
  head << "experiment " << config.name << " (" << to_string(config.kind) << "), seed " << config.seed
       << "\nresult: " << verdict_word(ctx.result.verdict) << "\n\n";
  ctx.result.summary = head.str() + ctx.summary.str();
  ctx.write("summary.txt", ctx.result.summary);
  Json meta = to_json(config);
  meta["exit_code"] = ctx.result.exit_code();
  meta["result"] = verdict_word(ctx.result.verdict);
  ctx.write("result.json", meta.dump(2) + "\n");
  return ctx.result;
}

}  // namespace crlab
