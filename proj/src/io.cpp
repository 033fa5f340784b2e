#include "crlab/io.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <system_error>

#include <unistd.h>

namespace crlab {

// ---------------------------------------------------------------------------
// JsonReader

JsonReader JsonReader::at(const std::string& key) const {
  expect_object();
  if (!j_.contains(key)) fail("missing required key '" + key + "'");
  return JsonReader(j_.at(key), path_ + "/" + key);
}

JsonReader JsonReader::at(std::size_t index) const {
  expect_array();
  if (index >= j_.size()) fail("index " + std::to_string(index) + " out of range");
  return JsonReader(j_.at(index), path_ + "/" + std::to_string(index));
}

std::size_t JsonReader::size() const {
  expect_array();
  return j_.size();
}

void JsonReader::fail(const std::string& what) const {
  throw Error(ErrorCode::config, (path_.empty() ? std::string("/") : path_) + ": " + what);
}

void JsonReader::expect_object() const {
  if (!j_.is_object()) fail("expected an object");
}

void JsonReader::expect_array() const {
  if (!j_.is_array()) fail("expected an array");
}

void JsonReader::only_keys(const std::vector<std::string>& allowed) const {
  expect_object();
  for (const auto& [key, value] : j_.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      JsonReader(value, path_ + "/" + key).fail("unknown key");
    }
  }
}

double JsonReader::number() const {
  if (!j_.is_number()) fail("expected a number");
  return j_.get<double>();
}

int JsonReader::integer() const {
  if (!j_.is_number_integer()) fail("expected an integer");
  return j_.get<int>();
}

bool JsonReader::boolean() const {
  if (!j_.is_boolean()) fail("expected a boolean");
  return j_.get<bool>();
}

std::string JsonReader::string() const {
  if (!j_.is_string()) fail("expected a string");
  return j_.get<std::string>();
}

Eigen::MatrixXd JsonReader::matrix() const {
  expect_array();
  const std::size_t rows = j_.size();
  if (rows == 0) fail("empty matrix");
  const std::size_t cols = at(0).size();
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    const auto row = at(i);
    if (row.size() != cols) row.fail("ragged matrix row");
    for (std::size_t k = 0; k < cols; ++k) m(i, k) = row.at(k).number();
  }
  return m;
}

double JsonReader::number(const std::string& key, double fallback) const {
  return has(key) ? at(key).number() : fallback;
}

int JsonReader::integer(const std::string& key, int fallback) const {
  return has(key) ? at(key).integer() : fallback;
}

bool JsonReader::boolean(const std::string& key, bool fallback) const {
  return has(key) ? at(key).boolean() : fallback;
}

std::string JsonReader::string(const std::string& key, const std::string& fallback) const {
  return has(key) ? at(key).string() : fallback;
}

// ---------------------------------------------------------------------------
// Formatting

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

Json finite_or_string(double x) {
  if (std::isfinite(x)) return x;
  return format_double(x);
}

Json coefficient_to_json(const LoopCoefficient& c) {
  if (!c.series()) throw Error(ErrorCode::input, "callable coefficients cannot be serialized");
  const auto& s = *c.series();
  if (c.is_constant()) return Json{{"constant", to_json(s.c0)}};
  Json cos = Json::array();
  Json sin = Json::array();
  for (const auto& m : s.cos_terms) cos.push_back(to_json(m));
  for (const auto& m : s.sin_terms) sin.push_back(to_json(m));
  return Json{{"trig", {{"c0", to_json(s.c0)}, {"cos", cos}, {"sin", sin}}}};
}

LoopCoefficient coefficient_from_json(const JsonReader& r, int dim) {
  r.expect_object();
  r.only_keys({"scalar", "constant", "trig", "samples"});
  if (r.json().size() != 1) r.fail("give exactly one of scalar, constant, trig, samples");
  if (r.has("scalar")) return LoopCoefficient::scalar(dim, r.at("scalar").number());
  if (r.has("constant")) return LoopCoefficient::constant(r.at("constant").matrix());
  if (r.has("trig")) {
    const auto t = r.at("trig");
    t.only_keys({"c0", "cos", "sin"});
    TrigSeries s;
    s.c0 = t.has("c0") ? t.at("c0").matrix() : Eigen::MatrixXd::Zero(dim, dim);
    if (t.has("cos")) {
      for (std::size_t i = 0; i < t.at("cos").size(); ++i) s.cos_terms.push_back(t.at("cos").at(i).matrix());
    }
    if (t.has("sin")) {
      for (std::size_t i = 0; i < t.at("sin").size(); ++i) s.sin_terms.push_back(t.at("sin").at(i).matrix());
    }
    return LoopCoefficient::trig(std::move(s));
  }
  const auto samples = r.at("samples");
  std::vector<Eigen::MatrixXd> ms;
  for (std::size_t i = 0; i < samples.size(); ++i) ms.push_back(samples.at(i).matrix());
  return LoopCoefficient::from_samples(ms);
}

void wrap_validation(const JsonReader& r, const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::config) throw;
    r.fail(e.what());
  }
}

Truncation truncation_from_json(const JsonReader& r, Truncation t = {}) {
  if (!r.has("truncation")) return t;
  const auto tr = r.at("truncation");
  tr.only_keys({"s_max", "neck"});
  t.s_max = tr.number("s_max", t.s_max);
  t.neck = tr.number("neck", t.neck);
  return t;
}

Grid grid_from_json(const JsonReader& r, Grid g = {}) {
  if (!r.has("grid")) return g;
  const auto gr = r.at("grid");
  gr.only_keys({"s_nodes", "t_nodes"});
  g.s_nodes = gr.integer("s_nodes", g.s_nodes);
  g.t_nodes = gr.integer("t_nodes", g.t_nodes);
  return g;
}

std::pair<double, double> pair_from_json(const JsonReader& r, const std::string& key,
                                         std::pair<double, double> fallback) {
  if (!r.has(key)) return fallback;
  const auto a = r.at(key);
  if (a.size() != 2) a.fail("expected two numbers [minus, plus]");
  return {a.at(0).number(), a.at(1).number()};
}

}  // namespace

Json to_json(const Eigen::MatrixXd& m) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    out.push_back(row);
  }
  return out;
}

Json to_json(const LoopOperatorSpec& spec) {
  return Json{{"dim", spec.dim}, {"period", spec.period}, {"S", coefficient_to_json(spec.coeff)}};
}

Json to_json(const SpectrumReport& report) {
  Json values = Json::array();
  for (const auto& e : report.eigenvalues) {
    values.push_back({{"value", e.value}, {"multiplicity", e.multiplicity}, {"reliable", e.reliable}});
  }
  return Json{{"dim", report.dim},
              {"period", report.period},
              {"t_resolution", report.t_resolution},
              {"method", to_string(report.method)},
              {"zero_tolerance", report.zero_tolerance},
              {"eigenvalues", values}};
}

Json to_json(const CRProblem& p) {
  Json ends = Json::array();
  for (const auto& e : p.ends) {
    ends.push_back({{"sign", to_string(e.sign)},
                    {"weight", e.weight},
                    {"shift_dims", e.shift_dims},
                    {"cutoff", e.cutoff},
                    {"asymptotic", to_json(e.asymptotic)}});
  }
  Json knots = Json::array();
  for (const auto& k : p.coeff_knots) knots.push_back({{"s", k.s}, {"S", coefficient_to_json(k.coeff)}});
  Json wk = Json::array();
  for (const auto& k : p.weight_knots) wk.push_back({{"s", k.s}, {"rate", k.rate}});
  return Json{{"domain_kind", to_string(p.domain_kind)},
              {"fiber", to_string(p.fiber)},
              {"dim", p.dim},
              {"ends", ends},
              {"truncation", {{"s_max", p.truncation.s_max}, {"neck", p.truncation.neck}}},
              {"grid", {{"s_nodes", p.grid.s_nodes}, {"t_nodes", p.grid.t_nodes}}},
              {"decay_rate", p.decay_rate},
              {"coefficient_knots", knots},
              {"weight_knots", wk}};
}

Json to_json(const TolerancePolicy& policy) {
  return Json{{"rel_threshold", policy.rel_threshold},
              {"min_gap", policy.min_gap},
              {"strict", policy.strict},
              {"solver", to_string(policy.solver)},
              {"seed", policy.seed}};
}

Json to_json(const IndexReport& r) {
  Json sv = Json::array();
  for (double s : r.singular_values) sv.push_back(s);
  return Json{{"dim_ker", r.dim_ker},
              {"dim_coker", r.dim_coker},
              {"index", r.index},
              {"singular_values", sv},
              {"gap_ratio", finite_or_string(r.gap_ratio)},
              {"decisive", r.decisive},
              {"method", to_string(r.method)},
              {"grid_tag", r.grid_tag},
              {"sigma_max", r.sigma_max},
              {"threshold", r.threshold},
              {"solver", to_string(r.solver)},
              {"tolerance_policy", to_json(r.tolerance_policy)}};
}

Json to_json(const ConfigurationGraph& g) {
  auto orbit_list = [](const std::vector<OrbitLabel>& os) {
    Json a = Json::array();
    for (const auto& o : os) a.push_back({{"id", o.id}, {"action", o.action}});
    return a;
  };
  Json comps = Json::array();
  for (const auto& c : g.components) {
    Json cj{{"neg", orbit_list(c.neg_ends)},
            {"pos", orbit_list(c.pos_ends)},
            {"ind_L2", c.ind_L2},
            {"trivial", c.trivial},
            {"target_level", c.target_level}};
    if (c.domain_symmetry_dim) cj["domain_symmetry_dim"] = *c.domain_symmetry_dim;
    comps.push_back(cj);
  }
  Json seams = Json::array();
  for (const auto& s : g.seams) {
    seams.push_back(Json::array({s.component_a, s.pos_end, s.component_b, s.neg_end}));
  }
  return Json{{"components", comps}, {"seams", seams}};
}

Json to_json(const AdditivityReport& rep) {
  Json rows = Json::array();
  for (const auto& r : rep.rows) {
    rows.push_back({{"tau", r.tau},
                    {"ind_u", r.ind_u},
                    {"ind_w", r.ind_w},
                    {"ind_glued", r.ind_glued},
                    {"decisive", r.decisive},
                    {"stability_constant", r.stability_constant},
                    {"max_residual", r.max_residual},
                    {"scaled_residual", r.scaled_residual},
                    {"dim_ker_glued", r.dim_ker_glued},
                    {"approx_kernel_dim", r.approx_kernel_dim},
                    {"gram_condition", finite_or_string(r.gram_condition)}});
  }
  return Json{{"rows", rows},
              {"decay_rate", rep.decay_rate},
              {"additive", rep.additive},
              {"residual_decay", rep.residual_decay},
              {"stability_plateau", rep.stability_plateau},
              {"dimension_match", rep.dimension_match}};
}

LoopOperatorSpec loop_spec_from_json(const JsonReader& r) {
  r.only_keys({"dim", "period", "S"});
  LoopOperatorSpec spec;
  spec.dim = r.integer("dim", 2);
  spec.period = r.number("period", 1.0);
  spec.coeff = coefficient_from_json(r.at("S"), spec.dim);
  wrap_validation(r, [&] { spec.validate(); });
  return spec;
}

CRProblem problem_from_json(const JsonReader& r) {
  r.expect_object();
  CRProblem p;
  if (r.has("builder")) {
    const std::string b = r.at("builder").string();
    const Truncation tr = truncation_from_json(r);
    const Grid grid = grid_from_json(r);
    if (b == "trivial_cylinder") {
      r.only_keys({"builder", "weights", "shifts", "truncation", "grid"});
      const auto w = pair_from_json(r, "weights", {1.0, 1.0});
      const auto s = pair_from_json(r, "shifts", {0.0, 0.0});
      wrap_validation(r, [&] {
        p = build_trivial_cylinder(w.first, w.second, static_cast<int>(s.first),
                                   static_cast<int>(s.second), tr, grid);
      });
    } else if (b == "contact_fiber_cylinder") {
      r.only_keys({"builder", "minus", "plus", "waypoints", "weights", "truncation", "grid"});
      const auto minus = loop_spec_from_json(r.at("minus"));
      const auto plus = loop_spec_from_json(r.at("plus"));
      std::vector<LoopOperatorSpec> way;
      if (r.has("waypoints")) {
        for (std::size_t i = 0; i < r.at("waypoints").size(); ++i) {
          way.push_back(loop_spec_from_json(r.at("waypoints").at(i)));
        }
      }
      const auto w = pair_from_json(r, "weights", {0.0, 0.0});
      wrap_validation(r, [&] {
        p = build_contact_fiber_cylinder(minus, plus, way, tr, grid, w.first, w.second);
      });
    } else if (b == "plane") {
      r.only_keys({"builder", "weight", "shift_dims", "truncation", "grid"});
      const double w = r.number("weight", 1.0);
      const int k = r.integer("shift_dims", 0);
      wrap_validation(r, [&] { p = build_plane(w, k, tr, grid); });
    } else {
      r.at("builder").fail("unknown builder '" + b + "'");
    }
    return p;
  }
  r.only_keys({"domain_kind", "fiber", "dim", "ends", "truncation", "grid", "decay_rate",
               "coefficient_knots", "weight_knots"});
  wrap_validation(r.at("domain_kind"), [&] {
    p.domain_kind = domain_kind_from_string(r.at("domain_kind").string());
  });
  wrap_validation(r, [&] { p.fiber = fiber_from_string(r.string("fiber", "complex_line")); });
  p.dim = r.integer("dim", 2);
  p.truncation = truncation_from_json(r);
  p.grid = grid_from_json(r);
  p.decay_rate = r.number("decay_rate", 1.0);
  const auto ends = r.at("ends");
  for (std::size_t i = 0; i < ends.size(); ++i) {
    const auto e = ends.at(i);
    e.only_keys({"sign", "weight", "shift_dims", "cutoff", "asymptotic"});
    EndSpec spec;
    wrap_validation(e, [&] { spec.sign = end_sign_from_string(e.at("sign").string()); });
    spec.weight = e.number("weight", 0.0);
    spec.shift_dims = e.integer("shift_dims", 0);
    spec.cutoff = e.number("cutoff", p.truncation.neck);
    spec.asymptotic = e.has("asymptotic") ? loop_spec_from_json(e.at("asymptotic"))
                                          : LoopOperatorSpec::zero(p.dim);
    p.ends.push_back(spec);
  }
  if (r.has("coefficient_knots")) {
    const auto ks = r.at("coefficient_knots");
    for (std::size_t i = 0; i < ks.size(); ++i) {
      const auto k = ks.at(i);
      k.only_keys({"s", "S"});
      p.coeff_knots.push_back({k.at("s").number(), coefficient_from_json(k.at("S"), p.dim)});
    }
  } else {
    p.coeff_knots = {{0.0, LoopCoefficient::scalar(p.dim, 0.0)}};
  }
  if (r.has("weight_knots")) {
    const auto ks = r.at("weight_knots");
    for (std::size_t i = 0; i < ks.size(); ++i) {
      const auto k = ks.at(i);
      k.only_keys({"s", "rate"});
      p.weight_knots.push_back({k.at("s").number(), k.at("rate").number()});
    }
  } else if (p.domain_kind == DomainKind::plane) {
    p.weight_knots = {{0.0, p.ends.empty() ? 0.0 : p.ends[0].weight_rate()}};
  } else {
    const double n = p.truncation.neck;
    double wm = 0.0;
    double wp = 0.0;
    for (const auto& e : p.ends) (e.sign == EndSign::negative ? wm : wp) = e.weight_rate();
    p.weight_knots = {{-n, wm}, {n, wp}};
  }
  wrap_validation(r, [&] { p.validate(); });
  return p;
}

TolerancePolicy policy_from_json(const JsonReader& r) {
  r.only_keys({"rel_threshold", "min_gap", "strict", "solver", "seed"});
  TolerancePolicy p;
  p.rel_threshold = r.number("rel_threshold", p.rel_threshold);
  p.min_gap = r.number("min_gap", p.min_gap);
  p.strict = r.boolean("strict", p.strict);
  wrap_validation(r, [&] { p.solver = solver_method_from_string(r.string("solver", "auto")); });
  if (r.has("seed")) p.seed = static_cast<std::uint64_t>(r.at("seed").integer());
  return p;
}

ConfigurationGraph graph_from_json(const JsonReader& r) {
  r.only_keys({"components", "seams"});
  ConfigurationGraph g;
  auto orbit_list = [](const JsonReader& a) {
    std::vector<OrbitLabel> out;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const auto o = a.at(i);
      o.only_keys({"id", "action"});
      out.push_back({o.at("id").string(), o.number("action", 1.0)});
    }
    return out;
  };
  const auto comps = r.at("components");
  for (std::size_t i = 0; i < comps.size(); ++i) {
    const auto c = comps.at(i);
    c.only_keys({"neg", "pos", "ind_L2", "trivial", "domain_symmetry_dim", "target_level"});
    Component comp;
    if (c.has("neg")) comp.neg_ends = orbit_list(c.at("neg"));
    if (c.has("pos")) comp.pos_ends = orbit_list(c.at("pos"));
    comp.ind_L2 = c.integer("ind_L2", 0);
    comp.trivial = c.boolean("trivial", false);
    if (c.has("domain_symmetry_dim")) comp.domain_symmetry_dim = c.at("domain_symmetry_dim").integer();
    comp.target_level = c.integer("target_level", 0);
    g.components.push_back(comp);
  }
  if (r.has("seams")) {
    const auto seams = r.at("seams");
    for (std::size_t i = 0; i < seams.size(); ++i) {
      const auto s = seams.at(i);
      if (s.size() != 4) s.fail("seam is [component_a, pos_end, component_b, neg_end]");
      g.seams.push_back({s.at(0).integer(), s.at(1).integer(), s.at(2).integer(), s.at(3).integer()});
    }
  }
  wrap_validation(r, [&] { g.validate(); });
  return g;
}

// ---------------------------------------------------------------------------
// CSV and files

CsvWriter::CsvWriter(std::vector<std::string> header) : columns_(header.size()) {
  for (const auto& h : header) cell(h);
  end_row();
}

CsvWriter& CsvWriter::cell(const std::string& s) {
  if (in_row_ > 0) out_ += ',';
  const bool quote = s.find_first_of(",\"\n") != std::string::npos;
  if (quote) {
    out_ += '"';
    for (char ch : s) {
      if (ch == '"') out_ += '"';
      out_ += ch;
    }
    out_ += '"';
  } else {
    out_ += s;
  }
  ++in_row_;
  return *this;
}

CsvWriter& CsvWriter::cell(double x) { return cell(format_double(x)); }
CsvWriter& CsvWriter::cell(int x) { return cell(std::to_string(x)); }
CsvWriter& CsvWriter::cell(bool x) { return cell(std::string(x ? "true" : "false")); }

void CsvWriter::end_row() {
  if (in_row_ != columns_) {
    throw Error(ErrorCode::input, "CSV row has " + std::to_string(in_row_) + " cells, expected " +
                                      std::to_string(columns_));
  }
  out_ += '\n';
  in_row_ = 0;
}

std::string CsvWriter::str() const { return out_; }

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error(ErrorCode::input, "cannot write " + tmp.string());
    os << content;
    os.flush();
    if (!os) throw Error(ErrorCode::input, "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error(ErrorCode::input, "rename to " + path.string() + " failed: " + ec.message());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::config, "cannot read " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace crlab
