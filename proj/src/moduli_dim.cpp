#include "crlab/moduli_dim.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>

#include "crlab/errors.hpp"

namespace crlab {

namespace {

std::vector<int> seam_count(const ConfigurationGraph& g) {
  std::vector<int> n(g.components.size(), 0);
  for (const auto& s : g.seams) {
    ++n[s.component_a];
    ++n[s.component_b];
  }
  return n;
}

bool rotational(const ConfigurationGraph& g, int c, bool b0) {
  return b0 || g.components[c].end_count() <= 2;
}

// Kuhn's augmenting paths: seams on the left, components on the right.
int max_matching(const ConfigurationGraph& g) {
  const int nc = static_cast<int>(g.components.size());
  std::vector<char> rot(nc);
  for (int c = 0; c < nc; ++c) rot[c] = rotational(g, c, uses_b0(g, c));
  std::vector<int> owner(nc, -1);
  std::function<bool(int, std::vector<char>&)> augment = [&](int seam, std::vector<char>& seen) {
    for (int c : {g.seams[seam].component_a, g.seams[seam].component_b}) {
      if (!rot[c] || seen[c]) continue;
      seen[c] = 1;
      if (owner[c] < 0 || augment(owner[c], seen)) {
        owner[c] = seam;
        return true;
      }
    }
    return false;
  };
  int matched = 0;
  for (int s = 0; s < static_cast<int>(g.seams.size()); ++s) {
    std::vector<char> seen(nc, 0);
    if (augment(s, seen)) ++matched;
  }
  return matched;
}

OrbitLabel orbit(const std::string& id, double action) { return {id, action}; }

Component make(std::vector<OrbitLabel> neg, std::vector<OrbitLabel> pos, int ind, int level) {
  Component c;
  c.neg_ends = std::move(neg);
  c.pos_ends = std::move(pos);
  c.ind_L2 = ind;
  c.target_level = level;
  return c;
}

std::vector<OrbitLabel> orbits(const std::string& prefix, int count, double base) {
  std::vector<OrbitLabel> out;
  for (int i = 0; i < count; ++i) out.push_back(orbit(prefix + std::to_string(i), base + i));
  return out;
}

// Multi-end degeneration builders.  `ind` are the component ind_L2 values.
DegenerationCase one_bubble(int k_plane, int k_rest) {
  DegenerationCase c;
  c.name = "one_bubble";
  const auto xm = orbit("x_minus", 3.0);
  const auto xp = orbit("x_plus", 5.0);
  const auto x = orbit("x", 1.0);
  c.degenerate.components = {make({}, {x}, k_plane, 0), make({xm, x}, {xp}, k_rest, 0)};
  c.degenerate.seams = {{0, 0, 1, 1}};
  c.smooth.components = {make({xm}, {xp}, k_plane + k_rest, 0)};
  c.expected_codimension = 1;
  return c;
}

DegenerationCase two_level_break(int k_low, int k_high) {
  DegenerationCase c;
  c.name = "two_level_break";
  const auto xm = orbit("x_minus", 1.0);
  const auto x = orbit("x", 2.0);
  const auto xp = orbit("x_plus", 4.0);
  c.degenerate.components = {make({xm}, {x}, k_low, 0), make({x}, {xp}, k_high, 1)};
  c.degenerate.seams = {{0, 0, 1, 0}};
  c.smooth.components = {make({xm}, {xp}, k_low + k_high, 0)};
  c.expected_codimension = 1;
  return c;
}

DegenerationCase multi_end_bubble(int neg, int pos, int k_plane, int k_rest) {
  DegenerationCase c;
  c.name = "multi_end_bubble";
  const auto negs = orbits("y_minus_", neg, 1.0);
  const auto poss = orbits("y_plus_", pos, 20.0);
  const auto x = orbit("x", 0.5);
  auto negs_plus = negs;
  negs_plus.push_back(x);
  c.degenerate.components = {make({}, {x}, k_plane, 0), make(negs_plus, poss, k_rest, 0)};
  c.degenerate.seams = {{0, 0, 1, neg}};
  c.smooth.components = {make(negs, poss, k_plane + k_rest, 0)};
  c.expected_codimension = 1;
  return c;
}

DegenerationCase multi_end_break(int neg, int pos, int k_multi, int k_cyl) {
  DegenerationCase c;
  c.name = "multi_end_break";
  const auto negs = orbits("y_minus_", neg, 1.0);
  auto poss = orbits("y_plus_", pos, 20.0);
  const auto x = orbit("x", 10.0);
  const auto top = poss.back();
  auto low_pos = poss;
  low_pos.back() = x;
  c.degenerate.components = {make(negs, low_pos, k_multi, 0), make({x}, {top}, k_cyl, 1)};
  c.degenerate.seams = {{0, pos - 1, 1, 0}};
  c.smooth.components = {make(negs, poss, k_multi + k_cyl, 0)};
  c.expected_codimension = 1;
  return c;
}

DegenerationCase multi_multi_break(int neg_a, int pos_a, int neg_b, int pos_b, int k_a, int k_b) {
  DegenerationCase c;
  c.name = "multi_multi_break";
  const auto na = orbits("a_minus_", neg_a, 1.0);
  auto pa = orbits("a_plus_", pos_a - 1, 30.0);
  auto nb = orbits("b_minus_", neg_b - 1, 40.0);
  const auto pb = orbits("b_plus_", pos_b, 60.0);
  const auto x = orbit("x", 25.0);
  auto pa_full = pa;
  pa_full.push_back(x);
  auto nb_full = std::vector<OrbitLabel>{x};
  nb_full.insert(nb_full.end(), nb.begin(), nb.end());
  c.degenerate.components = {make(na, pa_full, k_a, 0), make(nb_full, pb, k_b, 1)};
  c.degenerate.seams = {{0, pos_a - 1, 1, 0}};
  auto smooth_neg = na;
  smooth_neg.insert(smooth_neg.end(), nb.begin(), nb.end());
  auto smooth_pos = pa;
  smooth_pos.insert(smooth_pos.end(), pb.begin(), pb.end());
  c.smooth.components = {make(smooth_neg, smooth_pos, k_a + k_b, 0)};
  c.expected_codimension = 2;
  return c;
}

DegenerationCase finish(DegenerationCase c) {
  c.degenerate = with_preset_symmetries(std::move(c.degenerate));
  c.smooth = with_preset_symmetries(std::move(c.smooth));
  return c;
}

}  // namespace

int ConfigurationGraph::levels() const {
  std::set<int> lv;
  for (const auto& c : components) lv.insert(c.target_level);
  return static_cast<int>(lv.size());
}

void ConfigurationGraph::validate() const {
  if (components.empty()) throw Error(ErrorCode::graph, "graph has no components");
  for (std::size_t i = 0; i < components.size(); ++i) {
    const auto& c = components[i];
    if (c.end_count() == 0) {
      throw Error(ErrorCode::graph, "component " + std::to_string(i) + " has no ends");
    }
    for (const auto* list : {&c.neg_ends, &c.pos_ends}) {
      for (const auto& o : *list) {
        if (!(o.action > 0.0)) {
          throw Error(ErrorCode::graph, "orbit '" + o.id + "' needs a positive action");
        }
      }
    }
    if (c.trivial && (c.neg_ends.size() != 1 || c.pos_ends.size() != 1 ||
                      !(c.neg_ends[0] == c.pos_ends[0]) || c.ind_L2 != 0)) {
      throw Error(ErrorCode::graph, "trivial component " + std::to_string(i) +
                                        " must join one orbit to itself with ind_L2 = 0");
    }
  }
  const int n = static_cast<int>(components.size());
  std::set<std::pair<int, int>> used_pos;
  std::set<std::pair<int, int>> used_neg;
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
  for (std::size_t k = 0; k < seams.size(); ++k) {
    const auto& s = seams[k];
    std::ostringstream where;
    where << "seam " << k << ": ";
    if (s.component_a < 0 || s.component_a >= n || s.component_b < 0 || s.component_b >= n) {
      throw Error(ErrorCode::graph, where.str() + "component index out of range");
    }
    const auto& a = components[s.component_a];
    const auto& b = components[s.component_b];
    if (s.pos_end < 0 || s.pos_end >= static_cast<int>(a.pos_ends.size()) || s.neg_end < 0 ||
        s.neg_end >= static_cast<int>(b.neg_ends.size())) {
      throw Error(ErrorCode::graph, where.str() + "end index out of range");
    }
    if (!(a.pos_ends[s.pos_end] == b.neg_ends[s.neg_end])) {
      throw Error(ErrorCode::graph, where.str() + "orbits '" + a.pos_ends[s.pos_end].id + "' and '" +
                                        b.neg_ends[s.neg_end].id + "' differ in id or action");
    }
    if (!used_pos.insert({s.component_a, s.pos_end}).second ||
        !used_neg.insert({s.component_b, s.neg_end}).second) {
      throw Error(ErrorCode::graph, where.str() + "end already used by another seam");
    }
    const int ra = find(s.component_a);
    const int rb = find(s.component_b);
    if (ra == rb) throw Error(ErrorCode::graph, where.str() + "seams close a loop");
    parent[ra] = rb;
  }
}

int preset_domain_symmetry(const Component& c, bool on_seam) {
  if (c.trivial && on_seam) return 1;
  return 6 - 2 * c.end_count();
}

ConfigurationGraph with_preset_symmetries(ConfigurationGraph g) {
  const auto n = seam_count(g);
  for (std::size_t i = 0; i < g.components.size(); ++i) {
    g.components[i].domain_symmetry_dim = preset_domain_symmetry(g.components[i], n[i] > 0);
  }
  return g;
}

int component_dim(const Component& c, bool b0) { return (b0 ? 1 : 2) + c.ind_L2; }

bool uses_b0(const ConfigurationGraph& g, int component) {
  if (!g.components[component].trivial) return false;
  for (const auto& s : g.seams) {
    if (s.component_a == component || s.component_b == component) return true;
  }
  return false;
}

int configuration_dim(const ConfigurationGraph& g) {
  g.validate();
  int dim = 0;
  for (int i = 0; i < static_cast<int>(g.components.size()); ++i) {
    dim += component_dim(g.components[i], uses_b0(g, i));
  }
  return dim - static_cast<int>(g.seams.size());
}

int symmetry_dim(const ConfigurationGraph& g) {
  g.validate();
  int sym = 0;
  for (std::size_t i = 0; i < g.components.size(); ++i) {
    if (!g.components[i].domain_symmetry_dim) {
      throw Error(ErrorCode::input, "component " + std::to_string(i) + " has no domain_symmetry_dim");
    }
    sym += *g.components[i].domain_symmetry_dim;
  }
  return sym - max_matching(g);
}

int target_symmetry_count(const ConfigurationGraph& g) {
  int count = 0;
  for (int i = 0; i < static_cast<int>(g.components.size()); ++i) {
    if (!uses_b0(g, i)) ++count;
  }
  return count;
}

int unparameterized_dim(const ConfigurationGraph& g) {
  return configuration_dim(g) - symmetry_dim(g) - target_symmetry_count(g);
}

int total_ind_L2(const ConfigurationGraph& g) {
  int t = 0;
  for (const auto& c : g.components) t += c.ind_L2;
  return t;
}

int codimension(const ConfigurationGraph& degenerate, const ConfigurationGraph& smooth) {
  if (total_ind_L2(degenerate) != total_ind_L2(smooth)) {
    std::ostringstream msg;
    msg << "ind_L2 budgets differ: " << total_ind_L2(degenerate) << " vs " << total_ind_L2(smooth);
    throw Error(ErrorCode::incompatible_ends, msg.str());
  }
  return unparameterized_dim(smooth) - unparameterized_dim(degenerate);
}

ConfigurationGraph splice_trivial(const ConfigurationGraph& g, int seam) {
  g.validate();
  if (seam < 0 || seam >= static_cast<int>(g.seams.size())) {
    throw Error(ErrorCode::graph, "seam index out of range");
  }
  ConfigurationGraph out = g;
  const Seam s = g.seams[seam];
  const OrbitLabel x = g.components[s.component_a].pos_ends[s.pos_end];
  Component t;
  t.neg_ends = {x};
  t.pos_ends = {x};
  t.trivial = true;
  t.target_level = g.components[s.component_b].target_level;
  const int ti = static_cast<int>(out.components.size());
  out.components.push_back(t);
  out.seams[seam] = {s.component_a, s.pos_end, ti, 0};
  out.seams.push_back({ti, 0, s.component_b, s.neg_end});
  // Keep explicit symmetry data consistent for the new component.
  if (std::all_of(g.components.begin(), g.components.end(),
                  [](const Component& c) { return c.domain_symmetry_dim.has_value(); })) {
    out.components[ti].domain_symmetry_dim = preset_domain_symmetry(t, true);
  }
  return out;
}

std::vector<DegenerationCase> canonical_cases() {
  return {finish(one_bubble(0, 0)), finish(two_level_break(0, 0)),
          finish(multi_end_bubble(1, 2, 0, 0)), finish(multi_end_break(1, 2, 0, 0)),
          finish(multi_multi_break(1, 2, 1, 2, 0, 0))};
}

std::vector<std::string> degeneration_families() {
  return {"one_bubble", "two_level_break", "multi_end_bubble", "multi_end_break",
          "multi_multi_break"};
}

DegenerationCase randomized_case(const std::string& family, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> ind(-6, 6);
  std::uniform_int_distribution<int> ends(0, 3);
  const int k1 = ind(rng);
  const int k2 = ind(rng);
  if (family == "one_bubble") return finish(one_bubble(k1, k2));
  if (family == "two_level_break") return finish(two_level_break(k1, k2));
  // Multi-end: at least three ends on each multi-ended component.
  auto split = [&](int min_total, int& neg, int& pos, int min_pos) {
    do {
      neg = ends(rng);
      pos = min_pos + ends(rng);
    } while (neg + pos < min_total);
  };
  int neg = 0;
  int pos = 0;
  if (family == "multi_end_bubble") {
    split(3, neg, pos, 1);
    return finish(multi_end_bubble(neg, pos, k1, k2));
  }
  if (family == "multi_end_break") {
    split(3, neg, pos, 1);
    return finish(multi_end_break(neg, pos, k1, k2));
  }
  if (family == "multi_multi_break") {
    int na = 0;
    int pa = 0;
    int nb = 0;
    int pb = 0;
    split(3, na, pa, 1);
    std::uniform_int_distribution<int> e(0, 3);
    do {
      nb = 1 + e(rng);
      pb = e(rng);
    } while (nb + pb < 3);
    return finish(multi_multi_break(na, pa, nb, pb, k1, k2));
  }
  throw Error(ErrorCode::input, "unknown degeneration family '" + family + "'");
}

}  // namespace crlab
