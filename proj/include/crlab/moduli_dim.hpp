#pragma once

// Dimension bookkeeping for configurations of multi-end components: local
// (parameterized) dimensions, symmetry counting and codimensions of
// degenerations.
//
// Rules:
//   component_dim     = (B0 ? 1 : 2) + ind_L2, B0 for a trivial component on a seam
//   configuration_dim = sum component_dim - #seams
//   symmetry          = sum domain_symmetry_dim - A, where A is a maximum matching
//                       of seams to adjacent rotational components (at most two
//                       ends, or B0 trivial): a seam at such a component fixes its
//                       rotation against the neighbour's
//   target count      = sum over levels of the map-components on the level,
//                       B0 trivial components excluded
//   unparameterized   = configuration_dim - symmetry - target count

#include <optional>
#include <random>
#include <string>
#include <vector>

namespace crlab {

struct OrbitLabel {
  std::string id;
  double action = 1.0;

  bool operator==(const OrbitLabel&) const = default;
};

struct Component {
  std::vector<OrbitLabel> neg_ends;
  std::vector<OrbitLabel> pos_ends;
  int ind_L2 = 0;
  bool trivial = false;
  std::optional<int> domain_symmetry_dim;
  int target_level = 0;

  int end_count() const { return static_cast<int>(neg_ends.size() + pos_ends.size()); }
  bool operator==(const Component&) const = default;
};

struct Seam {
  int component_a = 0;  // carries the positive end
  int pos_end = 0;
  int component_b = 0;  // carries the negative end
  int neg_end = 0;

  bool operator==(const Seam&) const = default;
};

struct ConfigurationGraph {
  std::vector<Component> components;
  std::vector<Seam> seams;

  /// Number of distinct target levels in use.
  int levels() const;
  /// Throws graph error on mismatched seams, reused ends or a cycle.
  void validate() const;
  bool operator==(const ConfigurationGraph&) const = default;
};

/// Presets: 6 - 2 * ends (cylinder 2, plane 4, pair of pants 0); B0 trivial 1.
int preset_domain_symmetry(const Component& c, bool on_seam);
ConfigurationGraph with_preset_symmetries(ConfigurationGraph g);

/// b0: the component is trivial and reduced to B0 by a seam.
int component_dim(const Component& c, bool b0 = false);
bool uses_b0(const ConfigurationGraph& g, int component);
int configuration_dim(const ConfigurationGraph& g);
int symmetry_dim(const ConfigurationGraph& g);
int target_symmetry_count(const ConfigurationGraph& g);
int unparameterized_dim(const ConfigurationGraph& g);
int codimension(const ConfigurationGraph& degenerate, const ConfigurationGraph& smooth);
int total_ind_L2(const ConfigurationGraph& g);

/// Splice a trivial B0 component into seam `seam`; it lands on the level of
/// the negative-end component.
ConfigurationGraph splice_trivial(const ConfigurationGraph& g, int seam);

struct DegenerationCase {
  std::string name;
  ConfigurationGraph degenerate;
  ConfigurationGraph smooth;
  int expected_codimension = 0;
};

/// Canonical cases: one bubble, two-level break, the multi-end versions, and
/// the multi-end/multi-end break.
std::vector<DegenerationCase> canonical_cases();

/// Same topology as `base` with ind_L2 redistributed at random (and ends
/// counts varied for multi-end families); budgets of the pair stay equal.
DegenerationCase randomized_case(const std::string& family, std::mt19937_64& rng);
std::vector<std::string> degeneration_families();

}  // namespace crlab
