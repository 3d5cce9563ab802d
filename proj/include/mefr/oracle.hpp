#pragma once

// Boundary-function identification and Minimal Equivalent Function Region
// (MEFR) construction.

#include <span>
#include <string>
#include <vector>

#include "mefr/graph.hpp"
#include "mefr/mapping.hpp"
#include "mefr/ratio.hpp"

namespace mefr {

struct BoundarySet {
  std::string graph_id;
  std::vector<BinaryFunctionId> boundary; // address order
};

struct CorpusBoundaries {
  SourceSet never_inlined;
  std::vector<BoundarySet> per_graph; // parallel to the input maps
};

// A source function is never inlined when, in every setting, the only
// binary functions whose sf_set contains it are those whose OSF it is.
// Boundary functions are the binary functions whose resolved OSF is never
// inlined. Throws SingleSetting for fewer than two maps.
CorpusBoundaries identify_boundaries(std::span<const Binary2SourceMap> maps);

// Same boundaries read off the pairwise classifications: functions holding
// an identical or root-equivalent mapping whose OSF never lies in the
// shared sources of a relevant mapping. Kept as an independent route.
CorpusBoundaries identify_boundaries_from_mappings(
    std::span<const Binary2SourceMap> maps,
    std::span<const MappingClassification> classifications);

std::vector<NodeIndex> boundary_nodes(const FunctionCallGraph &g, const BoundarySet &b);

enum class MefrMode { Verbatim, Partition };

std::string_view to_string(MefrMode m);
MefrMode parse_mefr_mode(std::string_view s);

struct Mefr {
  NodeIndex entry = 0;
  std::vector<NodeIndex> members; // entry first, then discovery order

  bool operator==(const Mefr &) const = default;
};

struct MefrPartition {
  std::string graph_id;
  MefrMode mode = MefrMode::Partition;
  std::vector<Mefr> regions; // ordered by entry address
  std::vector<NodeIndex> unassigned;
  std::size_t contested_count = 0; // nodes claimed by more than one region

  bool operator==(const MefrPartition &) const = default;
};

// Work counters for the region BFS: frontier pops and member insertions
// per region.
struct TraversalStats {
  std::vector<std::size_t> pops;
  std::vector<std::size_t> insertions;
};

// Verbatim: each boundary function seeds a region that collects everything
// reachable through non-boundary functions; regions may share callees.
// Partition: shared nodes go to the region whose entry has the lowest
// address. Nodes reachable from no boundary function are unassigned.
MefrPartition construct_mefrs(const FunctionCallGraph &g, std::span<const NodeIndex> boundary,
                              MefrMode mode, TraversalStats *stats = nullptr);

// Union of member sf_sets.
SourceSet region_sources(const Mefr &region, const FunctionCallGraph &g,
                         const Binary2SourceMap &b2s);

struct MefrSide {
  const MefrPartition &partition;
  const FunctionCallGraph &graph;
  const Binary2SourceMap &b2s;
};

struct RegionCheck {
  SourceFunctionKey osf;
  std::string left_entry, right_entry;
  Ratio jaccard;
  SourceSet only_left, only_right;
  std::vector<std::string> non_minimal_left, non_minimal_right;

  bool equivalent() const { return only_left.empty() && only_right.empty(); }
  bool minimal() const { return non_minimal_left.empty() && non_minimal_right.empty(); }
};

struct ValidationReport {
  std::vector<RegionCheck> regions; // ordered by OSF
  std::vector<std::string> unmatched_left, unmatched_right;

  bool all_equivalent() const;
  bool all_minimal() const;
};

// Pairs regions across two settings by entry OSF, compares their source
// sets, and checks minimality: dropping any non-entry member must shrink
// the shared source set, or leave a member unreachable from the entry, or
// leave a remaining member calling the dropped one.
ValidationReport validate_mefr_pair(const MefrSide &left, const MefrSide &right);

// "mefr/1" documents. Parsing needs the graph to resolve names.
std::string to_mefr_json(const MefrPartition &p, const FunctionCallGraph &g);
MefrPartition parse_mefr_json(std::string_view text, const FunctionCallGraph &g);

std::string to_validation_json(const ValidationReport &r, const std::string &left_label,
                               const std::string &right_label);

} // namespace mefr
