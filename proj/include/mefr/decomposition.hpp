#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "mefr/graph.hpp"
#include "mefr/oracle.hpp"

namespace mefr {

struct Community {
  std::string id;
  std::vector<NodeIndex> members; // ascending

  bool operator==(const Community &) const = default;
};

// Id of the catch-all community holding nodes a method leaves unassigned.
// It is never offered as a nearest community.
inline constexpr std::string_view kUnassignedCommunity = "__unassigned__";

struct Decomposition {
  std::string graph_id;
  std::string method;
  bool overlapping = false;
  std::vector<Community> communities;

  bool operator==(const Decomposition &) const = default;
};

// Checks member ranges, non-empty communities, unique ids, and coverage:
// every node in some community, and for non-overlapping decompositions in
// exactly one. Throws Coverage or Schema.
void validate_decomposition(const Decomposition &d, const FunctionCallGraph &g);

// Regions become communities named by their entry; unassigned nodes go to
// the catch-all community. Verbatim partitions are marked overlapping.
Decomposition decomposition_from_mefrs(const MefrPartition &p, const FunctionCallGraph &g);

// "decomp/1" documents.
std::string to_decomp_json(const Decomposition &d, const FunctionCallGraph &g);
Decomposition parse_decomp_json(std::string_view text, const FunctionCallGraph &g);
Decomposition load_external_decomposition(const std::filesystem::path &path,
                                          const FunctionCallGraph &g);

} // namespace mefr
