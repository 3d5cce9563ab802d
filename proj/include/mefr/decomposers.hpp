#pragma once

// Reference decomposition methods scored against the oracle.

#include <optional>
#include <span>
#include <vector>

#include "mefr/decomposition.hpp"

namespace mefr {

// One community per node, named after it.
Decomposition decompose_singleton(const FunctionCallGraph &g);

struct ModularityOptions {
  std::optional<std::size_t> max_size;
  bool unit_weights = false; // weight 1 per adjacent pair instead of call multiplicity
};

// Greedy agglomerative modularity maximization (Clauset-Newman-Moore) on
// the undirected projection; self calls are ignored. Each step applies the
// best positive-gain merge that respects max_size. Ties go to the pair whose
// lowest-address members are smallest. Communities are named after their
// lowest-address member. When trace is given it receives the modularity
// before any merge and after each accepted one.
Decomposition decompose_modularity(const FunctionCallGraph &g, const ModularityOptions &opts = {},
                                   std::vector<double> *trace = nullptr);

// Modularity of a non-overlapping decomposition under the same projection.
double modularity(const FunctionCallGraph &g, const Decomposition &d, bool unit_weights = false);

// One overlapping community per node: its undirected neighborhood within
// radius hops. radius 0 is a Precondition error.
Decomposition decompose_expander(const FunctionCallGraph &g, std::size_t radius);

// Directed multi-source BFS from the anchors up to hops (unbounded when
// nullopt), never passing through another anchor. Each node joins its
// nearest anchor, ties to the anchor with the lower address. Unreached
// nodes go to the catch-all community.
Decomposition decompose_anchor_extension(const FunctionCallGraph &g,
                                         std::span<const NodeIndex> anchors,
                                         std::optional<std::size_t> hops);

} // namespace mefr
