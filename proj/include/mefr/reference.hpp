#pragma once

// Serial, unoptimized counterparts of the parallel kernels. Tests compare
// the two; the benchmark times them against each other.

#include <span>

#include "mefr/mapping.hpp"
#include "mefr/metrics.hpp"
#include "mefr/oracle.hpp"

namespace mefr::reference {

// Classifies every (left, right) pair.
MappingClassification build_b2b(const Binary2SourceMap &left, const Binary2SourceMap &right);

// The region BFS exactly as a queue of boundary functions and a frontier
// queue that takes every successor of each admitted node. s_dequeues, when
// given, receives the total number of frontier dequeues.
MefrPartition construct_mefrs(const FunctionCallGraph &g, std::span<const NodeIndex> boundary,
                              MefrMode mode, std::size_t *s_dequeues = nullptr);

// Scans every community for every region.
MetricReport evaluate_decomposition(const MefrPartition &oracle, const Decomposition &decomposition,
                                    const FunctionCallGraph &g, const Binary2SourceMap &b2s,
                                    const EvalOptions &opts = {});

} // namespace mefr::reference
