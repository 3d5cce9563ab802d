#pragma once

// Binary-to-source function mappings and the three cross-compilation
// correspondence classes between binary functions.

#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mefr/debug_extract.hpp"
#include "mefr/graph.hpp"
#include "mefr/source_index.hpp"

namespace mefr {

struct SourceFunctionKey {
  std::string file;
  std::string name;

  auto operator<=>(const SourceFunctionKey &) const = default;
};

// Sorted and duplicate free.
using SourceSet = std::vector<SourceFunctionKey>;

void canonicalize(SourceSet &set);

struct B2SEntry {
  BinaryFunctionId function;
  SourceSet sf_set;
  std::optional<SourceFunctionKey> osf;
  bool is_bfi = false; // |sf_set| > 1
};

struct B2SDiagnostics {
  std::vector<std::string> empty_functions;
  std::size_t rows_outside_functions = 0;
  std::size_t rows_unindexed_file = 0;
  std::size_t rows_outside_source_functions = 0;
};

struct Binary2SourceMap {
  std::string binary_id;
  CompilationSetting setting;
  std::vector<B2SEntry> entries; // sorted by function start address
  B2SDiagnostics diagnostics;

  const B2SEntry *find(std::string_view name) const;
  std::unordered_map<std::string, std::size_t> name_index() const;
};

// The element of sf_set named like the binary function, if any.
std::optional<SourceFunctionKey> resolve_osf(std::string_view binary_name,
                                             const SourceSet &sf_set);

// Attributes each line row to the function containing its address and to
// the source function whose line range contains it. Every function in the
// table gets an entry; functions without attributed rows are listed in the
// diagnostics.
Binary2SourceMap build_b2s(std::span<const LineRecord> lines, const FunctionTable &table,
                           const SourceRangeIndex &index);
Binary2SourceMap build_b2s(std::span<const LineRecord> lines,
                           std::span<const BinaryFunctionId> ranges,
                           const SourceRangeIndex &index);

enum class MappingClass { Identical, RootEquivalent, Relevant };

std::string_view to_string(MappingClass c);
MappingClass parse_mapping_class(std::string_view s);

// None when the source sets are disjoint. Throws Classification when the
// OSF is needed but a multi-source function has none.
std::optional<MappingClass> classify_pair(const B2SEntry &left, const B2SEntry &right);

struct PairMapping {
  BinaryFunctionId left;
  BinaryFunctionId right;
  MappingClass cls = MappingClass::Identical;

  bool operator==(const PairMapping &) const = default;
};

struct MappingClassification {
  std::string left_binary, right_binary;
  CompilationSetting left_setting, right_setting;
  std::vector<PairMapping> pairs; // ordered by (left start, right start)

  bool operator==(const MappingClassification &) const = default;
};

// Enumerates intersecting pairs through an inverted index from source key
// to binary functions, which costs O(sum of |sf_set|) plus the number of
// candidate pairs instead of |L|*|R|. Classification runs in parallel.
MappingClassification build_b2b(const Binary2SourceMap &left, const Binary2SourceMap &right);

struct MappingDistribution {
  std::size_t identical = 0;
  std::size_t root_equivalent = 0;
  std::size_t relevant = 0;

  std::size_t total() const { return identical + root_equivalent + relevant; }
  // Fractions of the classified pairs; all zero when there are none.
  double identical_ratio() const;
  double root_equivalent_ratio() const;
  double relevant_ratio() const;
};

MappingDistribution mapping_distribution(const MappingClassification &c);

// Pooled counts plus per-binary average counts over several classifications.
struct DistributionAggregate {
  std::size_t binaries = 0;
  MappingDistribution pooled;
  double mean_identical = 0, mean_root_equivalent = 0, mean_relevant = 0;
};

DistributionAggregate aggregate_distributions(std::span<const MappingDistribution> ds);

// "b2s/1" and "b2b/1" documents.
std::string to_b2s_json(const Binary2SourceMap &m);
Binary2SourceMap parse_b2s_json(std::string_view text);
std::string to_b2b_json(const MappingClassification &c);
MappingClassification parse_b2b_json(std::string_view text);

} // namespace mefr
