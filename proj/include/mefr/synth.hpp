#pragma once

// Synthetic corpora with exact ground truth: a random source call graph
// compiled under several inlining policies of increasing strength.

#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "mefr/debug_extract.hpp"
#include "mefr/graph.hpp"
#include "mefr/mapping.hpp"
#include "mefr/oracle.hpp"
#include "mefr/source_index.hpp"

namespace mefr {

struct InlinePolicy {
  bool always_single_caller = true;
  std::size_t size_threshold = 12; // callee size in lines
  double inline_prob = 0.5;
};

struct SynthConfig {
  std::uint64_t seed = 1;
  std::size_t n_source_functions = 100;
  double edge_density = 0.3; // out-degree ~ Binomial(8, density)
  std::size_t n_settings = 3;
  InlinePolicy inline_policy;
  double back_edge_fraction = 0.05;
  std::size_t functions_per_file = 25;
  std::string project = "synth";
};

// Throws Precondition on out-of-range fields.
void validate_config(const SynthConfig &cfg);

struct SourceFunction {
  std::string name;
  std::string file; // as listed in the source index
  std::uint32_t start_line = 0, end_line = 0;

  std::uint32_t size() const { return end_line - start_line + 1; }
};

struct SourceCall {
  std::uint32_t caller = 0, callee = 0;
  std::uint32_t site = 0; // ordinal among the caller's call sites
};

struct SourceProgram {
  std::vector<SourceFunction> functions; // topological order of the acyclic part
  std::vector<SourceCall> calls;

  SourceFunctionKey key(std::uint32_t f) const { return {functions[f].file, functions[f].name}; }
};

struct InlineDecision {
  std::uint32_t call = 0; // index into SourceProgram::calls
  bool inlined = false;
};

struct SettingTruth {
  CompilationSetting setting;
  std::string binary_id;
  double scale = 0; // inlining strength in [0, 1]
  std::vector<InlineDecision> decisions; // one per source call
  FunctionCallGraph graph;
  Binary2SourceMap b2s;             // exact, straight from the decisions
  std::vector<LineRecord> lines;    // synthetic line table including noise rows
  MefrPartition expected;           // see expected_mefrs
};

struct SynthCorpus {
  SynthConfig config;
  SourceProgram program;
  SourceRangeIndex index;
  std::vector<std::uint32_t> never_inlined; // source function ids, ascending
  std::vector<SettingTruth> settings;
};

// Setting k inlines with strength k / (n_settings - 1), so setting 0 never
// inlines. A call is inlined when it is not recursive (caller and callee in
// different strongly connected components), the strength is positive, and
// either the callee has a single call site under always_single_caller, or
// the callee is within size_threshold and a uniform draw falls below
// inline_prob * strength. A function keeps its own binary body when it has
// no callers or some call to it survives.
SynthCorpus generate_corpus(const SynthConfig &cfg);

// Same compilation model applied to a given source program; the config's
// n_source_functions is overwritten with the program size.
SynthCorpus compile_program(const SynthConfig &cfg, SourceProgram program);

// Regions rebuilt from the source program and the inlining decisions
// without looking at the emitted call graph: from each never-inlined
// function, walk source calls that do not enter another never-inlined
// function; a visited function is a region member when some walked call to
// it was kept. Regions may overlap (mode Verbatim); contested_count counts
// members claimed twice.
MefrPartition expected_mefrs(const SynthCorpus &corpus, std::size_t setting);

// Pairwise classes computed directly from the ground-truth footprints by
// scanning every pair of binary functions.
MappingClassification brute_force_classify(const SynthCorpus &corpus, std::size_t left,
                                           std::size_t right);

// Writes truth.json, srcidx.json, manifest.json and per setting
// fcg/<stem>.json plus lines/<stem>.tsv under dir.
void write_corpus(const SynthCorpus &corpus, const std::filesystem::path &dir);

std::string to_truth_json(const SynthCorpus &corpus);

} // namespace mefr
