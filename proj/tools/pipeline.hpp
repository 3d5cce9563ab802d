#pragma once

// Pipeline stages behind the mefr command line. Stages talk to each other
// only through files under the output directory.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mefr/graph.hpp"
#include "mefr/oracle.hpp"
#include "mefr/synth.hpp"

namespace mefr::cli {

namespace fs = std::filesystem;

struct ManifestEntry {
  CompilationSetting setting;
  std::optional<fs::path> binary_path, fcg_path, b2s_path, lines_path;
};

// "manifest/1". Relative paths resolve against the manifest's directory.
struct Manifest {
  std::string project;
  std::optional<fs::path> source_index;
  std::vector<ManifestEntry> entries;
};

Manifest load_manifest(const fs::path &path);

enum class Format { Json, Csv };

struct Options {
  fs::path manifest;
  std::optional<fs::path> source_index; // overrides the manifest's
  fs::path out = "mefr-out";
  std::optional<int> jobs;
  MefrMode mode = MefrMode::Partition;
  Format format = Format::Json;
};

// Exit codes: 0 success, 1 some work item failed, 2 usage or schema error.
inline constexpr int kExitOk = 0, kExitPartial = 1, kExitUsage = 2;

int run_extract(const Options &opts);

// pairs holds "LEFT:RIGHT" selections by setting stem or label; empty means
// every unordered pair of settings.
int run_map(const Options &opts, const std::vector<std::string> &pairs);

int run_oracle(const Options &opts);

struct EvalRequest {
  std::string method = "oracle"; // oracle, singleton, modularity, expander, anchor
  std::optional<fs::path> decomposition;
  std::optional<std::size_t> max_size;
  std::size_t radius = 5;
  std::optional<std::size_t> hops;
  bool unit_weights = false;
  std::vector<double> similarity_edges, granularity_edges; // empty: defaults
};

int run_eval(const Options &opts, const EvalRequest &req);

int run_report(const Options &opts);

int run_synth(const SynthConfig &cfg, const fs::path &out);

} // namespace mefr::cli
