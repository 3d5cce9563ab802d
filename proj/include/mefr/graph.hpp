#pragma once

// Function call graph model and its "fcg/1" interchange format.

#include <compare>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace mefr {

using NameSet = std::unordered_set<std::string>;
using NodeIndex = std::uint32_t;

enum class Optimization { O0, O1, O2, O3, Os, Ofast };
enum class Architecture { x86_32, x86_64, arm_32, arm_64 };

std::string_view to_string(Optimization o);
std::string_view to_string(Architecture a);
Optimization parse_optimization(std::string_view s);
Architecture parse_architecture(std::string_view s);

struct CompilationSetting {
  std::string compiler; // "family-version", e.g. gcc-11.2.0
  Optimization optimization = Optimization::O0;
  Architecture architecture = Architecture::x86_64;

  // "gcc-11.2.0/O2/x86_64"
  std::string label() const;
  // label() with '/' replaced, usable as a file stem.
  std::string file_stem() const;

  auto operator<=>(const CompilationSetting &) const = default;
};

CompilationSetting make_setting(std::string compiler, Optimization opt,
                                Architecture arch);
CompilationSetting parse_setting_label(std::string_view label);
bool is_valid_compiler_string(std::string_view compiler);

struct BinaryFunctionId {
  std::string name;
  std::uint64_t start_addr = 0;
  std::uint64_t end_addr = 0; // exclusive

  bool contains(std::uint64_t addr) const {
    return addr >= start_addr && addr < end_addr;
  }
  auto operator<=>(const BinaryFunctionId &) const = default;
};

struct CallEdge {
  NodeIndex caller = 0;
  NodeIndex callee = 0;
  std::optional<std::uint64_t> site;

  auto operator<=>(const CallEdge &) const = default;
};

// Name-keyed call as it appears in interchange files, before resolution.
struct CallRecord {
  std::string caller;
  std::string callee;
  std::optional<std::uint64_t> site;
};

// Strips compiler clone suffixes (.isra.N, .part.N, .constprop.N, .cold.N,
// .clone.N) repeatedly, then a single leading underscore when the result
// without it is a known source function name.
std::string normalize_name(std::string_view raw,
                           const NameSet *source_names = nullptr);

// Immutable multi-edge directed graph. Nodes are ordered by start address,
// so NodeIndex order is address order. Parallel edges are stored; the
// adjacency queries below deduplicate them.
class FunctionCallGraph {
public:
  FunctionCallGraph() = default;

  // Validates and canonicalizes. Function names must already be normalized.
  static FunctionCallGraph build(std::string binary_id,
                                 CompilationSetting setting,
                                 std::vector<BinaryFunctionId> functions,
                                 std::span<const CallRecord> calls);

  const std::string &binary_id() const { return binary_id_; }
  const CompilationSetting &setting() const { return setting_; }

  std::size_t size() const { return functions_.size(); }
  std::span<const BinaryFunctionId> functions() const { return functions_; }
  const BinaryFunctionId &function(NodeIndex n) const { return functions_.at(n); }
  std::span<const CallEdge> edges() const { return edges_; }

  std::optional<NodeIndex> find(std::string_view name) const;
  // Throws UnknownFunction.
  NodeIndex index_of(std::string_view name) const;
  NodeIndex index_of(const BinaryFunctionId &f) const;

  std::span<const NodeIndex> successors(NodeIndex n) const;
  std::span<const NodeIndex> predecessors(NodeIndex n) const;
  // Predecessors and successors, without n itself, ascending.
  std::vector<NodeIndex> neighbors(NodeIndex n) const;

  friend bool operator==(const FunctionCallGraph &a, const FunctionCallGraph &b) {
    return a.binary_id_ == b.binary_id_ && a.setting_ == b.setting_ &&
           a.functions_ == b.functions_ && a.edges_ == b.edges_;
  }

private:
  std::string binary_id_;
  CompilationSetting setting_;
  std::vector<BinaryFunctionId> functions_;
  std::vector<CallEdge> edges_;
  std::unordered_map<std::string, NodeIndex> by_name_;
  // CSR adjacency, deduplicated.
  std::vector<std::uint32_t> succ_offsets_, pred_offsets_;
  std::vector<NodeIndex> succ_, pred_;
};

std::vector<BinaryFunctionId> successors(const FunctionCallGraph &g,
                                         const BinaryFunctionId &f);
std::vector<BinaryFunctionId> neighbors(const FunctionCallGraph &g,
                                        const BinaryFunctionId &f);

// fcg/1 (JSON) and the GML convenience format.
FunctionCallGraph parse_fcg_json(std::string_view text,
                                 const NameSet *source_names = nullptr);
FunctionCallGraph parse_fcg_gml(std::string_view text,
                                const NameSet *source_names = nullptr);
std::string to_fcg_json(const FunctionCallGraph &g);

// Dispatches on extension: ".gml" is GML, everything else fcg/1 JSON.
FunctionCallGraph ingest_fcg(const std::filesystem::path &path,
                             const NameSet *source_names = nullptr);
void emit_fcg(const FunctionCallGraph &g, const std::filesystem::path &path);

std::string format_hex(std::uint64_t value);
std::optional<std::uint64_t> parse_hex(std::string_view text);

} // namespace mefr
