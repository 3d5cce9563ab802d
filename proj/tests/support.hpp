#pragma once

#include <algorithm>
#include <filesystem>
#include <functional>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "mefr/graph.hpp"
#include "mefr/mapping.hpp"

namespace mefr::testing {

inline std::filesystem::path fixture(const std::string &name) {
  return std::filesystem::path(MEFR_FIXTURE_DIR) / name;
}

inline CompilationSetting gcc(Optimization o) {
  return make_setting("gcc-11.2.0", o, Architecture::x86_64);
}

// Nodes get 0x1000 + 0x10 * position, so listing order is address order.
inline FunctionCallGraph make_graph(const std::vector<std::string> &nodes,
                                    const std::vector<std::pair<std::string, std::string>> &edges,
                                    std::string id = "g", Optimization o = Optimization::O0) {
  std::vector<BinaryFunctionId> fs;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    fs.push_back({nodes[i], 0x1000 + 0x10 * i, 0x1000 + 0x10 * i + 0x10});
  std::vector<CallRecord> calls;
  for (const auto &[a, b] : edges)
    calls.push_back({a, b, std::nullopt});
  return FunctionCallGraph::build(std::move(id), gcc(o), std::move(fs), calls);
}

inline SourceFunctionKey key(const std::string &name) { return {"src/a.c", name}; }

inline SourceSet keys(std::initializer_list<const char *> names) {
  SourceSet s;
  for (const char *n : names)
    s.push_back(key(n));
  canonicalize(s);
  return s;
}

// B2S entry for a node of make_graph: osf resolved by name when present.
inline B2SEntry entry(const FunctionCallGraph &g, const std::string &name, SourceSet sf) {
  B2SEntry e;
  e.function = g.function(g.index_of(name));
  e.sf_set = std::move(sf);
  e.osf = resolve_osf(name, e.sf_set);
  e.is_bfi = e.sf_set.size() > 1;
  return e;
}

inline Binary2SourceMap make_b2s(const FunctionCallGraph &g,
                                 const std::vector<std::pair<std::string, SourceSet>> &rows) {
  Binary2SourceMap m;
  m.binary_id = g.binary_id();
  m.setting = g.setting();
  for (const auto &[name, sf] : rows)
    m.entries.push_back(entry(g, name, sf));
  std::sort(m.entries.begin(), m.entries.end(), [](const auto &a, const auto &b) {
    return a.function.start_addr < b.function.start_addr;
  });
  return m;
}

// Every node maps to exactly its own source function.
inline Binary2SourceMap identity_b2s(const FunctionCallGraph &g) {
  std::vector<std::pair<std::string, SourceSet>> rows;
  for (const auto &f : g.functions())
    rows.push_back({f.name, SourceSet{key(f.name)}});
  return make_b2s(g, rows);
}

inline std::vector<std::string> names(const FunctionCallGraph &g, const std::vector<NodeIndex> &v) {
  std::vector<std::string> out;
  for (auto n : v)
    out.push_back(g.function(n).name);
  return out;
}

} // namespace mefr::testing
