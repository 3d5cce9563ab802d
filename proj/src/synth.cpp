#include "mefr/synth.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <random>
#include <set>

#include "mefr/error.hpp"
#include "mefr/io.hpp"

namespace mefr {

namespace {

// Portable draws on top of mt19937_64, whose output sequence is fixed by
// the standard (the library distributions are not).
class Rng {
public:
  explicit Rng(std::initializer_list<std::uint64_t> seeds) {
    std::vector<std::uint32_t> words;
    for (auto s : seeds) {
      words.push_back(static_cast<std::uint32_t>(s));
      words.push_back(static_cast<std::uint32_t>(s >> 32));
    }
    std::seed_seq seq(words.begin(), words.end());
    engine_.seed(seq);
  }

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  std::uint64_t below(std::uint64_t n) { return engine_() % n; }
  bool chance(double p) { return uniform() < p; }

  template <class T> void shuffle(std::vector<T> &v) {
    for (std::size_t i = v.size(); i > 1; --i)
      std::swap(v[i - 1], v[below(i)]);
  }

private:
  std::mt19937_64 engine_;
};

constexpr std::uint64_t kTextBase = 0x401000;
constexpr std::uint64_t kBytesPerLine = 4;
const char *const kHeaderPath = "/usr/include/x86_64-linux-gnu/bits/stdio2.h";

CompilationSetting setting_for(std::size_t k) {
  static const Optimization opts[] = {Optimization::O0, Optimization::O1, Optimization::O2,
                                      Optimization::O3, Optimization::Os, Optimization::Ofast};
  static const char *const compilers[] = {"gcc-11.2.0", "clang-13.0.1"};
  return make_setting(compilers[k / 6], opts[k % 6], Architecture::x86_64);
}

// Strongly connected component id per function (iterative Tarjan).
std::vector<std::uint32_t> scc_ids(std::size_t n,
                                   const std::vector<std::vector<std::uint32_t>> &out_calls,
                                   const std::vector<SourceCall> &calls) {
  constexpr std::uint32_t kUnset = UINT32_MAX;
  std::vector<std::uint32_t> index(n, kUnset), low(n, 0), comp(n, kUnset);
  std::vector<char> on_stack(n, 0);
  std::vector<std::uint32_t> stack;
  std::uint32_t counter = 0, comps = 0;
  struct Frame {
    std::uint32_t v;
    std::size_t next;
  };
  std::vector<Frame> dfs;
  for (std::uint32_t root = 0; root < n; ++root) {
    if (index[root] != kUnset)
      continue;
    dfs.push_back({root, 0});
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!dfs.empty()) {
      auto &f = dfs.back();
      if (f.next < out_calls[f.v].size()) {
        std::uint32_t w = calls[out_calls[f.v][f.next++]].callee;
        if (index[w] == kUnset) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = 1;
          dfs.push_back({w, 0});
        } else if (on_stack[w]) {
          low[f.v] = std::min(low[f.v], index[w]);
        }
        continue;
      }
      std::uint32_t v = f.v;
      dfs.pop_back();
      if (!dfs.empty())
        low[dfs.back().v] = std::min(low[dfs.back().v], low[v]);
      if (low[v] == index[v]) {
        std::uint32_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          comp[w] = comps;
        } while (w != v);
        ++comps;
      }
    }
  }
  return comp;
}

SourceProgram make_program(const SynthConfig &cfg, Rng &rng) {
  SourceProgram p;
  const std::size_t n = cfg.n_source_functions;
  std::uint32_t next_line = 3;
  std::size_t file_no = SIZE_MAX;
  for (std::size_t i = 0; i < n; ++i) {
    if (i / cfg.functions_per_file != file_no) {
      file_no = i / cfg.functions_per_file;
      next_line = 3;
    }
    SourceFunction f;
    f.name = "f" + std::to_string(i);
    f.file = "src/unit" + std::to_string(file_no) + ".c";
    f.start_line = next_line;
    f.end_line = next_line + 2 + static_cast<std::uint32_t>(rng.below(18));
    next_line = f.end_line + 2;
    p.functions.push_back(std::move(f));
  }
  for (std::uint32_t i = 0; i < n; ++i) {
    std::uint32_t sites = 0;
    for (int t = 0; t < 8; ++t) {
      if (!rng.chance(cfg.edge_density))
        continue;
      std::uint32_t callee;
      if (rng.chance(cfg.back_edge_fraction))
        callee = static_cast<std::uint32_t>(rng.below(i + 1));
      else if (i + 1 < n)
        callee = i + 1 + static_cast<std::uint32_t>(rng.below(n - i - 1));
      else
        continue;
      p.calls.push_back({i, callee, sites++});
    }
  }
  return p;
}

struct Expansion {
  std::vector<std::uint32_t> order; // holder first, then inlined bodies in DFS order
};

Expansion expand(std::uint32_t h, const SourceProgram &p,
                 const std::vector<std::vector<std::uint32_t>> &out_calls,
                 const std::vector<InlineDecision> &decisions) {
  Expansion e;
  std::set<std::uint32_t> seen{h};
  std::vector<std::uint32_t> stack{h};
  while (!stack.empty()) {
    std::uint32_t x = stack.back();
    stack.pop_back();
    e.order.push_back(x);
    const auto &oc = out_calls[x];
    for (auto it = oc.rbegin(); it != oc.rend(); ++it) {
      std::uint32_t y = p.calls[*it].callee;
      if (decisions[*it].inlined && seen.insert(y).second)
        stack.push_back(y);
    }
  }
  return e;
}

} // namespace

void validate_config(const SynthConfig &cfg) {
  if (cfg.n_source_functions < 1)
    fail(ErrorKind::Precondition, "synth: n_source_functions must be at least 1");
  if (!(cfg.edge_density > 0.0 && cfg.edge_density <= 1.0))
    fail(ErrorKind::Precondition, "synth: edge_density must lie in (0, 1]");
  if (cfg.n_settings < 2 || cfg.n_settings > 12)
    fail(ErrorKind::Precondition, "synth: n_settings must lie in [2, 12]");
  if (!(cfg.inline_policy.inline_prob >= 0.0 && cfg.inline_policy.inline_prob <= 1.0))
    fail(ErrorKind::Precondition, "synth: inline_prob must lie in [0, 1]");
  if (!(cfg.back_edge_fraction >= 0.0 && cfg.back_edge_fraction <= 1.0))
    fail(ErrorKind::Precondition, "synth: back_edge_fraction must lie in [0, 1]");
  if (cfg.functions_per_file < 1)
    fail(ErrorKind::Precondition, "synth: functions_per_file must be at least 1");
  if (cfg.project.empty())
    fail(ErrorKind::Precondition, "synth: project name is empty");
}

SynthCorpus generate_corpus(const SynthConfig &cfg) {
  validate_config(cfg);
  Rng prog_rng{cfg.seed, 0x50524f47};
  return compile_program(cfg, make_program(cfg, prog_rng));
}

SynthCorpus compile_program(const SynthConfig &cfg, SourceProgram program) {
  validate_config(cfg);
  for (const auto &call : program.calls)
    if (call.caller >= program.functions.size() || call.callee >= program.functions.size())
      fail(ErrorKind::Precondition, "synth: call refers to a function out of range");
  SynthCorpus c;
  c.config = cfg;
  c.config.n_source_functions = program.functions.size();
  c.program = std::move(program);
  const auto &p = c.program;
  const std::size_t n = p.functions.size();

  std::vector<SourceRangeEntry> idx;
  for (const auto &f : p.functions)
    idx.push_back({f.file, f.name, f.start_line, f.end_line});
  c.index = SourceRangeIndex::build(std::move(idx));

  std::vector<std::vector<std::uint32_t>> out_calls(n), in_calls(n);
  for (std::uint32_t i = 0; i < p.calls.size(); ++i) {
    out_calls[p.calls[i].caller].push_back(i);
    in_calls[p.calls[i].callee].push_back(i);
  }
  const auto comp = scc_ids(n, out_calls, p.calls);
  std::vector<char> ever_inlined(n, 0);
  const auto &pol = cfg.inline_policy;

  for (std::size_t k = 0; k < cfg.n_settings; ++k) {
    SettingTruth t;
    t.setting = setting_for(k);
    t.binary_id = cfg.project + ":" + t.setting.label();
    t.scale = static_cast<double>(k) / static_cast<double>(cfg.n_settings - 1);
    Rng rng{cfg.seed, 0x53455454, k};

    t.decisions.resize(p.calls.size());
    for (std::uint32_t i = 0; i < p.calls.size(); ++i) {
      const auto &call = p.calls[i];
      const double u = rng.uniform();
      bool inl = false;
      if (comp[call.caller] != comp[call.callee] && t.scale > 0) {
        const auto &callee = p.functions[call.callee];
        if (pol.always_single_caller && in_calls[call.callee].size() == 1)
          inl = true;
        else if (callee.size() <= pol.size_threshold && u < pol.inline_prob * t.scale)
          inl = true;
      }
      t.decisions[i] = {i, inl};
      if (inl)
        ever_inlined[call.callee] = 1;
    }

    std::vector<std::uint32_t> holders;
    for (std::uint32_t v = 0; v < n; ++v) {
      bool exists = in_calls[v].empty();
      for (auto ci : in_calls[v])
        exists = exists || !t.decisions[ci].inlined;
      if (exists)
        holders.push_back(v);
    }
    rng.shuffle(holders);

    std::vector<BinaryFunctionId> functions;
    std::vector<CallRecord> records;
    std::uint64_t cursor = kTextBase;
    for (std::uint32_t h : holders) {
      const Expansion e = expand(h, p, out_calls, t.decisions);
      const std::uint64_t start = cursor;
      B2SEntry entry;
      entry.function.name = p.functions[h].name;
      entry.function.start_addr = start;
      const std::string root = "/build/s" + std::to_string(k) + "/" + cfg.project + "/";
      if (rng.chance(0.3)) // prologue attributed to the blank line above the function
        t.lines.push_back({cursor, root + p.functions[h].file, p.functions[h].start_line - 1});
      for (std::uint32_t x : e.order) {
        const auto &sf = p.functions[x];
        const std::uint64_t base = cursor;
        for (std::uint32_t l = sf.start_line; l <= sf.end_line; ++l) {
          t.lines.push_back({cursor, root + sf.file, l});
          cursor += kBytesPerLine;
        }
        for (auto ci : out_calls[x])
          if (!t.decisions[ci].inlined)
            records.push_back({p.functions[h].name, p.functions[p.calls[ci].callee].name,
                               base + p.calls[ci].site});
        entry.sf_set.push_back(p.key(x));
      }
      if (rng.chance(0.3)) {
        for (std::uint32_t l = 0; l < 2; ++l) {
          t.lines.push_back({cursor, kHeaderPath, 120 + l});
          cursor += kBytesPerLine;
        }
      }
      cursor += 8;
      entry.function.end_addr = cursor;
      // Alignment padding carries a stray row outside every function.
      t.lines.push_back({cursor, root + p.functions[h].file, p.functions[h].end_line});
      cursor = (cursor + 16) & ~std::uint64_t{15};
      canonicalize(entry.sf_set);
      entry.osf = p.key(h);
      entry.is_bfi = entry.sf_set.size() > 1;
      functions.push_back(entry.function);
      t.b2s.entries.push_back(std::move(entry));
    }
    std::sort(t.lines.begin(), t.lines.end());
    t.b2s.binary_id = t.binary_id;
    t.b2s.setting = t.setting;
    std::sort(t.b2s.entries.begin(), t.b2s.entries.end(), [](const auto &a, const auto &b) {
      return a.function.start_addr < b.function.start_addr;
    });
    t.graph = FunctionCallGraph::build(t.binary_id, t.setting, std::move(functions), records);
    c.settings.push_back(std::move(t));
  }
  for (std::uint32_t v = 0; v < n; ++v)
    if (!ever_inlined[v])
      c.never_inlined.push_back(v);
  for (std::size_t k = 0; k < c.settings.size(); ++k)
    c.settings[k].expected = expected_mefrs(c, k);
  return c;
}

MefrPartition expected_mefrs(const SynthCorpus &corpus, std::size_t setting) {
  const auto &p = corpus.program;
  const auto &t = corpus.settings.at(setting);
  const std::size_t n = p.functions.size();
  std::vector<char> boundary(n, 0);
  for (auto v : corpus.never_inlined)
    boundary[v] = 1;
  std::vector<std::vector<std::uint32_t>> out_calls(n);
  for (std::uint32_t i = 0; i < p.calls.size(); ++i)
    out_calls[p.calls[i].caller].push_back(i);

  MefrPartition out;
  out.graph_id = t.binary_id;
  out.mode = MefrMode::Verbatim;
  std::map<std::uint32_t, std::uint32_t> claims; // source function -> regions claiming it
  std::vector<std::pair<NodeIndex, std::set<NodeIndex>>> regions;
  for (auto b : corpus.never_inlined) {
    std::set<std::uint32_t> visited{b};
    std::set<std::uint32_t> members{b};
    std::deque<std::uint32_t> queue{b};
    while (!queue.empty()) {
      auto x = queue.front();
      queue.pop_front();
      for (auto ci : out_calls[x]) {
        auto y = p.calls[ci].callee;
        if (boundary[y])
          continue;
        if (!t.decisions[ci].inlined)
          members.insert(y);
        if (visited.insert(y).second)
          queue.push_back(y);
      }
    }
    std::set<NodeIndex> nodes;
    for (auto m : members) {
      nodes.insert(t.graph.index_of(p.functions[m].name));
      ++claims[m];
    }
    regions.emplace_back(t.graph.index_of(p.functions[b].name), std::move(nodes));
  }
  std::sort(regions.begin(), regions.end());
  std::set<NodeIndex> covered;
  for (auto &[entry, nodes] : regions) {
    Mefr m{entry, {entry}};
    for (auto v : nodes)
      if (v != entry)
        m.members.push_back(v);
    covered.insert(nodes.begin(), nodes.end());
    out.regions.push_back(std::move(m));
  }
  for (NodeIndex v = 0; v < t.graph.size(); ++v)
    if (!covered.contains(v))
      out.unassigned.push_back(v);
  for (const auto &[f, count] : claims)
    out.contested_count += count > 1;
  return out;
}

MappingClassification brute_force_classify(const SynthCorpus &corpus, std::size_t left,
                                           std::size_t right) {
  const auto &L = corpus.settings.at(left);
  const auto &R = corpus.settings.at(right);
  using Names = std::set<std::string>;
  auto names = [](const B2SEntry &e) {
    Names s;
    for (const auto &k : e.sf_set)
      s.insert(k.file + "\n" + k.name);
    return s;
  };
  MappingClassification c;
  c.left_binary = L.binary_id;
  c.right_binary = R.binary_id;
  c.left_setting = L.setting;
  c.right_setting = R.setting;
  std::vector<Names> right_names;
  for (const auto &r : R.b2s.entries)
    right_names.push_back(names(r));
  for (const auto &l : L.b2s.entries) {
    const Names ls = names(l);
    for (std::size_t ri = 0; ri < R.b2s.entries.size(); ++ri) {
      const auto &r = R.b2s.entries[ri];
      const Names &rs = right_names[ri];
      bool shared = std::any_of(ls.begin(), ls.end(), [&](const auto &x) { return rs.contains(x); });
      if (!shared)
        continue;
      MappingClass cls;
      if (ls == rs)
        cls = MappingClass::Identical;
      else if (l.function.name == r.function.name)
        cls = MappingClass::RootEquivalent;
      else
        cls = MappingClass::Relevant;
      c.pairs.push_back({l.function, r.function, cls});
    }
  }
  return c;
}

std::string to_truth_json(const SynthCorpus &corpus) {
  const auto &cfg = corpus.config;
  const auto &p = corpus.program;
  Json j;
  j["schema"] = "truth/1";
  j["config"] = {{"seed", cfg.seed},
                 {"n_source_functions", cfg.n_source_functions},
                 {"edge_density", cfg.edge_density},
                 {"n_settings", cfg.n_settings},
                 {"inline_policy",
                  {{"always_single_caller", cfg.inline_policy.always_single_caller},
                   {"size_threshold", cfg.inline_policy.size_threshold},
                   {"inline_prob", cfg.inline_policy.inline_prob}}},
                 {"back_edge_fraction", cfg.back_edge_fraction},
                 {"functions_per_file", cfg.functions_per_file},
                 {"project", cfg.project}};
  Json fns = Json::array();
  for (const auto &f : p.functions)
    fns.push_back({{"name", f.name}, {"file", f.file}, {"start_line", f.start_line},
                   {"end_line", f.end_line}});
  Json calls = Json::array();
  for (const auto &c : p.calls)
    calls.push_back({{"caller", p.functions[c.caller].name},
                     {"callee", p.functions[c.callee].name},
                     {"site", c.site}});
  j["source"] = {{"functions", std::move(fns)}, {"calls", std::move(calls)}};
  Json never = Json::array();
  for (auto v : corpus.never_inlined)
    never.push_back(p.functions[v].name);
  j["never_inlined"] = std::move(never);

  Json settings = Json::array();
  for (const auto &t : corpus.settings) {
    Json inlined = Json::array();
    for (const auto &d : t.decisions)
      if (d.inlined) {
        const auto &c = p.calls[d.call];
        inlined.push_back({{"caller", p.functions[c.caller].name},
                           {"callee", p.functions[c.callee].name},
                           {"site", c.site}});
      }
    Json functions = Json::array();
    for (const auto &e : t.b2s.entries) {
      Json sf = Json::array();
      for (const auto &k : e.sf_set)
        sf.push_back(k.name);
      functions.push_back({{"name", e.function.name}, {"sf_set", std::move(sf)}});
    }
    Json regions = Json::array();
    for (const auto &r : t.expected.regions) {
      Json members = Json::array();
      for (auto v : r.members)
        members.push_back(t.graph.function(v).name);
      regions.push_back({{"entry", t.graph.function(r.entry).name}, {"members", std::move(members)}});
    }
    Json unassigned = Json::array();
    for (auto v : t.expected.unassigned)
      unassigned.push_back(t.graph.function(v).name);
    settings.push_back({{"setting", setting_to_json(t.setting)},
                        {"binary_id", t.binary_id},
                        {"scale", t.scale},
                        {"inlined_calls", std::move(inlined)},
                        {"functions", std::move(functions)},
                        {"expected_mefrs",
                         {{"regions", std::move(regions)},
                          {"unassigned", std::move(unassigned)},
                          {"contested_count", t.expected.contested_count}}}});
  }
  j["settings"] = std::move(settings);
  return dump_json(j);
}

void write_corpus(const SynthCorpus &corpus, const std::filesystem::path &dir) {
  write_text_file(dir / "truth.json", to_truth_json(corpus));
  write_text_file(dir / "srcidx.json", to_source_index_json(corpus.index));
  Json entries = Json::array();
  for (const auto &t : corpus.settings) {
    const std::string stem = t.setting.file_stem();
    emit_fcg(t.graph, dir / "fcg" / (stem + ".json"));
    write_text_file(dir / "lines" / (stem + ".tsv"), format_line_table(t.lines));
    entries.push_back({{"setting", setting_to_json(t.setting)},
                       {"fcg_path", "fcg/" + stem + ".json"},
                       {"lines_path", "lines/" + stem + ".tsv"}});
  }
  Json m;
  m["schema"] = "manifest/1";
  m["project"] = corpus.config.project;
  m["source_index"] = "srcidx.json";
  m["entries"] = std::move(entries);
  write_text_file(dir / "manifest.json", dump_json(m));
}

} // namespace mefr
