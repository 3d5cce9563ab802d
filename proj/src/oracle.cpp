#include "mefr/oracle.hpp"

#include <algorithm>
#include <exception>
#include <map>
#include <set>
#include <unordered_map>

#include "mefr/error.hpp"
#include "mefr/io.hpp"

namespace mefr {

namespace {

bool contains_key(const SourceSet &set, const SourceFunctionKey &k) {
  return std::binary_search(set.begin(), set.end(), k);
}

SourceSet set_difference(const SourceSet &a, const SourceSet &b) {
  SourceSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

SourceSet set_intersection(const SourceSet &a, const SourceSet &b) {
  SourceSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

std::vector<BoundarySet> collect_boundaries(std::span<const Binary2SourceMap> maps,
                                            const SourceSet &never_inlined,
                                            const std::vector<std::set<std::string>> *eligible) {
  std::vector<BoundarySet> out;
  out.reserve(maps.size());
  for (std::size_t m = 0; m < maps.size(); ++m) {
    BoundarySet b;
    b.graph_id = maps[m].binary_id;
    for (const auto &e : maps[m].entries) {
      if (!e.osf || !contains_key(never_inlined, *e.osf))
        continue;
      if (eligible && !(*eligible)[m].contains(e.function.name))
        continue;
      b.boundary.push_back(e.function);
    }
    std::sort(b.boundary.begin(), b.boundary.end(),
              [](const auto &x, const auto &y) { return x.start_addr < y.start_addr; });
    out.push_back(std::move(b));
  }
  return out;
}

} // namespace

CorpusBoundaries identify_boundaries(std::span<const Binary2SourceMap> maps) {
  if (maps.size() < 2)
    fail(ErrorKind::SingleSetting, "boundary identification needs at least two settings, got " +
                                       std::to_string(maps.size()));
  std::set<SourceFunctionKey> seen, inlined;
  for (const auto &m : maps)
    for (const auto &e : m.entries)
      for (const auto &k : e.sf_set) {
        seen.insert(k);
        if (!e.osf || *e.osf != k)
          inlined.insert(k);
      }
  CorpusBoundaries cb;
  std::set_difference(seen.begin(), seen.end(), inlined.begin(), inlined.end(),
                      std::back_inserter(cb.never_inlined));
  cb.per_graph = collect_boundaries(maps, cb.never_inlined, nullptr);
  return cb;
}

CorpusBoundaries identify_boundaries_from_mappings(
    std::span<const Binary2SourceMap> maps,
    std::span<const MappingClassification> classifications) {
  if (maps.size() < 2)
    fail(ErrorKind::SingleSetting, "boundary identification needs at least two settings, got " +
                                       std::to_string(maps.size()));
  std::unordered_map<std::string, std::size_t> by_binary;
  std::vector<std::unordered_map<std::string, std::size_t>> name_idx;
  for (std::size_t i = 0; i < maps.size(); ++i) {
    by_binary.emplace(maps[i].binary_id, i);
    name_idx.push_back(maps[i].name_index());
  }
  auto lookup = [&](const std::string &binary, const BinaryFunctionId &f)
      -> std::pair<std::size_t, const B2SEntry *> {
    auto b = by_binary.find(binary);
    if (b == by_binary.end())
      fail(ErrorKind::IdMismatch, "classification refers to unknown binary \"" + binary + "\"");
    auto it = name_idx[b->second].find(f.name);
    if (it == name_idx[b->second].end())
      fail(ErrorKind::UnknownFunction,
           "classification refers to \"" + f.name + "\" absent from " + binary);
    return {b->second, &maps[b->second].entries[it->second]};
  };

  std::set<SourceFunctionKey> disqualified, root_keys;
  std::vector<std::set<std::string>> anchored(maps.size());
  for (const auto &c : classifications) {
    for (const auto &p : c.pairs) {
      auto [li, le] = lookup(c.left_binary, p.left);
      auto [ri, re] = lookup(c.right_binary, p.right);
      if (p.cls == MappingClass::Relevant) {
        for (auto &k : set_intersection(le->sf_set, re->sf_set))
          disqualified.insert(std::move(k));
        continue;
      }
      if (le->osf) {
        anchored[li].insert(le->function.name);
        root_keys.insert(*le->osf);
      }
      if (re->osf) {
        anchored[ri].insert(re->function.name);
        root_keys.insert(*re->osf);
      }
    }
  }
  CorpusBoundaries cb;
  std::set_difference(root_keys.begin(), root_keys.end(), disqualified.begin(),
                      disqualified.end(), std::back_inserter(cb.never_inlined));
  cb.per_graph = collect_boundaries(maps, cb.never_inlined, &anchored);
  return cb;
}

std::vector<NodeIndex> boundary_nodes(const FunctionCallGraph &g, const BoundarySet &b) {
  std::vector<NodeIndex> out;
  out.reserve(b.boundary.size());
  for (const auto &f : b.boundary)
    if (auto n = g.find(f.name))
      out.push_back(*n);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string_view to_string(MefrMode m) {
  return m == MefrMode::Verbatim ? "verbatim" : "partition";
}

MefrMode parse_mefr_mode(std::string_view s) {
  if (s == "verbatim")
    return MefrMode::Verbatim;
  if (s == "partition")
    return MefrMode::Partition;
  fail(ErrorKind::Schema, "unknown MEFR mode \"" + std::string(s) + "\"");
}

MefrPartition construct_mefrs(const FunctionCallGraph &g, std::span<const NodeIndex> boundary,
                              MefrMode mode, TraversalStats *stats) {
  const std::size_t n = g.size();
  std::vector<NodeIndex> entries(boundary.begin(), boundary.end());
  std::sort(entries.begin(), entries.end());
  entries.erase(std::unique(entries.begin(), entries.end()), entries.end());
  for (NodeIndex e : entries)
    if (e >= n)
      fail(ErrorKind::Precondition, "boundary node " + std::to_string(e) + " out of range");

  std::vector<char> is_boundary(n, 0);
  for (NodeIndex e : entries)
    is_boundary[e] = 1;

  const std::size_t r = entries.size();
  MefrPartition out;
  out.graph_id = g.binary_id();
  out.mode = mode;
  out.regions.resize(r);
  std::vector<std::size_t> pops(r, 0), inserts(r, 0);
  std::exception_ptr err;

#pragma omp parallel
  {
    // Per-thread membership stamps avoid an O(n) clear per region.
    std::vector<std::uint32_t> stamp(n, 0);
    std::vector<NodeIndex> frontier;
#pragma omp for schedule(dynamic, 8)
    for (std::size_t i = 0; i < r; ++i) {
      try {
        const std::uint32_t tag = static_cast<std::uint32_t>(i + 1);
        Mefr &region = out.regions[i];
        region.entry = entries[i];
        region.members.push_back(entries[i]);
        stamp[entries[i]] = tag;
        frontier.assign(1, entries[i]);
        std::size_t head = 0;
        while (head < frontier.size()) {
          NodeIndex u = frontier[head++];
          ++pops[i];
          for (NodeIndex v : g.successors(u)) {
            if (is_boundary[v] || stamp[v] == tag)
              continue;
            stamp[v] = tag;
            region.members.push_back(v);
            ++inserts[i];
            frontier.push_back(v);
          }
        }
      } catch (...) {
#pragma omp critical(mefr_construct_error)
        if (!err)
          err = std::current_exception();
      }
    }
  }
  if (err)
    std::rethrow_exception(err);

  std::vector<std::uint32_t> claims(n, 0);
  std::vector<std::uint32_t> owner(n, UINT32_MAX);
  for (std::size_t i = 0; i < r; ++i)
    for (NodeIndex v : out.regions[i].members) {
      ++claims[v];
      if (owner[v] == UINT32_MAX)
        owner[v] = static_cast<std::uint32_t>(i);
    }
  for (std::size_t v = 0; v < n; ++v) {
    if (claims[v] == 0)
      out.unassigned.push_back(static_cast<NodeIndex>(v));
    else if (claims[v] > 1)
      ++out.contested_count;
  }
  if (mode == MefrMode::Partition && out.contested_count > 0) {
    for (std::size_t i = 0; i < r; ++i) {
      auto &m = out.regions[i].members;
      std::erase_if(m, [&](NodeIndex v) { return owner[v] != i; });
    }
  }
  if (stats) {
    stats->pops = std::move(pops);
    stats->insertions = std::move(inserts);
  }
  return out;
}

SourceSet region_sources(const Mefr &region, const FunctionCallGraph &g,
                         const Binary2SourceMap &b2s) {
  auto idx = b2s.name_index();
  SourceSet out;
  for (NodeIndex v : region.members) {
    auto it = idx.find(g.function(v).name);
    if (it == idx.end())
      continue;
    const auto &sf = b2s.entries[it->second].sf_set;
    out.insert(out.end(), sf.begin(), sf.end());
  }
  canonicalize(out);
  return out;
}

bool ValidationReport::all_equivalent() const {
  return unmatched_left.empty() && unmatched_right.empty() &&
         std::all_of(regions.begin(), regions.end(), [](const auto &c) { return c.equivalent(); });
}

bool ValidationReport::all_minimal() const {
  return std::all_of(regions.begin(), regions.end(), [](const auto &c) { return c.minimal(); });
}

namespace {

struct SideIndex {
  const MefrSide &side;
  std::unordered_map<std::string, std::size_t> names;
  std::map<SourceFunctionKey, std::size_t> by_osf; // osf -> region index

  explicit SideIndex(const MefrSide &s, std::vector<std::string> &unmatched)
      : side(s), names(s.b2s.name_index()) {
    for (std::size_t i = 0; i < s.partition.regions.size(); ++i) {
      const auto *e = entry_of(s.partition.regions[i].entry);
      const std::string &name = s.graph.function(s.partition.regions[i].entry).name;
      if (!e || !e->osf || !by_osf.emplace(*e->osf, i).second)
        unmatched.push_back(name);
    }
  }

  const B2SEntry *entry_of(NodeIndex v) const {
    auto it = names.find(side.graph.function(v).name);
    return it == names.end() ? nullptr : &side.b2s.entries[it->second];
  }

  SourceSet sources(const Mefr &region) const {
    SourceSet out;
    for (NodeIndex v : region.members)
      if (const auto *e = entry_of(v))
        out.insert(out.end(), e->sf_set.begin(), e->sf_set.end());
    canonicalize(out);
    return out;
  }

  // Members whose removal leaves the shared sources intact, every remaining
  // member reachable from the entry, and no remaining member calling them.
  std::vector<std::string> non_minimal(const Mefr &region, const SourceSet &other) const {
    const auto &g = side.graph;
    std::unordered_map<NodeIndex, std::size_t> pos;
    for (std::size_t i = 0; i < region.members.size(); ++i)
      pos.emplace(region.members[i], i);
    std::map<SourceFunctionKey, std::size_t> shared_count;
    for (NodeIndex v : region.members)
      if (const auto *e = entry_of(v))
        for (const auto &k : e->sf_set)
          if (contains_key(other, k))
            ++shared_count[k];

    std::vector<std::string> out;
    std::vector<char> seen(region.members.size());
    std::vector<NodeIndex> stack;
    for (std::size_t xi = 1; xi < region.members.size(); ++xi) {
      NodeIndex x = region.members[xi];
      bool shrinks = false;
      if (const auto *e = entry_of(x))
        for (const auto &k : e->sf_set) {
          auto it = shared_count.find(k);
          if (it != shared_count.end() && it->second == 1) {
            shrinks = true;
            break;
          }
        }
      if (shrinks)
        continue;
      bool called = false;
      for (NodeIndex p : g.predecessors(x))
        if (p != x && pos.contains(p)) {
          called = true;
          break;
        }
      if (called)
        continue;
      std::fill(seen.begin(), seen.end(), 0);
      seen[0] = 1;
      seen[xi] = 1;
      stack.assign(1, region.entry);
      std::size_t reached = 1;
      while (!stack.empty()) {
        NodeIndex u = stack.back();
        stack.pop_back();
        for (NodeIndex v : g.successors(u)) {
          auto it = pos.find(v);
          if (it == pos.end() || seen[it->second])
            continue;
          seen[it->second] = 1;
          ++reached;
          stack.push_back(v);
        }
      }
      if (reached < region.members.size() - 1)
        continue;
      out.push_back(g.function(x).name);
    }
    return out;
  }
};

} // namespace

ValidationReport validate_mefr_pair(const MefrSide &left, const MefrSide &right) {
  ValidationReport rep;
  SideIndex L(left, rep.unmatched_left), R(right, rep.unmatched_right);
  for (const auto &[osf, li] : L.by_osf) {
    auto rit = R.by_osf.find(osf);
    const Mefr &lr = left.partition.regions[li];
    if (rit == R.by_osf.end()) {
      rep.unmatched_left.push_back(left.graph.function(lr.entry).name);
      continue;
    }
    const Mefr &rr = right.partition.regions[rit->second];
    RegionCheck c;
    c.osf = osf;
    c.left_entry = left.graph.function(lr.entry).name;
    c.right_entry = right.graph.function(rr.entry).name;
    SourceSet ls = L.sources(lr), rs = R.sources(rr);
    std::size_t inter = set_intersection(ls, rs).size();
    c.jaccard = Ratio::of(inter, ls.size() + rs.size() - inter);
    c.only_left = set_difference(ls, rs);
    c.only_right = set_difference(rs, ls);
    c.non_minimal_left = L.non_minimal(lr, rs);
    c.non_minimal_right = R.non_minimal(rr, ls);
    rep.regions.push_back(std::move(c));
  }
  for (const auto &[osf, ri] : R.by_osf)
    if (!L.by_osf.contains(osf))
      rep.unmatched_right.push_back(right.graph.function(right.partition.regions[ri].entry).name);
  std::sort(rep.unmatched_left.begin(), rep.unmatched_left.end());
  std::sort(rep.unmatched_right.begin(), rep.unmatched_right.end());
  return rep;
}

std::string to_mefr_json(const MefrPartition &p, const FunctionCallGraph &g) {
  Json regions = Json::array();
  for (const auto &r : p.regions) {
    Json members = Json::array();
    for (NodeIndex v : r.members)
      members.push_back(g.function(v).name);
    regions.push_back({{"entry", g.function(r.entry).name}, {"members", std::move(members)}});
  }
  Json unassigned = Json::array();
  for (NodeIndex v : p.unassigned)
    unassigned.push_back(g.function(v).name);
  Json j;
  j["schema"] = "mefr/1";
  j["graph_id"] = p.graph_id;
  j["setting"] = setting_to_json(g.setting());
  j["mode"] = std::string(to_string(p.mode));
  j["regions"] = std::move(regions);
  j["unassigned"] = std::move(unassigned);
  j["contested_count"] = p.contested_count;
  return dump_json(j);
}

MefrPartition parse_mefr_json(std::string_view text, const FunctionCallGraph &g) {
  Json j = parse_json(text, "mefr");
  expect_schema(j, "mefr/1", "mefr");
  MefrPartition p;
  p.graph_id = require_string(j, "graph_id", "mefr: ");
  if (p.graph_id != g.binary_id())
    fail(ErrorKind::IdMismatch, "mefr: graph_id \"" + p.graph_id + "\" does not match graph \"" +
                                    g.binary_id() + "\"");
  p.mode = parse_mefr_mode(require_string(j, "mode", "mefr: "));
  auto node = [&](const Json &v, const std::string &locus) {
    if (!v.is_string())
      fail(ErrorKind::Schema, locus + ": expected a function name");
    auto n = g.find(v.get<std::string>());
    if (!n)
      fail(ErrorKind::UnknownFunction, locus + ": \"" + v.get<std::string>() + "\" not in graph");
    return *n;
  };
  const Json &regions = require_array(j, "regions", "mefr: ");
  for (std::size_t i = 0; i < regions.size(); ++i) {
    std::string locus = "mefr: /regions/" + std::to_string(i);
    Mefr m;
    m.entry = node(require(regions[i], "entry", locus), locus + "/entry");
    const Json &members = require_array(regions[i], "members", locus);
    for (std::size_t k = 0; k < members.size(); ++k)
      m.members.push_back(node(members[k], locus + "/members/" + std::to_string(k)));
    if (m.members.empty() || m.members.front() != m.entry)
      fail(ErrorKind::Schema, locus + ": members must start with the entry");
    p.regions.push_back(std::move(m));
  }
  const Json &un = require_array(j, "unassigned", "mefr: ");
  for (std::size_t k = 0; k < un.size(); ++k)
    p.unassigned.push_back(node(un[k], "mefr: /unassigned/" + std::to_string(k)));
  p.contested_count = static_cast<std::size_t>(require_int(j, "contested_count", "mefr: "));
  return p;
}

std::string to_validation_json(const ValidationReport &r, const std::string &left_label,
                               const std::string &right_label) {
  auto keys = [](const SourceSet &s) {
    Json a = Json::array();
    for (const auto &k : s)
      a.push_back({{"file", k.file}, {"name", k.name}});
    return a;
  };
  Json regions = Json::array();
  for (const auto &c : r.regions) {
    Json jc;
    jc["osf"] = {{"file", c.osf.file}, {"name", c.osf.name}};
    jc["left_entry"] = c.left_entry;
    jc["right_entry"] = c.right_entry;
    jc["jaccard"] = c.jaccard.value();
    jc["equivalent"] = c.equivalent();
    jc["minimal"] = c.minimal();
    jc["only_left"] = keys(c.only_left);
    jc["only_right"] = keys(c.only_right);
    jc["non_minimal_left"] = c.non_minimal_left;
    jc["non_minimal_right"] = c.non_minimal_right;
    regions.push_back(std::move(jc));
  }
  Json j;
  j["schema"] = "mefr-validation/1";
  j["left"] = left_label;
  j["right"] = right_label;
  j["all_equivalent"] = r.all_equivalent();
  j["all_minimal"] = r.all_minimal();
  j["regions"] = std::move(regions);
  j["unmatched_left"] = r.unmatched_left;
  j["unmatched_right"] = r.unmatched_right;
  return dump_json(j);
}

} // namespace mefr
