#include "mefr/reference.hpp"

#include <algorithm>
#include <deque>
#include <set>

#include "mefr/error.hpp"

namespace mefr::reference {

MappingClassification build_b2b(const Binary2SourceMap &left, const Binary2SourceMap &right) {
  MappingClassification c;
  c.left_binary = left.binary_id;
  c.right_binary = right.binary_id;
  c.left_setting = left.setting;
  c.right_setting = right.setting;
  for (const auto &l : left.entries)
    for (const auto &r : right.entries)
      if (auto cls = classify_pair(l, r))
        c.pairs.push_back({l.function, r.function, *cls});
  std::sort(c.pairs.begin(), c.pairs.end(), [](const PairMapping &a, const PairMapping &b) {
    return std::pair(a.left.start_addr, a.right.start_addr) <
           std::pair(b.left.start_addr, b.right.start_addr);
  });
  return c;
}

MefrPartition construct_mefrs(const FunctionCallGraph &g, std::span<const NodeIndex> boundary,
                              MefrMode mode, std::size_t *s_dequeues) {
  const std::set<NodeIndex> P(boundary.begin(), boundary.end());
  std::deque<NodeIndex> Q(P.begin(), P.end());
  std::size_t dequeues = 0;
  MefrPartition out;
  out.graph_id = g.binary_id();
  out.mode = mode;
  while (!Q.empty()) {
    NodeIndex v = Q.front();
    Q.pop_front();
    Mefr m{v, {v}};
    std::set<NodeIndex> in_m{v};
    auto succ = g.successors(v);
    std::deque<NodeIndex> S(succ.begin(), succ.end());
    while (!S.empty()) {
      NodeIndex s = S.front();
      S.pop_front();
      ++dequeues;
      if (!P.contains(s) && !in_m.contains(s)) {
        in_m.insert(s);
        m.members.push_back(s);
        auto more = g.successors(s);
        S.insert(S.end(), more.begin(), more.end());
      }
    }
    out.regions.push_back(std::move(m));
  }

  std::vector<std::size_t> claims(g.size(), 0);
  for (const auto &r : out.regions)
    for (NodeIndex v : r.members)
      ++claims[v];
  for (NodeIndex v = 0; v < g.size(); ++v) {
    if (claims[v] == 0)
      out.unassigned.push_back(v);
    out.contested_count += claims[v] > 1;
  }
  if (mode == MefrMode::Partition) {
    std::set<NodeIndex> taken;
    for (auto &r : out.regions) {
      std::vector<NodeIndex> kept;
      for (NodeIndex v : r.members)
        if (taken.insert(v).second)
          kept.push_back(v);
      r.members = std::move(kept);
    }
  }
  if (s_dequeues)
    *s_dequeues = dequeues;
  return out;
}

MetricReport evaluate_decomposition(const MefrPartition &oracle, const Decomposition &decomposition,
                                    const FunctionCallGraph &g, const Binary2SourceMap &b2s,
                                    const EvalOptions &opts) {
  if (oracle.graph_id != g.binary_id() || decomposition.graph_id != g.binary_id())
    fail(ErrorKind::IdMismatch, "evaluate: graph ids disagree");
  std::vector<SourceSet> sfs;
  for (const auto &c : decomposition.communities)
    sfs.push_back(community_sf(c, g, b2s));
  MetricReport r;
  r.graph_id = g.binary_id();
  r.method = decomposition.method;
  for (const auto &region : oracle.regions) {
    const auto &entry = g.function(region.entry).name;
    Community as_community{entry, region.members};
    SourceSet sf = community_sf(as_community, g, b2s);
    auto best = nearest_community(sf, decomposition.communities, sfs);
    MefrScore s;
    s.entry = entry;
    s.members = region.members.size();
    s.sf_size = sf.size();
    s.best_community = decomposition.communities[best.index].id;
    s.best_sf_size = best.sf_size;
    s.similarity = best.similarity;
    s.granularity = granularity_error(sf, sfs[best.index]);
    r.per_mefr.push_back(std::move(s));
  }
  finalize_report(r, opts);
  return r;
}

} // namespace mefr::reference
