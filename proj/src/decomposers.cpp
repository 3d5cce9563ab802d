#include "mefr/decomposers.hpp"

#include <algorithm>
#include <map>

#include "mefr/error.hpp"

namespace mefr {

Decomposition decompose_singleton(const FunctionCallGraph &g) {
  Decomposition d;
  d.graph_id = g.binary_id();
  d.method = "singleton";
  for (NodeIndex v = 0; v < g.size(); ++v)
    d.communities.push_back({g.function(v).name, {v}});
  return d;
}

namespace {

// Undirected projection without self loops, as (u < v) -> weight.
std::map<std::pair<NodeIndex, NodeIndex>, std::int64_t> undirected_weights(const FunctionCallGraph &g,
                                                                           bool unit) {
  std::map<std::pair<NodeIndex, NodeIndex>, std::int64_t> w;
  for (const auto &e : g.edges()) {
    if (e.caller == e.callee)
      continue;
    auto key = std::minmax(e.caller, e.callee);
    auto &slot = w[{key.first, key.second}];
    slot = unit ? 1 : slot + 1;
  }
  return w;
}

} // namespace

Decomposition decompose_modularity(const FunctionCallGraph &g, const ModularityOptions &opts,
                                   std::vector<double> *trace) {
  if (opts.max_size && *opts.max_size < 1)
    fail(ErrorKind::Precondition, "modularity: max_size must be at least 1");
  const std::size_t n = g.size();
  const auto weights = undirected_weights(g, opts.unit_weights);

  std::int64_t m = 0;
  std::vector<std::int64_t> deg(n, 0), internal(n, 0);
  std::vector<std::map<NodeIndex, std::int64_t>> nb(n);
  for (const auto &[key, w] : weights) {
    m += w;
    deg[key.first] += w;
    deg[key.second] += w;
    nb[key.first][key.second] += w;
    nb[key.second][key.first] += w;
  }
  std::vector<std::vector<NodeIndex>> members(n);
  std::vector<char> alive(n, 1);
  for (NodeIndex v = 0; v < n; ++v)
    members[v] = {v};

  // Modularity scaled by 4m^2: sum over communities of 4m*internal - deg^2.
  std::int64_t q4 = 0;
  for (std::size_t v = 0; v < n; ++v)
    q4 -= deg[v] * deg[v];
  auto record = [&] {
    if (trace)
      trace->push_back(m == 0 ? 0.0 : static_cast<double>(q4) / (4.0 * double(m) * double(m)));
  };
  if (trace)
    trace->clear();
  record();

  const std::size_t cap = opts.max_size.value_or(n);
  while (true) {
    // Gain of merging a and b, scaled by 2m^2: 2m*e_ab - d_a*d_b.
    std::int64_t best = 0;
    NodeIndex ba = 0, bb = 0;
    bool found = false;
    for (NodeIndex a = 0; a < n; ++a) {
      if (!alive[a])
        continue;
      for (const auto &[b, e] : nb[a]) {
        if (b <= a || members[a].size() + members[b].size() > cap)
          continue;
        std::int64_t score = 2 * m * e - deg[a] * deg[b];
        if (score > best) {
          best = score;
          ba = a;
          bb = b;
          found = true;
        }
      }
    }
    if (!found)
      break;
    const std::int64_t e_ab = nb[ba][bb];
    q4 += 2 * (2 * m * e_ab - deg[ba] * deg[bb]);
    for (const auto &[c, w] : nb[bb]) {
      if (c == ba)
        continue;
      nb[ba][c] += w;
      nb[c].erase(bb);
      nb[c][ba] += w;
    }
    nb[ba].erase(bb);
    nb[bb].clear();
    internal[ba] += internal[bb] + e_ab;
    deg[ba] += deg[bb];
    members[ba].insert(members[ba].end(), members[bb].begin(), members[bb].end());
    std::sort(members[ba].begin(), members[ba].end());
    members[bb].clear();
    alive[bb] = 0;
    record();
  }

  Decomposition d;
  d.graph_id = g.binary_id();
  d.method = "modularity";
  for (NodeIndex a = 0; a < n; ++a)
    if (alive[a])
      d.communities.push_back({g.function(a).name, std::move(members[a])});
  return d;
}

double modularity(const FunctionCallGraph &g, const Decomposition &d, bool unit_weights) {
  if (d.overlapping)
    fail(ErrorKind::Precondition, "modularity is defined for non-overlapping decompositions");
  std::vector<std::size_t> label(g.size(), SIZE_MAX);
  for (std::size_t c = 0; c < d.communities.size(); ++c)
    for (NodeIndex v : d.communities[c].members)
      label.at(v) = c;
  const auto weights = undirected_weights(g, unit_weights);
  std::int64_t m = 0;
  std::vector<std::int64_t> in(d.communities.size(), 0), deg(d.communities.size(), 0);
  for (const auto &[key, w] : weights) {
    m += w;
    deg[label[key.first]] += w;
    deg[label[key.second]] += w;
    if (label[key.first] == label[key.second])
      in[label[key.first]] += w;
  }
  if (m == 0)
    return 0.0;
  std::int64_t q4 = 0;
  for (std::size_t c = 0; c < in.size(); ++c)
    q4 += 4 * m * in[c] - deg[c] * deg[c];
  return static_cast<double>(q4) / (4.0 * double(m) * double(m));
}

Decomposition decompose_expander(const FunctionCallGraph &g, std::size_t radius) {
  if (radius == 0)
    fail(ErrorKind::Precondition, "expander: radius must be at least 1");
  const std::size_t n = g.size();
  Decomposition d;
  d.graph_id = g.binary_id();
  d.method = "expander";
  d.overlapping = true;
  std::vector<std::uint32_t> stamp(n, 0);
  std::vector<NodeIndex> frontier, next;
  for (NodeIndex s = 0; s < n; ++s) {
    const std::uint32_t tag = s + 1;
    Community c{g.function(s).name, {s}};
    stamp[s] = tag;
    frontier.assign(1, s);
    for (std::size_t hop = 0; hop < radius && !frontier.empty(); ++hop) {
      next.clear();
      for (NodeIndex u : frontier) {
        for (auto adj : {g.successors(u), g.predecessors(u)})
          for (NodeIndex v : adj)
            if (stamp[v] != tag) {
              stamp[v] = tag;
              c.members.push_back(v);
              next.push_back(v);
            }
      }
      frontier.swap(next);
    }
    std::sort(c.members.begin(), c.members.end());
    d.communities.push_back(std::move(c));
  }
  return d;
}

Decomposition decompose_anchor_extension(const FunctionCallGraph &g,
                                         std::span<const NodeIndex> anchors,
                                         std::optional<std::size_t> hops) {
  const std::size_t n = g.size();
  constexpr NodeIndex kNone = UINT32_MAX;
  std::vector<NodeIndex> label(n, kNone);
  std::vector<NodeIndex> frontier;
  for (NodeIndex a : anchors) {
    if (a >= n)
      fail(ErrorKind::Precondition, "anchor_extension: anchor " + std::to_string(a) +
                                        " out of range");
    if (label[a] == kNone) {
      label[a] = a;
      frontier.push_back(a);
    }
  }
  std::sort(frontier.begin(), frontier.end());
  std::vector<NodeIndex> next;
  for (std::size_t depth = 0; !frontier.empty() && (!hops || depth < *hops); ++depth) {
    next.clear();
    // Candidates discovered this level keep the lowest-address anchor.
    std::map<NodeIndex, NodeIndex> claim;
    for (NodeIndex u : frontier)
      for (NodeIndex v : g.successors(u)) {
        if (label[v] != kNone)
          continue;
        auto [it, fresh] = claim.emplace(v, label[u]);
        if (!fresh)
          it->second = std::min(it->second, label[u]);
      }
    for (const auto &[v, a] : claim) {
      label[v] = a;
      next.push_back(v);
    }
    frontier.swap(next);
  }

  std::map<NodeIndex, std::vector<NodeIndex>> groups;
  std::vector<NodeIndex> rest;
  for (NodeIndex v = 0; v < n; ++v) {
    if (label[v] == kNone)
      rest.push_back(v);
    else
      groups[label[v]].push_back(v);
  }
  Decomposition d;
  d.graph_id = g.binary_id();
  d.method = "anchor_extension";
  for (auto &[a, members] : groups)
    d.communities.push_back({g.function(a).name, std::move(members)});
  if (!rest.empty())
    d.communities.push_back({std::string(kUnassignedCommunity), std::move(rest)});
  return d;
}

} // namespace mefr
