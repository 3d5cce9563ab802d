#include "metric_oracle.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "mefr/error.hpp"
#include "mefr/metrics.hpp"
#include "mefr/reference.hpp"
#include "support.hpp"

namespace mefr::testing {

namespace {

using Keys = std::set<std::string>;

std::string flat(const SourceFunctionKey &k) { return k.file + "\x1f" + k.name; }

Keys footprint(const Binary2SourceMap &b, const std::string &name) {
  for (const auto &e : b.entries)
    if (e.function.name == name) {
      Keys out;
      for (const auto &k : e.sf_set)
        out.insert(flat(k));
      return out;
    }
  return {};
}

// The source key named like the function, when its footprint holds one.
std::string own_key(const Binary2SourceMap &b, const std::string &name) {
  for (const auto &e : b.entries)
    if (e.function.name == name)
      for (const auto &k : e.sf_set)
        if (k.name == name)
          return flat(k);
  return {};
}

std::set<NodeIndex> nbhd(const FunctionCallGraph &g, NodeIndex u) {
  std::set<NodeIndex> out;
  for (const auto &e : g.edges()) {
    if (e.caller == u && e.callee != u)
      out.insert(e.callee);
    if (e.callee == u && e.caller != u)
      out.insert(e.caller);
  }
  return out;
}

bool same(Frac a, Frac b) {
  if (a.second == 0)
    a = {1, 1};
  if (b.second == 0)
    b = {1, 1};
  return a.first * b.second == b.first * a.second;
}

bool same(const Ratio &r, Frac f) { return same(Frac{r.num, r.den}, f); }

// a > b
bool greater(Frac a, Frac b) { return a.first * b.second > b.first * a.second; }

std::string text(Frac f) { return std::to_string(f.first) + "/" + std::to_string(f.second); }
std::string text(const Ratio &r) { return std::to_string(r.num) + "/" + std::to_string(r.den); }

FunctionCallGraph random_graph(std::mt19937_64 &rng, const std::string &id,
                               const std::vector<std::string> &pool) {
  std::size_t n = 1 + rng() % 20;
  std::vector<std::string> names = pool;
  std::shuffle(names.begin(), names.end(), rng);
  names.resize(n);
  std::vector<std::pair<std::string, std::string>> edges;
  for (std::size_t k = rng() % (2 * n + 1); k > 0; --k)
    edges.push_back({names[rng() % n], names[rng() % n]});
  return make_graph(names, edges, id);
}

Binary2SourceMap random_b2s(std::mt19937_64 &rng, const FunctionCallGraph &g,
                            const std::vector<std::string> &pool) {
  std::vector<std::pair<std::string, SourceSet>> rows;
  for (const auto &f : g.functions()) {
    SourceSet sf;
    if (rng() % 10 != 0)
      sf.push_back(key(f.name));
    for (std::size_t k = rng() % 3; k > 0; --k)
      sf.push_back(key(pool[rng() % pool.size()]));
    if (sf.empty())
      sf.push_back(key(pool[rng() % pool.size()]));
    canonicalize(sf);
    rows.push_back({f.name, sf});
  }
  return make_b2s(g, rows);
}

std::vector<NodeIndex> random_subset(std::mt19937_64 &rng, std::size_t n) {
  std::vector<NodeIndex> out;
  for (std::size_t i = 0; i < n; ++i)
    if (rng() % 5 < 2)
      out.push_back(static_cast<NodeIndex>(i));
  return out;
}

} // namespace

MetricInstance random_metric_instance(std::mt19937_64 &rng) {
  std::vector<std::string> pool;
  for (int i = 0; i < 24; ++i)
    pool.push_back("fn" + std::to_string(i));
  MetricInstance m;
  m.g1 = random_graph(rng, "m:1", pool);
  m.g2 = random_graph(rng, "m:2", pool);
  m.b1 = random_b2s(rng, m.g1, pool);
  m.b2 = random_b2s(rng, m.g2, pool);
  m.boundary1 = random_subset(rng, m.g1.size());
  m.boundary2 = random_subset(rng, m.g2.size());
  m.oracle = construct_mefrs(m.g1, m.boundary1, rng() % 2 ? MefrMode::Verbatim : MefrMode::Partition);

  const std::size_t n = m.g1.size();
  const std::size_t k = 1 + rng() % std::min<std::size_t>(20, n);
  std::vector<std::vector<NodeIndex>> groups(k);
  for (std::size_t v = 0; v < n; ++v)
    groups[rng() % k].push_back(static_cast<NodeIndex>(v));
  m.decomposition.graph_id = m.g1.binary_id();
  m.decomposition.method = "random";
  m.decomposition.overlapping = rng() % 3 == 0;
  if (m.decomposition.overlapping)
    for (std::size_t extra = rng() % (n + 1); extra > 0; --extra)
      groups[rng() % k].push_back(static_cast<NodeIndex>(rng() % n));
  std::set<std::string> ids;
  for (auto &grp : groups) {
    if (grp.empty())
      continue;
    std::sort(grp.begin(), grp.end());
    grp.erase(std::unique(grp.begin(), grp.end()), grp.end());
    std::string id;
    do {
      id = std::string("c") + static_cast<char>('a' + rng() % 5) + static_cast<char>('a' + rng() % 5);
    } while (ids.count(id));
    ids.insert(id);
    m.decomposition.communities.push_back({id, grp});
  }
  if (rng() % 5 == 0)
    m.decomposition.communities[rng() % m.decomposition.communities.size()].id =
        std::string(kUnassignedCommunity);
  return m;
}

std::vector<std::pair<NodeIndex, NodeIndex>> brute_anchor_pairs(const MetricInstance &m) {
  std::vector<std::pair<NodeIndex, NodeIndex>> out;
  for (NodeIndex u : m.boundary1) {
    std::string ku = own_key(m.b1, m.g1.function(u).name);
    if (ku.empty())
      continue;
    for (NodeIndex v : m.boundary2)
      if (own_key(m.b2, m.g2.function(v).name) == ku)
        out.emplace_back(u, v);
  }
  std::sort(out.begin(), out.end());
  return out;
}

Frac brute_anchor_stability(const MetricInstance &m) {
  std::size_t matched = brute_anchor_pairs(m).size();
  return {matched, m.g1.size() + m.g2.size() - matched};
}

std::vector<Frac> brute_neighbor_stabilities(const MetricInstance &m) {
  auto pairs = brute_anchor_pairs(m);
  std::set<std::pair<NodeIndex, NodeIndex>> matched(pairs.begin(), pairs.end());
  std::vector<Frac> out;
  for (auto [u, v] : pairs) {
    auto nu = nbhd(m.g1, u), nv = nbhd(m.g2, v);
    std::size_t both = 0;
    for (NodeIndex x : nu)
      for (NodeIndex y : nv)
        both += matched.count({x, y});
    out.push_back({both, nu.size() + nv.size() - both});
  }
  return out;
}

std::vector<std::vector<std::string>> brute_community_footprints(const MetricInstance &m) {
  std::vector<std::vector<std::string>> out;
  for (const auto &c : m.decomposition.communities) {
    Keys sf;
    for (NodeIndex v : c.members) {
      auto f = footprint(m.b1, m.g1.function(v).name);
      sf.insert(f.begin(), f.end());
    }
    out.emplace_back(sf.begin(), sf.end());
  }
  return out;
}

std::vector<BruteScore> brute_scores(const MetricInstance &m) {
  auto comm = brute_community_footprints(m);
  std::vector<BruteScore> out;
  for (const auto &r : m.oracle.regions) {
    Keys sf;
    for (NodeIndex v : r.members) {
      auto f = footprint(m.b1, m.g1.function(v).name);
      sf.insert(f.begin(), f.end());
    }
    BruteScore best;
    bool have = false;
    for (std::size_t i = 0; i < comm.size(); ++i) {
      const auto &c = m.decomposition.communities[i];
      if (c.id == kUnassignedCommunity)
        continue;
      std::size_t inter = 0;
      for (const auto &k : comm[i])
        inter += sf.count(k);
      Frac sim{inter, sf.size() + comm[i].size() - inter};
      bool better = !have || greater(sim, best.similarity) ||
                    (same(sim, best.similarity) &&
                     (comm[i].size() < best.best_sf_size ||
                      (comm[i].size() == best.best_sf_size && c.id < best.best_id)));
      if (better) {
        have = true;
        best.best_id = c.id;
        best.best_sf_size = comm[i].size();
        best.similarity = sim;
      }
    }
    best.sf_size = sf.size();
    best.granularity = {best.best_sf_size, sf.size()};
    if (have)
      out.push_back(best);
  }
  return out;
}

std::string compare_metrics(const MetricInstance &m) {
  std::ostringstream err;
  auto c = match_anchors(m.g1, m.b1, m.boundary1, m.g2, m.b2, m.boundary2);
  auto pairs = brute_anchor_pairs(m);
  if (c.pairs != pairs)
    return "anchor pairs differ";
  if (!same(anchor_stability(c), brute_anchor_stability(m)))
    return "anchor stability " + text(anchor_stability(c)) + " vs " +
           text(brute_anchor_stability(m));
  auto nb = neighbor_stabilities(m.g1, m.g2, c);
  auto bnb = brute_neighbor_stabilities(m);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (!same(nb[i], bnb[i]))
      return "neighbor stability of pair " + std::to_string(i) + ": " + text(nb[i]) + " vs " +
             text(bnb[i]);
    if (!same(neighbor_stability(pairs[i].first, pairs[i].second, m.g1, m.g2, c), bnb[i]))
      return "single-pair neighbor stability differs";
  }

  auto comm = brute_community_footprints(m);
  std::vector<SourceSet> sfs;
  for (std::size_t i = 0; i < comm.size(); ++i) {
    sfs.push_back(community_sf(m.decomposition.communities[i], m.g1, m.b1));
    std::vector<std::string> lib;
    for (const auto &k : sfs.back())
      lib.push_back(flat(k));
    if (lib != comm[i])
      return "footprint of community " + m.decomposition.communities[i].id + " differs";
  }
  for (const auto &r : m.oracle.regions) {
    auto msf = region_sources(r, m.g1, m.b1);
    Keys mk;
    for (const auto &k : msf)
      mk.insert(flat(k));
    for (std::size_t i = 0; i < comm.size(); ++i) {
      std::size_t inter = 0;
      for (const auto &k : comm[i])
        inter += mk.count(k);
      if (!same(community_similarity(msf, sfs[i]), {inter, mk.size() + comm[i].size() - inter}))
        return "similarity differs";
    }
  }

  auto expected = brute_scores(m);
  const bool none_eligible =
      std::none_of(m.decomposition.communities.begin(), m.decomposition.communities.end(),
                   [](const Community &c) { return c.id != kUnassignedCommunity; });
  try {
    auto rep = evaluate_decomposition(m.oracle, m.decomposition, m.g1, m.b1);
    if (none_eligible)
      return "evaluate accepted a decomposition with no eligible community";
    if (rep.per_mefr.size() != expected.size())
      return "score count differs";
    for (std::size_t i = 0; i < expected.size(); ++i) {
      const auto &a = rep.per_mefr[i];
      const auto &b = expected[i];
      if (a.best_community != b.best_id || a.sf_size != b.sf_size ||
          a.best_sf_size != b.best_sf_size || !same(a.similarity, b.similarity) ||
          !same(a.granularity, b.granularity)) {
        err << "region " << a.entry << ": library " << a.best_community << " "
            << text(a.similarity) << " " << text(a.granularity) << ", brute " << b.best_id << " "
            << text(b.similarity) << " " << text(b.granularity);
        return err.str();
      }
    }
    auto ref = reference::evaluate_decomposition(m.oracle, m.decomposition, m.g1, m.b1);
    if (ref.per_mefr != rep.per_mefr)
      return "reference evaluation differs";
  } catch (const Error &e) {
    if (!(none_eligible && e.kind() == ErrorKind::EmptyDecomposition))
      return std::string("unexpected error: ") + e.what();
  }
  return {};
}

} // namespace mefr::testing
