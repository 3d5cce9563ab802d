#include "mefr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <map>
#include <sstream>
#include <unordered_map>

#include "mefr/error.hpp"

namespace mefr {

AnchorCorrespondence match_anchors(const FunctionCallGraph &g1, const Binary2SourceMap &b1,
                                   std::span<const NodeIndex> boundary1,
                                   const FunctionCallGraph &g2, const Binary2SourceMap &b2,
                                   std::span<const NodeIndex> boundary2) {
  auto by_osf = [](const FunctionCallGraph &g, const Binary2SourceMap &b,
                   std::span<const NodeIndex> boundary) {
    auto idx = b.name_index();
    std::map<SourceFunctionKey, NodeIndex> out;
    std::vector<NodeIndex> sorted(boundary.begin(), boundary.end());
    std::sort(sorted.begin(), sorted.end());
    for (NodeIndex v : sorted) {
      auto it = idx.find(g.function(v).name);
      if (it == idx.end())
        fail(ErrorKind::UnknownFunction,
             "boundary function \"" + g.function(v).name + "\" absent from b2s of " + b.binary_id);
      const auto &osf = b.entries[it->second].osf;
      if (osf)
        out.emplace(*osf, v);
    }
    return out;
  };
  auto l = by_osf(g1, b1, boundary1);
  auto r = by_osf(g2, b2, boundary2);
  AnchorCorrespondence c;
  c.left_total = g1.size();
  c.right_total = g2.size();
  for (const auto &[k, u] : l)
    if (auto it = r.find(k); it != r.end())
      c.pairs.emplace_back(u, it->second);
  std::sort(c.pairs.begin(), c.pairs.end());
  return c;
}

Ratio anchor_stability(const AnchorCorrespondence &c) {
  const std::size_t k = c.pairs.size();
  return Ratio::of(k, c.left_total + c.right_total - k);
}

namespace {

Ratio neighbor_ratio(NodeIndex u, NodeIndex v, const FunctionCallGraph &g1,
                     const FunctionCallGraph &g2,
                     const std::unordered_map<NodeIndex, NodeIndex> &left_to_right) {
  const auto nu = g1.neighbors(u);
  const auto nv = g2.neighbors(v);
  std::size_t matched = 0;
  for (NodeIndex p : nu) {
    auto it = left_to_right.find(p);
    if (it != left_to_right.end() && std::binary_search(nv.begin(), nv.end(), it->second))
      ++matched;
  }
  return Ratio::of(matched, nu.size() + nv.size() - matched);
}

std::unordered_map<NodeIndex, NodeIndex> left_map(const AnchorCorrespondence &c) {
  std::unordered_map<NodeIndex, NodeIndex> m;
  for (const auto &[a, b] : c.pairs)
    m.emplace(a, b);
  return m;
}

} // namespace

Ratio neighbor_stability(NodeIndex u, NodeIndex v, const FunctionCallGraph &g1,
                         const FunctionCallGraph &g2, const AnchorCorrespondence &c) {
  if (!std::binary_search(c.pairs.begin(), c.pairs.end(), std::pair{u, v}))
    fail(ErrorKind::Precondition, "neighbor stability: (" + g1.function(u).name + ", " +
                                      g2.function(v).name + ") is not an anchor pair");
  return neighbor_ratio(u, v, g1, g2, left_map(c));
}

std::vector<Ratio> neighbor_stabilities(const FunctionCallGraph &g1, const FunctionCallGraph &g2,
                                        const AnchorCorrespondence &c) {
  const auto m = left_map(c);
  std::vector<Ratio> out(c.pairs.size());
#pragma omp parallel for schedule(dynamic, 32)
  for (std::size_t i = 0; i < c.pairs.size(); ++i)
    out[i] = neighbor_ratio(c.pairs[i].first, c.pairs[i].second, g1, g2, m);
  return out;
}

SourceSet community_sf(const Community &c, const FunctionCallGraph &g, const Binary2SourceMap &b2s) {
  auto idx = b2s.name_index();
  SourceSet out;
  for (NodeIndex v : c.members) {
    const auto &name = g.function(v).name;
    auto it = idx.find(name);
    if (it == idx.end())
      fail(ErrorKind::UnknownFunction,
           "community \"" + c.id + "\" member \"" + name + "\" absent from b2s");
    const auto &sf = b2s.entries[it->second].sf_set;
    out.insert(out.end(), sf.begin(), sf.end());
  }
  canonicalize(out);
  return out;
}

Ratio community_similarity(const SourceSet &a, const SourceSet &b) {
  std::size_t inter = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j)
      ++i;
    else if (*j < *i)
      ++j;
    else {
      ++inter;
      ++i;
      ++j;
    }
  }
  return Ratio::of(inter, a.size() + b.size() - inter);
}

namespace {

// True when candidate (sim, size, id) beats the incumbent.
bool better(Ratio sim, std::size_t size, const std::string &id, Ratio best_sim,
            std::size_t best_size, const std::string &best_id) {
  if (sim != best_sim)
    return sim > best_sim;
  if (size != best_size)
    return size < best_size;
  return id < best_id;
}

} // namespace

NearestCommunity nearest_community(const SourceSet &mefr_sf, std::span<const Community> communities,
                                   std::span<const SourceSet> community_sfs) {
  if (communities.size() != community_sfs.size())
    fail(ErrorKind::Precondition, "nearest_community: footprint count does not match communities");
  std::optional<NearestCommunity> best;
  for (std::size_t i = 0; i < communities.size(); ++i) {
    if (communities[i].id == kUnassignedCommunity)
      continue;
    Ratio sim = community_similarity(mefr_sf, community_sfs[i]);
    if (!best || better(sim, community_sfs[i].size(), communities[i].id, best->similarity,
                        best->sf_size, communities[best->index].id))
      best = NearestCommunity{i, sim, community_sfs[i].size()};
  }
  if (!best)
    fail(ErrorKind::EmptyDecomposition, "nearest_community: decomposition has no communities");
  return *best;
}

Ratio granularity_error(const SourceSet &mefr_sf, const SourceSet &best_sf) {
  if (mefr_sf.empty())
    fail(ErrorKind::Precondition, "granularity: MEFR footprint is empty");
  return Ratio{best_sf.size(), mefr_sf.size()};
}

Summary summarize(std::vector<double> values) {
  Summary s;
  s.count = values.size();
  if (values.empty())
    return s;
  std::sort(values.begin(), values.end());
  auto q = [&](double p) {
    double pos = p * static_cast<double>(values.size() - 1);
    auto lo = static_cast<std::size_t>(std::floor(pos));
    std::size_t hi = std::min(lo + 1, values.size() - 1);
    double frac = pos - static_cast<double>(lo);
    return values[lo] + (values[hi] - values[lo]) * frac;
  };
  s.min = values.front();
  s.max = values.back();
  s.q1 = q(0.25);
  s.median = q(0.5);
  s.q3 = q(0.75);
  double sum = 0;
  for (double v : values)
    sum += v;
  s.mean = sum / static_cast<double>(values.size());
  return s;
}

Histogram histogram(std::span<const double> values, std::vector<double> edges) {
  if (edges.size() < 2 || !std::is_sorted(edges.begin(), edges.end()) ||
      std::adjacent_find(edges.begin(), edges.end()) != edges.end())
    fail(ErrorKind::Precondition, "histogram: need at least two strictly increasing edges");
  Histogram h;
  h.edges = std::move(edges);
  h.counts.assign(h.edges.size() - 1, 0);
  for (double v : values) {
    if (v < h.edges.front()) {
      ++h.below;
    } else if (v > h.edges.back()) {
      ++h.above;
    } else if (v == h.edges.back()) {
      ++h.counts.back();
    } else {
      auto it = std::upper_bound(h.edges.begin(), h.edges.end(), v);
      ++h.counts[static_cast<std::size_t>(it - h.edges.begin()) - 1];
    }
  }
  return h;
}

void finalize_report(MetricReport &r, const EvalOptions &opts) {
  std::vector<double> sims, grans;
  for (const auto &s : r.per_mefr) {
    sims.push_back(s.similarity.value());
    grans.push_back(s.granularity.value());
  }
  r.similarity_hist = histogram(sims, opts.similarity_edges);
  r.granularity_hist = histogram(grans, opts.granularity_edges);
  r.similarity = summarize(std::move(sims));
  r.granularity = summarize(std::move(grans));
}

MetricReport evaluate_decomposition(const MefrPartition &oracle, const Decomposition &decomposition,
                                    const FunctionCallGraph &g, const Binary2SourceMap &b2s,
                                    const EvalOptions &opts) {
  if (oracle.graph_id != g.binary_id() || decomposition.graph_id != g.binary_id())
    fail(ErrorKind::IdMismatch, "evaluate: oracle \"" + oracle.graph_id + "\", decomposition \"" +
                                    decomposition.graph_id + "\" and graph \"" + g.binary_id() +
                                    "\" disagree");

  // Intern source keys and resolve every node's footprint once.
  std::map<SourceFunctionKey, std::uint32_t> key_ids;
  for (const auto &e : b2s.entries)
    for (const auto &k : e.sf_set)
      key_ids.emplace(k, 0);
  std::uint32_t next = 0;
  for (auto &[k, id] : key_ids)
    id = next++;
  auto idx = b2s.name_index();
  std::vector<std::vector<std::uint32_t>> node_keys(g.size());
  std::vector<char> node_known(g.size(), 0);
  for (NodeIndex v = 0; v < g.size(); ++v) {
    auto it = idx.find(g.function(v).name);
    if (it == idx.end())
      continue;
    node_known[v] = 1;
    for (const auto &k : b2s.entries[it->second].sf_set)
      node_keys[v].push_back(key_ids.at(k));
  }
  auto footprint = [&](std::span<const NodeIndex> members, const std::string &owner) {
    std::vector<std::uint32_t> out;
    for (NodeIndex v : members) {
      if (!node_known[v])
        fail(ErrorKind::UnknownFunction,
             "\"" + owner + "\" member \"" + g.function(v).name + "\" absent from b2s");
      out.insert(out.end(), node_keys[v].begin(), node_keys[v].end());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  };

  const auto &comms = decomposition.communities;
  std::vector<std::vector<std::uint32_t>> comm_sf(comms.size());
  std::vector<std::vector<std::uint32_t>> postings(key_ids.size());
  std::optional<std::size_t> fallback; // best among communities sharing nothing
  for (std::size_t c = 0; c < comms.size(); ++c) {
    comm_sf[c] = footprint(comms[c].members, comms[c].id);
    if (comms[c].id == kUnassignedCommunity)
      continue;
    for (auto k : comm_sf[c])
      postings[k].push_back(static_cast<std::uint32_t>(c));
    if (!fallback || better(Ratio{0, 1}, comm_sf[c].size(), comms[c].id, Ratio{0, 1},
                            comm_sf[*fallback].size(), comms[*fallback].id))
      fallback = c;
  }
  if (!fallback)
    fail(ErrorKind::EmptyDecomposition, "evaluate: decomposition \"" + decomposition.method +
                                            "\" has no communities");

  MetricReport r;
  r.graph_id = g.binary_id();
  r.method = decomposition.method;
  r.per_mefr.resize(oracle.regions.size());
  std::exception_ptr err;

#pragma omp parallel
  {
    std::vector<std::uint32_t> count(comms.size(), 0);
    std::vector<std::uint32_t> touched;
#pragma omp for schedule(dynamic, 4)
    for (std::size_t i = 0; i < oracle.regions.size(); ++i) {
      try {
        const auto &region = oracle.regions[i];
        const auto &entry = g.function(region.entry).name;
        auto sf = footprint(region.members, entry);
        if (sf.empty())
          fail(ErrorKind::Precondition, "evaluate: MEFR \"" + entry + "\" has an empty footprint");
        touched.clear();
        for (auto k : sf)
          for (auto c : postings[k])
            if (count[c]++ == 0)
              touched.push_back(c);
        std::size_t best = *fallback;
        Ratio best_sim{0, 1};
        for (auto c : touched) {
          const std::size_t inter = count[c];
          Ratio sim = Ratio::of(inter, sf.size() + comm_sf[c].size() - inter);
          if (better(sim, comm_sf[c].size(), comms[c].id, best_sim, comm_sf[best].size(),
                     comms[best].id)) {
            best = c;
            best_sim = sim;
          }
          count[c] = 0;
        }
        auto &s = r.per_mefr[i];
        s.entry = entry;
        s.members = region.members.size();
        s.sf_size = sf.size();
        s.best_community = comms[best].id;
        s.best_sf_size = comm_sf[best].size();
        s.similarity = best_sim;
        s.granularity = Ratio{comm_sf[best].size(), sf.size()};
      } catch (...) {
#pragma omp critical(mefr_eval_error)
        if (!err)
          err = std::current_exception();
      }
    }
  }
  if (err)
    std::rethrow_exception(err);
  finalize_report(r, opts);
  return r;
}

Json summary_to_json(const Summary &s) {
  return {{"count", s.count}, {"min", s.min},   {"q1", s.q1},   {"median", s.median},
          {"q3", s.q3},       {"mean", s.mean}, {"max", s.max}};
}

Json histogram_to_json(const Histogram &h) {
  return {{"edges", h.edges}, {"counts", h.counts}, {"below", h.below}, {"above", h.above}};
}

namespace {

std::string ratio_text(const Ratio &r) {
  return std::to_string(r.num) + "/" + std::to_string(r.den);
}

} // namespace

std::string to_report_json(const MetricReport &r) {
  Json regions = Json::array();
  for (const auto &s : r.per_mefr) {
    Json j;
    j["entry"] = s.entry;
    j["members"] = s.members;
    j["sf_size"] = s.sf_size;
    j["best_community"] = s.best_community;
    j["best_sf_size"] = s.best_sf_size;
    j["similarity"] = s.similarity.value();
    j["similarity_exact"] = ratio_text(s.similarity);
    j["granularity"] = s.granularity.value();
    j["granularity_exact"] = ratio_text(s.granularity);
    regions.push_back(std::move(j));
  }
  Json j;
  j["schema"] = "report/1";
  j["graph_id"] = r.graph_id;
  j["method"] = r.method;
  j["conventions"] = {{"empty_over_empty", 1.0}, {"quantiles", "linear"}};
  j["summary"] = {{"similarity", summary_to_json(r.similarity)},
                  {"granularity", summary_to_json(r.granularity)}};
  j["histograms"] = {{"similarity", histogram_to_json(r.similarity_hist)},
                     {"granularity", histogram_to_json(r.granularity_hist)}};
  j["regions"] = std::move(regions);
  return dump_json(j);
}

namespace {

std::string csv_field(const std::string &s) {
  if (s.find_first_of(",\"\n") == std::string::npos)
    return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"')
      out += '"';
    out += ch;
  }
  return out + "\"";
}

std::string fixed(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

} // namespace

std::string to_report_csv(const MetricReport &r) {
  std::string out =
      "entry,members,sf_size,best_community,best_sf_size,similarity,granularity\n";
  for (const auto &s : r.per_mefr) {
    out += csv_field(s.entry) + "," + std::to_string(s.members) + "," +
           std::to_string(s.sf_size) + "," + csv_field(s.best_community) + "," +
           std::to_string(s.best_sf_size) + "," + fixed(s.similarity.value()) + "," +
           fixed(s.granularity.value()) + "\n";
  }
  return out;
}

} // namespace mefr
