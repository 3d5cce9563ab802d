#include <gtest/gtest.h>

#include <random>

#include "mefr/decomposers.hpp"
#include "mefr/error.hpp"
#include "mefr/metrics.hpp"
#include "mefr/synth.hpp"
#include "metric_oracle.hpp"
#include "support.hpp"

using namespace mefr;
using namespace mefr::testing;

namespace {

std::vector<NodeIndex> all_nodes(const FunctionCallGraph &g) {
  std::vector<NodeIndex> v(g.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = static_cast<NodeIndex>(i);
  return v;
}

} // namespace

TEST(AnchorStability, IdenticalGraphsAllBoundaryIsOne) {
  auto g = make_graph({"a", "b", "c"}, {{"a", "b"}});
  auto m = identity_b2s(g);
  auto c = match_anchors(g, m, all_nodes(g), g, m, all_nodes(g));
  EXPECT_EQ(anchor_stability(c), Ratio::of(1, 1));
}

TEST(AnchorStability, TwoMatchedOfFourFunctions) {
  auto g1 = make_graph({"f", "g", "h"}, {});
  auto g2 = make_graph({"f", "g", "k"}, {});
  auto c = match_anchors(g1, identity_b2s(g1), all_nodes(g1), g2, identity_b2s(g2), all_nodes(g2));
  EXPECT_EQ(c.pairs.size(), 2u);
  // h and k are not boundary functions, so only f and g survive.
  auto b1 = std::vector<NodeIndex>{g1.index_of("f"), g1.index_of("g")};
  auto b2 = std::vector<NodeIndex>{g2.index_of("f"), g2.index_of("g")};
  auto c2 = match_anchors(g1, identity_b2s(g1), b1, g2, identity_b2s(g2), b2);
  EXPECT_EQ(anchor_stability(c2), Ratio::of(2, 4));
  EXPECT_DOUBLE_EQ(anchor_stability(c2).value(), 0.5);
}

TEST(AnchorStability, SymmetricUnderSwap) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) {
    auto m = random_metric_instance(rng);
    auto ab = match_anchors(m.g1, m.b1, m.boundary1, m.g2, m.b2, m.boundary2);
    auto ba = match_anchors(m.g2, m.b2, m.boundary2, m.g1, m.b1, m.boundary1);
    EXPECT_EQ(anchor_stability(ab), anchor_stability(ba));
    auto nab = neighbor_stabilities(m.g1, m.g2, ab);
    auto nba = neighbor_stabilities(m.g2, m.g1, ba);
    std::map<std::pair<NodeIndex, NodeIndex>, Ratio> back;
    for (std::size_t k = 0; k < ba.pairs.size(); ++k)
      back[{ba.pairs[k].second, ba.pairs[k].first}] = nba[k];
    for (std::size_t k = 0; k < ab.pairs.size(); ++k)
      EXPECT_EQ(nab[k], back.at(ab.pairs[k]));
  }
}

TEST(NeighborStability, TwoSharedOfFourNeighbors) {
  auto g1 = make_graph({"u", "p", "q", "r"}, {{"u", "p"}, {"q", "u"}, {"u", "r"}});
  auto g2 = make_graph({"u", "p", "q", "s"}, {{"u", "p"}, {"u", "q"}, {"s", "u"}});
  auto bd1 = std::vector<NodeIndex>{0, 1, 2};
  auto bd2 = std::vector<NodeIndex>{0, 1, 2};
  auto c = match_anchors(g1, identity_b2s(g1), bd1, g2, identity_b2s(g2), bd2);
  EXPECT_EQ(neighbor_stability(g1.index_of("u"), g2.index_of("u"), g1, g2, c), Ratio::of(2, 4));
}

TEST(NeighborStability, IsolatedPairIsOneAndNonPairIsError) {
  auto g1 = make_graph({"u", "x"}, {});
  auto g2 = make_graph({"u", "y"}, {});
  auto b = std::vector<NodeIndex>{0, 1};
  auto c = match_anchors(g1, identity_b2s(g1), b, g2, identity_b2s(g2), b);
  EXPECT_EQ(neighbor_stability(0, 0, g1, g2, c), Ratio::of(1, 1));
  try {
    neighbor_stability(1, 1, g1, g2, c);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::Precondition);
  }
}

TEST(Footprint, SingletonAndInliningCommunities) {
  auto g = make_graph({"BZ2_compressBlock", "fallbackSort"}, {});
  auto m = make_b2s(g, {{"BZ2_compressBlock",
                         keys({"BZ2_compressBlock", "bsFinishWrite", "bsW", "bsPutUChar"})},
                        {"fallbackSort", keys({"fallbackSort"})}});
  EXPECT_EQ(community_sf({"s", {1}}, g, m), keys({"fallbackSort"}));
  EXPECT_EQ(community_sf({"b", {0}}, g, m).size(), 4u);
  auto partial = make_b2s(g, {{"fallbackSort", keys({"fallbackSort"})}});
  try {
    community_sf({"b", {0}}, g, partial);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnknownFunction);
    EXPECT_NE(std::string(e.what()).find("BZ2_compressBlock"), std::string::npos);
  }
}

TEST(Similarity, HandCases) {
  EXPECT_EQ(community_similarity(keys({"a", "b"}), keys({"a", "b"})), Ratio::of(1, 1));
  EXPECT_EQ(community_similarity(keys({"a", "b", "c"}), keys({"b", "c", "d"})), Ratio::of(2, 4));
  EXPECT_EQ(community_similarity(keys({"a"}), keys({"b"})), Ratio::of(0, 2));
  EXPECT_EQ(community_similarity({}, {}), Ratio::of(1, 1));
  EXPECT_EQ(community_similarity(keys({"a"}), {}), Ratio::of(0, 1));
}

TEST(Nearest, TiePrefersSmallerFootprintThenId) {
  std::vector<Community> cs{{"big", {0}}, {"small", {1}}};
  std::vector<SourceSet> sfs{keys({"a", "b", "c", "d"}), keys({"a"})};
  auto n = nearest_community(keys({"a", "b"}), cs, sfs);
  EXPECT_EQ(n.index, 1u);
  EXPECT_EQ(n.similarity, Ratio::of(1, 2));
  std::vector<Community> same{{"zeta", {0}}, {"alpha", {1}}};
  std::vector<SourceSet> same_sfs{keys({"a"}), keys({"b"})};
  EXPECT_EQ(nearest_community(keys({"a", "b"}), same, same_sfs).index, 1u);
}

TEST(Nearest, SkipsCatchAllAndRejectsEmpty) {
  std::vector<Community> cs{{std::string(kUnassignedCommunity), {0}}, {"x", {1}}};
  std::vector<SourceSet> sfs{keys({"a"}), keys({"z"})};
  EXPECT_EQ(nearest_community(keys({"a"}), cs, sfs).index, 1u);
  std::vector<Community> only{{std::string(kUnassignedCommunity), {0}}};
  std::vector<SourceSet> only_sfs{keys({"a"})};
  try {
    nearest_community(keys({"a"}), only, only_sfs);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyDecomposition);
  }
}

TEST(Granularity, HandCases) {
  EXPECT_EQ(granularity_error(keys({"a", "b", "c"}), keys({"a", "b", "c"})), Ratio::of(1, 1));
  EXPECT_EQ(granularity_error(keys({"a", "b", "c"}), keys({"a", "b", "c", "d", "e", "f"})),
            Ratio::of(2, 1));
}

TEST(Summary, QuartilesByInterpolation) {
  auto s = summarize({4, 1, 3, 2});
  EXPECT_EQ(s.count, 4u);
  EXPECT_DOUBLE_EQ(s.min, 1);
  EXPECT_DOUBLE_EQ(s.q1, 1.75);
  EXPECT_DOUBLE_EQ(s.median, 2.5);
  EXPECT_DOUBLE_EQ(s.q3, 3.25);
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_DOUBLE_EQ(s.max, 4);
  EXPECT_EQ(summarize({}).count, 0u);
  EXPECT_DOUBLE_EQ(summarize({7}).q3, 7);
}

TEST(Histogram, LastBucketClosedAndOutliersCounted) {
  std::vector<double> v{0.0, 0.5, 1.0, 1.5, -1};
  auto h = histogram(v, {0.0, 0.5, 1.0});
  EXPECT_EQ(h.counts, (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(h.below, 1u);
  EXPECT_EQ(h.above, 1u);
}

TEST(Evaluate, OracleAgainstItselfIsPerfect) {
  auto c = generate_corpus({.seed = 4, .n_source_functions = 120});
  std::vector<Binary2SourceMap> maps;
  for (const auto &t : c.settings)
    maps.push_back(t.b2s);
  auto cb = identify_boundaries(maps);
  for (std::size_t k = 0; k < c.settings.size(); ++k) {
    const auto &t = c.settings[k];
    for (auto mode : {MefrMode::Partition, MefrMode::Verbatim}) {
      auto p = construct_mefrs(t.graph, boundary_nodes(t.graph, cb.per_graph[k]), mode);
      auto r = evaluate_decomposition(p, decomposition_from_mefrs(p, t.graph), t.graph, t.b2s);
      for (const auto &s : r.per_mefr) {
        EXPECT_EQ(s.similarity, Ratio::of(1, 1)) << s.entry;
        EXPECT_EQ(s.granularity, Ratio::of(1, 1)) << s.entry;
      }
      EXPECT_DOUBLE_EQ(r.similarity.min, 1.0);
    }
  }
}

TEST(Evaluate, SingletonsUnderAggregateAMultiMemberRegion) {
  auto g = make_graph({"main", "f", "g"}, {{"main", "f"}, {"f", "g"}});
  auto m = identity_b2s(g);
  auto p = construct_mefrs(g, std::vector<NodeIndex>{0}, MefrMode::Partition);
  auto r = evaluate_decomposition(p, decompose_singleton(g), g, m);
  ASSERT_EQ(r.per_mefr.size(), 1u);
  EXPECT_LT(r.per_mefr[0].granularity, Ratio::of(1, 1));
  EXPECT_EQ(r.per_mefr[0].granularity, Ratio::of(1, 3));
}

TEST(Evaluate, IdMismatchAndEmptyFootprint) {
  auto g = make_graph({"a"}, {}, "one");
  auto p = construct_mefrs(g, std::vector<NodeIndex>{0}, MefrMode::Partition);
  auto d = decompose_singleton(g);
  d.graph_id = "other";
  try {
    evaluate_decomposition(p, d, g, identity_b2s(g));
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::IdMismatch);
  }
  auto empty = make_b2s(g, {{"a", {}}});
  EXPECT_THROW(evaluate_decomposition(p, decompose_singleton(g), g, empty), Error);
}

TEST(Evaluate, InvariantUnderCommunityReordering) {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 100; ++i) {
    auto m = random_metric_instance(rng);
    if (m.oracle.regions.empty())
      continue;
    try {
      auto a = evaluate_decomposition(m.oracle, m.decomposition, m.g1, m.b1);
      auto shuffled = m.decomposition;
      std::shuffle(shuffled.communities.begin(), shuffled.communities.end(), rng);
      auto b = evaluate_decomposition(m.oracle, shuffled, m.g1, m.b1);
      EXPECT_EQ(a.per_mefr, b.per_mefr);
    } catch (const Error &e) {
      EXPECT_EQ(e.kind(), ErrorKind::EmptyDecomposition);
    }
  }
}

TEST(Evaluate, MatchesExhaustiveRecomputation) {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 300; ++i) {
    auto m = random_metric_instance(rng);
    EXPECT_EQ(compare_metrics(m), "") << "instance " << i;
  }
}

TEST(Evaluate, ModularityOnSyntheticCorpusMatchesRecomputation) {
  auto c = generate_corpus({.seed = 12, .n_source_functions = 80});
  std::vector<Binary2SourceMap> maps;
  for (const auto &t : c.settings)
    maps.push_back(t.b2s);
  auto cb = identify_boundaries(maps);
  const auto &t = c.settings.back();
  MetricInstance m;
  m.g1 = m.g2 = t.graph;
  m.b1 = m.b2 = t.b2s;
  m.boundary1 = m.boundary2 = boundary_nodes(t.graph, cb.per_graph.back());
  m.oracle = construct_mefrs(t.graph, m.boundary1, MefrMode::Partition);
  m.decomposition = decompose_modularity(t.graph);
  EXPECT_EQ(compare_metrics(m), "");
}

TEST(Report, JsonAndCsvCarryEveryRegion) {
  auto g = make_graph({"main", "f", "g"}, {{"main", "f"}, {"f", "g"}});
  auto p = construct_mefrs(g, std::vector<NodeIndex>{0}, MefrMode::Partition);
  auto r = evaluate_decomposition(p, decompose_singleton(g), g, identity_b2s(g));
  auto j = parse_json(to_report_json(r), "report");
  EXPECT_EQ(j["schema"], "report/1");
  EXPECT_EQ(j["regions"].size(), 1u);
  EXPECT_EQ(j["regions"][0]["granularity_exact"], "1/3");
  auto csv = to_report_csv(r);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2);
}
