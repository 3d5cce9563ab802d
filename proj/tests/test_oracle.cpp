#include <gtest/gtest.h>

#include <random>

#include "mefr/error.hpp"
#include "mefr/oracle.hpp"
#include "mefr/reference.hpp"
#include "mefr/synth.hpp"
#include "support.hpp"

using namespace mefr;
using namespace mefr::testing;

namespace {

std::vector<NodeIndex> nodes(const FunctionCallGraph &g, std::initializer_list<const char *> ns) {
  std::vector<NodeIndex> out;
  for (const char *n : ns)
    out.push_back(g.index_of(n));
  return out;
}

std::vector<std::string> sorted_names(const FunctionCallGraph &g, std::vector<NodeIndex> v) {
  auto out = names(g, v);
  std::sort(out.begin(), out.end());
  return out;
}

// main -> f -> g -> h, h never inlined. The optimized build folds f and g
// into main.
struct TwoBuilds {
  FunctionCallGraph g0 = make_graph({"main", "f", "g", "h"},
                                    {{"main", "f"}, {"f", "g"}, {"g", "h"}}, "p:O0");
  FunctionCallGraph g1 = make_graph({"main", "h"}, {{"main", "h"}}, "p:O2", Optimization::O2);
  Binary2SourceMap m0 = identity_b2s(g0);
  Binary2SourceMap m1 = make_b2s(g1, {{"main", keys({"main", "f", "g"})}, {"h", keys({"h"})}});
};

} // namespace

TEST(Boundaries, NeverInlinedSourcesAcrossSettings) {
  TwoBuilds t;
  std::vector<Binary2SourceMap> maps{t.m0, t.m1};
  auto cb = identify_boundaries(maps);
  EXPECT_EQ(cb.never_inlined, keys({"h", "main"}));
  ASSERT_EQ(cb.per_graph.size(), 2u);
  EXPECT_EQ(cb.per_graph[0].graph_id, "p:O0");
  ASSERT_EQ(cb.per_graph[0].boundary.size(), 2u);
  EXPECT_EQ(cb.per_graph[0].boundary[0].name, "main");
  EXPECT_EQ(cb.per_graph[0].boundary[1].name, "h");
  EXPECT_EQ(cb.per_graph[1].boundary.size(), 2u);
}

TEST(Boundaries, MappingRouteAgrees) {
  TwoBuilds t;
  std::vector<Binary2SourceMap> maps{t.m0, t.m1};
  std::vector<MappingClassification> cls{build_b2b(t.m0, t.m1)};
  auto a = identify_boundaries(maps);
  auto b = identify_boundaries_from_mappings(maps, cls);
  EXPECT_EQ(a.never_inlined, b.never_inlined);
  for (std::size_t i = 0; i < 2; ++i)
    EXPECT_EQ(a.per_graph[i].boundary, b.per_graph[i].boundary);
}

TEST(Boundaries, InlinedIntoCallerIsNotBoundary) {
  // bsFinishWrite keeps its own body at O0 and lands in BZ2_compressBlock at O2.
  auto g0 = make_graph({"BZ2_compressBlock", "bsFinishWrite"},
                       {{"BZ2_compressBlock", "bsFinishWrite"}}, "bz:O0");
  auto g1 = make_graph({"BZ2_compressBlock"}, {}, "bz:O2", Optimization::O2);
  std::vector<Binary2SourceMap> maps{
      identity_b2s(g0), make_b2s(g1, {{"BZ2_compressBlock", keys({"BZ2_compressBlock", "bsFinishWrite"})}})};
  auto cb = identify_boundaries(maps);
  EXPECT_EQ(cb.never_inlined, keys({"BZ2_compressBlock"}));
  EXPECT_EQ(cb.per_graph[0].boundary.size(), 1u);
}

TEST(Boundaries, SingleSettingRejected) {
  TwoBuilds t;
  std::vector<Binary2SourceMap> one{t.m0};
  try {
    identify_boundaries(one);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::SingleSetting);
  }
}

TEST(Regions, BoundaryCalleeStartsItsOwnRegion) {
  auto g = make_graph({"A", "B", "C", "D"}, {{"A", "B"}, {"B", "C"}, {"B", "D"}});
  auto p = construct_mefrs(g, nodes(g, {"A", "C"}), MefrMode::Partition);
  ASSERT_EQ(p.regions.size(), 2u);
  EXPECT_EQ(sorted_names(g, p.regions[0].members), (std::vector<std::string>{"A", "B", "D"}));
  EXPECT_EQ(names(g, p.regions[1].members), std::vector<std::string>{"C"});
  EXPECT_TRUE(p.unassigned.empty());
  EXPECT_EQ(p.contested_count, 0u);
}

TEST(Regions, SharedCalleeOverlapsInVerbatimAndGoesToLowerEntryInPartition) {
  auto g = make_graph({"A", "B", "E"}, {{"A", "B"}, {"E", "B"}});
  auto v = construct_mefrs(g, nodes(g, {"A", "E"}), MefrMode::Verbatim);
  EXPECT_EQ(sorted_names(g, v.regions[0].members), (std::vector<std::string>{"A", "B"}));
  EXPECT_EQ(sorted_names(g, v.regions[1].members), (std::vector<std::string>{"B", "E"}));
  EXPECT_EQ(v.contested_count, 1u);
  auto p = construct_mefrs(g, nodes(g, {"E", "A"}), MefrMode::Partition);
  EXPECT_EQ(sorted_names(g, p.regions[0].members), (std::vector<std::string>{"A", "B"}));
  EXPECT_EQ(names(g, p.regions[1].members), std::vector<std::string>{"E"});
  EXPECT_EQ(p.contested_count, 1u);
}

TEST(Regions, EveryNodeBoundaryGivesSingletons) {
  auto g = make_graph({"a", "b", "c"}, {{"a", "b"}, {"b", "c"}, {"c", "a"}});
  auto p = construct_mefrs(g, nodes(g, {"a", "b", "c"}), MefrMode::Partition);
  ASSERT_EQ(p.regions.size(), 3u);
  for (const auto &r : p.regions)
    EXPECT_EQ(r.members.size(), 1u);
}

TEST(Regions, UnreachableNodesAreUnassignedAndCyclesTerminate) {
  auto g = make_graph({"a", "b", "c", "orphan"}, {{"a", "b"}, {"b", "c"}, {"c", "b"}, {"b", "b"}});
  TraversalStats stats;
  auto p = construct_mefrs(g, nodes(g, {"a"}), MefrMode::Verbatim, &stats);
  EXPECT_EQ(sorted_names(g, p.regions[0].members), (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(names(g, p.unassigned), std::vector<std::string>{"orphan"});
  ASSERT_EQ(stats.pops.size(), 1u);
  EXPECT_EQ(stats.pops[0], 3u);
  EXPECT_EQ(stats.insertions[0], 2u);
}

TEST(Regions, EmptyBoundaryLeavesEverythingUnassigned) {
  auto g = make_graph({"a", "b"}, {{"a", "b"}});
  auto p = construct_mefrs(g, {}, MefrMode::Partition);
  EXPECT_TRUE(p.regions.empty());
  EXPECT_EQ(p.unassigned.size(), 2u);
}

TEST(Regions, OutOfRangeBoundaryIsPrecondition) {
  auto g = make_graph({"a"}, {});
  std::vector<NodeIndex> bad{5};
  try {
    construct_mefrs(g, bad, MefrMode::Partition);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::Precondition);
  }
}

TEST(Regions, MatchesQueueReferenceOnRandomGraphs) {
  std::mt19937_64 rng(99);
  for (int round = 0; round < 200; ++round) {
    std::size_t n = 1 + rng() % 40;
    std::vector<std::string> ns;
    for (std::size_t i = 0; i < n; ++i)
      ns.push_back("n" + std::to_string(i));
    std::vector<std::pair<std::string, std::string>> es;
    for (std::size_t k = rng() % (3 * n + 1); k > 0; --k)
      es.push_back({ns[rng() % n], ns[rng() % n]});
    auto g = make_graph(ns, es);
    std::vector<NodeIndex> boundary;
    for (std::size_t i = 0; i < n; ++i)
      if (rng() % 4 == 0)
        boundary.push_back(static_cast<NodeIndex>(i));
    for (auto mode : {MefrMode::Verbatim, MefrMode::Partition}) {
      auto fast = construct_mefrs(g, boundary, mode);
      auto ref = reference::construct_mefrs(g, boundary, mode);
      ASSERT_EQ(fast.regions.size(), ref.regions.size());
      for (std::size_t i = 0; i < fast.regions.size(); ++i) {
        EXPECT_EQ(fast.regions[i].entry, ref.regions[i].entry);
        auto a = fast.regions[i].members, b = ref.regions[i].members;
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        EXPECT_EQ(a, b) << "round " << round;
      }
      EXPECT_EQ(fast.unassigned, ref.unassigned);
      EXPECT_EQ(fast.contested_count, ref.contested_count);
    }
  }
}

TEST(Regions, BoundaryOrderDoesNotMatter) {
  auto c = generate_corpus({.seed = 8, .n_source_functions = 150});
  const auto &t = c.settings.back();
  std::vector<Binary2SourceMap> maps;
  for (const auto &s : c.settings)
    maps.push_back(s.b2s);
  auto b = boundary_nodes(t.graph, identify_boundaries(maps).per_graph.back());
  auto p1 = construct_mefrs(t.graph, b, MefrMode::Partition);
  std::shuffle(b.begin(), b.end(), std::mt19937_64(3));
  EXPECT_EQ(construct_mefrs(t.graph, b, MefrMode::Partition), p1);
}

TEST(Validation, EquivalentRegionsAcrossBuilds) {
  TwoBuilds t;
  std::vector<Binary2SourceMap> maps{t.m0, t.m1};
  auto cb = identify_boundaries(maps);
  auto p0 = construct_mefrs(t.g0, boundary_nodes(t.g0, cb.per_graph[0]), MefrMode::Verbatim);
  auto p1 = construct_mefrs(t.g1, boundary_nodes(t.g1, cb.per_graph[1]), MefrMode::Verbatim);
  auto r = validate_mefr_pair({p0, t.g0, t.m0}, {p1, t.g1, t.m1});
  ASSERT_EQ(r.regions.size(), 2u);
  EXPECT_TRUE(r.all_equivalent());
  EXPECT_TRUE(r.all_minimal());
  for (const auto &c : r.regions)
    EXPECT_EQ(c.jaccard, Ratio::of(1, 1));
  EXPECT_EQ(r.regions[1].osf, key("main"));
  EXPECT_EQ(r.regions[1].left_entry, "main");
  EXPECT_TRUE(r.unmatched_left.empty());
  EXPECT_EQ(region_sources(p0.regions[0], t.g0, t.m0), keys({"f", "g", "main"}));
}

TEST(Validation, DetectsMissingSourceAndUnmatchedEntries) {
  TwoBuilds t;
  auto bad = make_b2s(t.g1, {{"main", keys({"main", "f"})}, {"h", keys({"h"})}});
  auto p0 = construct_mefrs(t.g0, nodes(t.g0, {"main", "h"}), MefrMode::Verbatim);
  auto p1 = construct_mefrs(t.g1, nodes(t.g1, {"main"}), MefrMode::Verbatim);
  auto r = validate_mefr_pair({p0, t.g0, t.m0}, {p1, t.g1, bad});
  EXPECT_FALSE(r.all_equivalent());
  ASSERT_EQ(r.regions.size(), 1u);
  EXPECT_EQ(r.regions[0].only_left, keys({"g"}));
  EXPECT_EQ(r.regions[0].only_right, keys({"h"}));
  EXPECT_EQ(r.regions[0].jaccard, Ratio::of(2, 4));
  EXPECT_EQ(r.unmatched_left, std::vector<std::string>{"h"});
}

TEST(Validation, RedundantMemberIsNotMinimal) {
  // "x" duplicates f's source and nothing calls it.
  auto g0 = make_graph({"main", "f", "x"}, {{"main", "f"}}, "p:O0");
  auto g1 = make_graph({"main"}, {}, "p:O2", Optimization::O2);
  auto m0 = make_b2s(g0, {{"main", keys({"main"})}, {"f", keys({"f"})}, {"x", keys({"f"})}});
  auto m1 = make_b2s(g1, {{"main", keys({"main", "f"})}});
  MefrPartition p0{"p:O0", MefrMode::Verbatim, {{0, {0, 1, 2}}}, {}, 0};
  auto p1 = construct_mefrs(g1, nodes(g1, {"main"}), MefrMode::Verbatim);
  auto r = validate_mefr_pair({p0, g0, m0}, {p1, g1, m1});
  EXPECT_TRUE(r.all_equivalent());
  EXPECT_FALSE(r.all_minimal());
  EXPECT_EQ(r.regions[0].non_minimal_left, std::vector<std::string>{"x"});
}

TEST(Json, MefrRoundTripAndIdCheck) {
  auto g = make_graph({"A", "B", "C", "D"}, {{"A", "B"}, {"B", "C"}, {"B", "D"}}, "p:O0");
  auto p = construct_mefrs(g, nodes(g, {"A", "C"}), MefrMode::Verbatim);
  auto text = to_mefr_json(p, g);
  EXPECT_EQ(parse_mefr_json(text, g), p);
  auto other = make_graph({"A"}, {}, "p:O3");
  try {
    parse_mefr_json(text, other);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::IdMismatch);
  }
  EXPECT_EQ(parse_mefr_mode("verbatim"), MefrMode::Verbatim);
  EXPECT_THROW(parse_mefr_mode("fuzzy"), Error);
}
