#include <gtest/gtest.h>

#include <filesystem>

#include "mefr/error.hpp"
#include "mefr/graph.hpp"
#include "mefr/io.hpp"
#include "support.hpp"

using namespace mefr;
using namespace mefr::testing;

namespace {

ErrorKind kind_of(const std::function<void()> &f) {
  try {
    f();
  } catch (const Error &e) {
    return e.kind();
  }
  ADD_FAILURE() << "no mefr::Error thrown";
  return ErrorKind::Io;
}

const char *kThree = R"({
  "schema": "fcg/1", "binary_id": "demo",
  "setting": {"compiler": "gcc-11.2.0", "optimization": "O2", "architecture": "x86_64"},
  "functions": [
    {"name": "main", "start": "0x1000", "end": "0x1040"},
    {"name": "helper", "start": "0x1040", "end": "0x1050"},
    {"name": "leaf", "start": "0x1050", "end": "0x1060"}
  ],
  "calls": [{"caller": "main", "callee": "helper", "site": "0x1004"},
            {"caller": "helper", "callee": "leaf"}]
})";

} // namespace

TEST(Normalize, StripsCloneSuffixesRepeatedly) {
  EXPECT_EQ(normalize_name("foo.isra.0"), "foo");
  EXPECT_EQ(normalize_name("foo.constprop.1.isra.0"), "foo");
  EXPECT_EQ(normalize_name("foo.part.3.cold.7"), "foo");
  EXPECT_EQ(normalize_name("foo.lto_priv.0"), "foo.lto_priv.0");
  EXPECT_EQ(normalize_name("foo.isra"), "foo.isra");
}

TEST(Normalize, LeadingUnderscoreOnlyWhenSourceKnowsTheBareName) {
  NameSet src{"bar", "_both", "both"};
  EXPECT_EQ(normalize_name("_bar", &src), "bar");
  EXPECT_EQ(normalize_name("_both", &src), "_both");
  EXPECT_EQ(normalize_name("_baz", &src), "_baz");
  EXPECT_EQ(normalize_name("__bar", &src), "__bar");
  EXPECT_EQ(normalize_name("_bar"), "_bar");
}

TEST(Setting, LabelsRoundTrip) {
  auto s = make_setting("clang-13.0.1", Optimization::Ofast, Architecture::arm_64);
  EXPECT_EQ(s.label(), "clang-13.0.1/Ofast/arm_64");
  EXPECT_EQ(parse_setting_label(s.label()), s);
  EXPECT_EQ(kind_of([] { make_setting("gcc", Optimization::O0, Architecture::x86_64); }),
            ErrorKind::Schema);
  EXPECT_TRUE(is_valid_compiler_string("gcc-4.9.4"));
  EXPECT_FALSE(is_valid_compiler_string("gcc 11"));
}

TEST(Ingest, LoadsThreeFunctionsTwoCalls) {
  auto g = parse_fcg_json(kThree);
  EXPECT_EQ(g.size(), 3u);
  EXPECT_EQ(g.edges().size(), 2u);
  EXPECT_EQ(g.binary_id(), "demo");
  EXPECT_EQ(g.setting().optimization, Optimization::O2);
  EXPECT_EQ(g.edges()[0].site, std::optional<std::uint64_t>(0x1004));
}

TEST(Ingest, CloneCollisionIsDuplicateNameListingBoth) {
  std::string doc = R"({"schema":"fcg/1","binary_id":"x",
    "setting":{"compiler":"gcc-11.2.0","optimization":"O2","architecture":"x86_64"},
    "functions":[{"name":"foo","start":"0x10","end":"0x20"},
                 {"name":"foo.isra.0","start":"0x20","end":"0x30"}],
    "calls":[]})";
  try {
    parse_fcg_json(doc);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::DuplicateName);
    EXPECT_NE(std::string(e.what()).find("foo.isra.0"), std::string::npos);
  }
}

TEST(Ingest, DanglingCallerRejected) {
  std::string doc = R"({"schema":"fcg/1","binary_id":"x",
    "setting":{"compiler":"gcc-11.2.0","optimization":"O2","architecture":"x86_64"},
    "functions":[{"name":"foo","start":"0x10","end":"0x20"}],
    "calls":[{"caller":"missing","callee":"foo"}]})";
  EXPECT_EQ(kind_of([&] { parse_fcg_json(doc); }), ErrorKind::DanglingEdge);
}

TEST(Ingest, SchemaErrorsCarryLocus) {
  std::string doc = R"({"schema":"fcg/1","binary_id":"x",
    "setting":{"compiler":"gcc-11.2.0","optimization":"O2","architecture":"x86_64"},
    "functions":[{"name":"foo","start":"16","end":"0x20"}], "calls":[]})";
  try {
    parse_fcg_json(doc);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::Schema);
    EXPECT_NE(std::string(e.what()).find("/functions/0"), std::string::npos) << e.what();
  }
  EXPECT_EQ(kind_of([] { parse_fcg_json("{\"schema\": \"fcg/2\"}"); }), ErrorKind::Schema);
  EXPECT_EQ(kind_of([] { parse_fcg_json("{not json"); }), ErrorKind::Schema);
}

TEST(Ingest, OverlappingRangesRejected) {
  std::vector<BinaryFunctionId> fs{{"a", 0x10, 0x30}, {"b", 0x20, 0x40}};
  EXPECT_EQ(kind_of([&] { FunctionCallGraph::build("x", gcc(Optimization::O0), fs, {}); }),
            ErrorKind::Overlap);
  std::vector<BinaryFunctionId> empty{{"a", 0x10, 0x10}};
  EXPECT_EQ(kind_of([&] { FunctionCallGraph::build("x", gcc(Optimization::O0), empty, {}); }),
            ErrorKind::Schema);
}

TEST(Emit, EmptyGraphRoundTrips) {
  auto g = FunctionCallGraph::build("empty", gcc(Optimization::O0), {}, {});
  auto text = to_fcg_json(g);
  auto j = parse_json(text, "t");
  EXPECT_TRUE(j["functions"].empty());
  EXPECT_TRUE(j["calls"].empty());
  EXPECT_EQ(parse_fcg_json(text), g);
}

TEST(Emit, ParallelEdgesPreservedAndRoundTrip) {
  auto g = make_graph({"foo", "bar"}, {{"foo", "bar"}, {"foo", "bar"}});
  auto text = to_fcg_json(g);
  EXPECT_EQ(parse_json(text, "t")["calls"].size(), 2u);
  auto dir = std::filesystem::temp_directory_path() / "mefr_test_emit";
  emit_fcg(g, dir / "g.json");
  EXPECT_EQ(ingest_fcg(dir / "g.json"), g);
  EXPECT_EQ(text.find("0X"), std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST(Emit, NodesOrderedByAddressRegardlessOfInputOrder) {
  std::vector<BinaryFunctionId> fs{{"c", 0x30, 0x40}, {"a", 0x10, 0x20}, {"b", 0x20, 0x30}};
  std::vector<CallRecord> calls{{"c", "a", {}}, {"a", "b", {}}};
  auto g1 = FunctionCallGraph::build("x", gcc(Optimization::O0), fs, calls);
  std::reverse(fs.begin(), fs.end());
  std::reverse(calls.begin(), calls.end());
  auto g2 = FunctionCallGraph::build("x", gcc(Optimization::O0), fs, calls);
  EXPECT_EQ(g1, g2);
  EXPECT_EQ(g1.function(0).name, "a");
  EXPECT_EQ(to_fcg_json(g1), to_fcg_json(g2));
}

TEST(Adjacency, SuccessorsDeduplicatedInAddressOrder) {
  auto g = make_graph({"A", "B", "C"}, {{"A", "C"}, {"A", "B"}, {"A", "B"}});
  auto s = successors(g, g.function(g.index_of("A")));
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].name, "B");
  EXPECT_EQ(s[1].name, "C");
  EXPECT_TRUE(successors(g, g.function(g.index_of("C"))).empty());
}

TEST(Adjacency, SelfLoopIsSuccessorButNotNeighbor) {
  auto g = make_graph({"A"}, {{"A", "A"}});
  auto a = g.function(0);
  ASSERT_EQ(successors(g, a).size(), 1u);
  EXPECT_EQ(successors(g, a)[0].name, "A");
  EXPECT_TRUE(neighbors(g, a).empty());
}

TEST(Adjacency, NeighborsUnionBothDirections) {
  auto g = make_graph({"A", "B", "C", "D"}, {{"A", "B"}, {"B", "C"}});
  auto n = neighbors(g, g.function(g.index_of("B")));
  ASSERT_EQ(n.size(), 2u);
  EXPECT_EQ(n[0].name, "A");
  EXPECT_EQ(n[1].name, "C");
  EXPECT_TRUE(neighbors(g, g.function(g.index_of("D"))).empty());
}

TEST(Adjacency, UnknownFunctionRejected) {
  auto g = make_graph({"A"}, {});
  EXPECT_EQ(kind_of([&] { successors(g, BinaryFunctionId{"Z", 1, 2}); }),
            ErrorKind::UnknownFunction);
  EXPECT_EQ(kind_of([&] { neighbors(g, BinaryFunctionId{"A", 0x1000, 0x1001}); }),
            ErrorKind::UnknownFunction);
}

TEST(Gml, ImportsNamedNodesAndIdEdges) {
  const char *gml = R"(graph [
    directed 1
    binary_id "demo"
    setting [ compiler "gcc-11.2.0" optimization "O2" architecture "x86_64" ]
    node [ id 0 label "main" start "0x1000" end "0x1010" ]
    node [ id 1 name "work.isra.0" start 4112 end 4128 ]
    edge [ source 0 target 1 ]
    edge [ caller "main" callee "work" site "0x1004" ]
  ])";
  auto g = parse_fcg_gml(gml);
  EXPECT_EQ(g.size(), 2u);
  EXPECT_EQ(g.edges().size(), 2u);
  EXPECT_TRUE(g.find("work").has_value());
  EXPECT_EQ(g.binary_id(), "demo");
}

TEST(Gml, MissingSettingIsSchemaError) {
  EXPECT_EQ(kind_of([] { parse_fcg_gml("graph [ binary_id \"x\" ]"); }), ErrorKind::Schema);
}

TEST(Ingest, RepeatedIngestIsIdentical) {
  EXPECT_EQ(to_fcg_json(parse_fcg_json(kThree)), to_fcg_json(parse_fcg_json(kThree)));
  EXPECT_EQ(to_fcg_json(parse_fcg_json(to_fcg_json(parse_fcg_json(kThree)))),
            to_fcg_json(parse_fcg_json(kThree)));
}
