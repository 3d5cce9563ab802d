// Parallel kernels against their serial reference versions on synthetic
// corpora. Arg is the number of source functions.

#include <benchmark/benchmark.h>

#include <map>
#include <memory>

#include "mefr/decomposers.hpp"
#include "mefr/reference.hpp"
#include "mefr/synth.hpp"

using namespace mefr;

namespace {

struct Fixture {
  SynthCorpus corpus;
  std::vector<NodeIndex> boundary;
  MefrPartition oracle;
  Decomposition modularity;
};

const Fixture &fixture(std::size_t n) {
  static std::map<std::size_t, std::unique_ptr<Fixture>> cache;
  auto &slot = cache[n];
  if (!slot) {
    SynthConfig cfg;
    cfg.seed = 42;
    cfg.n_source_functions = n;
    cfg.n_settings = 3;
    cfg.edge_density = 0.35;
    slot = std::make_unique<Fixture>();
    slot->corpus = generate_corpus(cfg);
    std::vector<Binary2SourceMap> maps;
    for (const auto &t : slot->corpus.settings)
      maps.push_back(t.b2s);
    const auto &t = slot->corpus.settings.back();
    slot->boundary = boundary_nodes(t.graph, identify_boundaries(maps).per_graph.back());
    slot->oracle = construct_mefrs(t.graph, slot->boundary, MefrMode::Partition);
    slot->modularity = decompose_modularity(t.graph, {std::size_t{13}});
  }
  return *slot;
}

void BM_B2b_Parallel(benchmark::State &st) {
  const auto &f = fixture(st.range(0));
  for (auto _ : st)
    benchmark::DoNotOptimize(build_b2b(f.corpus.settings[0].b2s, f.corpus.settings.back().b2s));
}

void BM_B2b_Reference(benchmark::State &st) {
  const auto &f = fixture(st.range(0));
  for (auto _ : st)
    benchmark::DoNotOptimize(
        reference::build_b2b(f.corpus.settings[0].b2s, f.corpus.settings.back().b2s));
}

void BM_Mefr_Parallel(benchmark::State &st) {
  const auto &f = fixture(st.range(0));
  const auto &g = f.corpus.settings.back().graph;
  for (auto _ : st)
    benchmark::DoNotOptimize(construct_mefrs(g, f.boundary, MefrMode::Partition));
}

void BM_Mefr_Reference(benchmark::State &st) {
  const auto &f = fixture(st.range(0));
  const auto &g = f.corpus.settings.back().graph;
  for (auto _ : st)
    benchmark::DoNotOptimize(reference::construct_mefrs(g, f.boundary, MefrMode::Partition));
}

void BM_Eval_Parallel(benchmark::State &st) {
  const auto &f = fixture(st.range(0));
  const auto &t = f.corpus.settings.back();
  for (auto _ : st)
    benchmark::DoNotOptimize(evaluate_decomposition(f.oracle, f.modularity, t.graph, t.b2s));
}

void BM_Eval_Reference(benchmark::State &st) {
  const auto &f = fixture(st.range(0));
  const auto &t = f.corpus.settings.back();
  for (auto _ : st)
    benchmark::DoNotOptimize(
        reference::evaluate_decomposition(f.oracle, f.modularity, t.graph, t.b2s));
}

} // namespace

BENCHMARK(BM_B2b_Parallel)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_B2b_Reference)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Mefr_Parallel)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Mefr_Reference)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Eval_Parallel)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Eval_Reference)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
