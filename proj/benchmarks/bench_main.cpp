#include <benchmark/benchmark.h>

#include "flowdep/context.hpp"
#include "flowdep/embedding.hpp"
#include "flowdep/forest.hpp"
#include "flowdep/oracle.hpp"
#include "flowdep/sampler.hpp"
#include "flowdep/synth.hpp"
#include "flowdep/walks.hpp"

using namespace flowdep;

namespace {

const SynthTrace& trace() {
  static const SynthTrace t = [] {
    ScenarioConfig sc;
    sc.noise_fraction = 0.2;
    sc.rng_seed = 7;
    return generate_scenario(sc);
  }();
  return t;
}

const CommGraph& graph() {
  static const CommGraph g = [] {
    SamplerConfig cfg;
    cfg.internal_prefixes = {CidrPrefix::parse("10.0.0.0/8")};
    cfg.m_external = 20;
    return sample_graph(trace().flows, cfg).graph;
  }();
  return g;
}

void BM_SampleGraph(benchmark::State& state) {
  SamplerConfig cfg;
  cfg.internal_prefixes = {CidrPrefix::parse("10.0.0.0/8")};
  cfg.m_external = 20;
  cfg.k_edges = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sample_graph(trace().flows, cfg));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(trace().flows.size()));
}
BENCHMARK(BM_SampleGraph)->Arg(5000)->Arg(20000)->Unit(benchmark::kMillisecond);

void BM_PositiveWalks(benchmark::State& state) {
  WalkConfig cfg;
  cfg.walk_length = static_cast<std::size_t>(state.range(0));
  std::size_t walks = 0;
  for (auto _ : state) {
    const auto w = generate_walks(graph(), cfg);
    walks += w.size();
    benchmark::DoNotOptimize(w.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(walks));
}
BENCHMARK(BM_PositiveWalks)->Arg(5)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_Oracle(benchmark::State& state) {
  const OracleConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(run_oracle(trace().flows, cfg));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(trace().flows.size()));
}
BENCHMARK(BM_Oracle)->Unit(benchmark::kMillisecond);

void BM_EmbeddingEpoch(benchmark::State& state) {
  WalkConfig wc;
  const auto positives = generate_walks(graph(), wc);
  const auto negatives = generate_negative_walks(graph(), positives, wc);
  const SplitOptions ctx;
  const auto pos = split_walks(positives, ctx);
  const auto neg = split_walks(negatives, ctx);
  EmbeddingConfig cfg;
  cfg.dims = static_cast<std::size_t>(state.range(0));
  cfg.epochs = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(train_embedding(pos, neg, graph().addresses(), cfg));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(pos.size() + neg.size()));
}
BENCHMARK(BM_EmbeddingEpoch)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_ForestTrain(benchmark::State& state) {
  Rng rng(3);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  Dataset data;
  std::vector<float> x(64);
  for (int i = 0; i < 1000; ++i) {
    for (auto& v : x) v = u(rng);
    data.add(x, x[0] * x[1] + x[2] > 0.0f);
  }
  ForestConfig cfg;
  cfg.n_trees = static_cast<std::size_t>(state.range(0));
  cfg.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(RandomForest::train(data, cfg));
}
BENCHMARK(BM_ForestTrain)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
