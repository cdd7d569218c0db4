#include <benchmark/benchmark.h>

#include "cilyric/connector.h"
#include "cilyric/curation.h"
#include "cilyric/eval.h"
#include "toy_workspace.h"

namespace cilyric {
namespace {

const testing::ToyWorkspace& Toy() { return testing::ToyWorkspace::Get(); }

void BM_CurateToyCorpus(benchmark::State& state) {
  const auto& toy = Toy();
  const auto trees = LoadTrees(testing::DataDir() / "toy/trees.jsonl");
  for (auto _ : state) benchmark::DoNotOptimize(Curate(toy.corpus, trees));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(trees.size()));
}
BENCHMARK(BM_CurateToyCorpus)->Unit(benchmark::kMillisecond);

void BM_RankBySimilarity(benchmark::State& state) {
  const auto& toy = Toy();
  const Vector topic = TopicVector(toy.View(), "明月照孤舟");
  for (auto _ : state) benchmark::DoNotOptimize(RankBySimilarity(topic, toy.phrases, toy.matrix));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(toy.phrases.size()));
}
BENCHMARK(BM_RankBySimilarity)->Unit(benchmark::kMillisecond);

void BM_NaiveBayesScore(benchmark::State& state) {
  const auto scorer = Toy().TrainScorer();
  for (auto _ : state) benchmark::DoNotOptimize(scorer.Predict("明月几时有，把酒问青天", "不知天上"));
}
BENCHMARK(BM_NaiveBayesScore);

void BM_Generate(benchmark::State& state) {
  const auto& toy = Toy();
  auto scorer = toy.TrainScorer();
  RunSettings settings;
  settings.generate.beam_width = static_cast<std::size_t>(state.range(0));
  const Prompt& prompt = toy.prompts.front();
  for (auto _ : state) benchmark::DoNotOptimize(GenerateForPrompt(toy.View(), prompt, scorer, settings, 0));
}
BENCHMARK(BM_Generate)->Arg(1)->Arg(4)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace cilyric

BENCHMARK_MAIN();
