#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "hypro/eval.hpp"

namespace {

using namespace hypro;

void BM_TokenF1(benchmark::State& state) {
  const std::vector<std::string> golds = {"the Southeastern Conference", "SEC"};
  for (auto _ : state) benchmark::DoNotOptimize(token_f1("the Southeastern Conference ( SEC )", golds));
}
BENCHMARK(BM_TokenF1);

void BM_ScoreList(benchmark::State& state) {
  std::vector<std::string> preds, golds;
  for (int i = 0; i < state.range(0); ++i) {
    preds.push_back("Item number " + std::to_string(i));
    golds.push_back("item " + std::to_string(state.range(0) - i));
  }
  for (auto _ : state) benchmark::DoNotOptimize(score_list(preds, golds));
}
BENCHMARK(BM_ScoreList)->Arg(4)->Arg(32);

}  // namespace
