#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "hypro/retriever.hpp"

namespace {

using namespace hypro;

std::string random_text(std::mt19937_64& rng, std::size_t words) {
  static const std::vector<std::string> vocab = {"field", "base", "air", "force", "hawaii", "florida", "opened",
                                                 "team", "school", "conference", "series", "network", "premiere",
                                                 "season", "created", "named", "after", "general", "county", "city"};
  std::string out;
  for (std::size_t i = 0; i < words; ++i) out += (i ? " " : "") + vocab[rng() % vocab.size()];
  return out;
}

std::vector<RetrievalDoc> corpus(std::size_t docs, std::size_t words) {
  std::mt19937_64 rng(42);
  std::vector<RetrievalDoc> out;
  for (std::size_t d = 0; d < docs; ++d) out.emplace_back("d" + std::to_string(d), random_text(rng, words));
  return out;
}

void BM_TfidfBuild(benchmark::State& state) {
  const auto docs = corpus(static_cast<std::size_t>(state.range(0)), 60);
  for (auto _ : state) benchmark::DoNotOptimize(TfidfIndex::build(docs));
}
BENCHMARK(BM_TfidfBuild)->Arg(10)->Arg(100)->Arg(1000);

void BM_Lcs(benchmark::State& state) {
  std::mt19937_64 rng(7);
  const std::string a = random_text(rng, 12);
  const std::string b = random_text(rng, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(longest_common_substring(a, b));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * b.size()));
}
BENCHMARK(BM_Lcs)->Arg(50)->Arg(500);

void BM_HybridRetrieve(benchmark::State& state) {
  const auto docs = corpus(static_cast<std::size_t>(state.range(0)), 60);
  const std::string query = "Which air force base in Hawaii was named after a general?";
  for (auto _ : state) benchmark::DoNotOptimize(hybrid_retrieve(query, docs, 3, 0.7));
}
BENCHMARK(BM_HybridRetrieve)->Arg(10)->Arg(100)->Arg(1000);

}  // namespace
