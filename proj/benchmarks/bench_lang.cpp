#include <benchmark/benchmark.h>

#include <string>

#include "hypro/interp/interpreter.hpp"
#include "hypro/lang/parser.hpp"

namespace {

using namespace hypro;

const std::string kProgram = R"(total = 0
best = None
for row in rows:
    n = int(row["Count"])
    total = total + n
    if best == None or n > int(best["Count"]):
        best = row
names = []
for row in rows:
    if int(row["Count"]) * 2 > total / len(rows):
        append(names, lower(row["Name"]))
answer = [best["Name"], str(total), len(names)]
)";

TableContext table_of(std::size_t rows) {
  TableContext t;
  t.table_id = "bench";
  t.title = "Benchmark table";
  t.headers = {"Name", "Count"};
  for (std::size_t r = 0; r < rows; ++r) {
    t.rows.push_back({{"Item " + std::to_string(r), {}}, {std::to_string((r * 7919) % 1000), {}}});
  }
  return t;
}

void BM_Parse(benchmark::State& state) {
  std::string src;
  for (int i = 0; i < state.range(0); ++i) src += kProgram;
  for (auto _ : state) benchmark::DoNotOptimize(lang::parse(src));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * src.size()));
}
BENCHMARK(BM_Parse)->Arg(1)->Arg(16)->Arg(128);

void BM_Execute(benchmark::State& state) {
  const auto ast = std::get<lang::Ast>(lang::parse(kProgram));
  const interp::Env env = interp::Env::for_table(table_of(static_cast<std::size_t>(state.range(0))));
  for (auto _ : state) {
    auto out = interp::execute(ast, env, {});
    benchmark::DoNotOptimize(out);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Execute)->Arg(10)->Arg(100)->Arg(1000);

}  // namespace
