// Rebuilds fixtures/cache.jsonl and fixtures/golden/ from fixtures/llm_script.json.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

#include "cli/commands.hpp"
#include "support/criteria.hpp"
#include "support/transports.hpp"

namespace fs = std::filesystem;
namespace cli = hypro::cli;
namespace t = hypro::test;

namespace {

cli::RunArgs base_args(const fs::path& out) {
  cli::RunArgs args;
  args.data.data_root = t::fixtures_dir() / "mini_hybridqa";
  args.cache = t::fixtures_dir() / "cache.jsonl";
  args.out = out;
  args.workers = 1;
  args.quiet = true;
  args.no_timing = true;
  return args;
}

}  // namespace

int main() {
  const fs::path cache = t::fixtures_dir() / "cache.jsonl";
  fs::remove(cache);
  auto script = std::make_shared<t::FixtureScript>((t::fixtures_dir() / "llm_script.json").string());
  auto transport = std::make_shared<t::ScriptedTransport>([script](const nlohmann::json& body) { return script->respond(body); });

  struct Variant {
    const char* name;
    bool no_check, no_simplify, no_refine;
  };
  for (const Variant& v : {Variant{"default", false, false, false}, Variant{"no_check", true, false, false},
                           Variant{"no_simplify", false, true, false}, Variant{"no_refine", false, false, true}}) {
    cli::RunArgs args = base_args(t::scratch_dir(std::string("record_") + v.name));
    args.mode = "record";
    args.no_check = v.no_check;
    args.no_simplify = v.no_simplify;
    args.no_refine = v.no_refine;
    if (int rc = cli::cmd_run(args, std::cout, std::cerr, transport); rc != cli::kExitOk) return rc;
  }

  const fs::path golden = t::fixtures_dir() / "golden";
  fs::create_directories(golden);
  cli::RunArgs replay = base_args(golden);
  replay.mode = "replay";
  if (int rc = cli::cmd_run(replay, std::cout, std::cerr); rc != cli::kExitOk) return rc;
  fs::remove(golden / "manifest.json");
  cli::EvalArgs eval;
  eval.data.data_root = replay.data.data_root;
  eval.predictions = golden / "predictions.jsonl";
  if (int rc = cli::cmd_eval(eval, std::cout, std::cerr); rc != cli::kExitOk) return rc;
  // Snapshot used by the trace unit test.
  std::ofstream snapshot(t::fixtures_dir() / "trace_q12.txt", std::ios::binary);
  if (int rc = cli::cmd_trace({eval.predictions, "q12"}, snapshot, std::cerr); rc != cli::kExitOk) return rc;
  std::cout << "recorded " << transport->calls() << " exchanges into " << cache << "\n";
  return 0;
}
