#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cli/commands.hpp"
#include "support/criteria.hpp"

using namespace hypro;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  int code = cli::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const fs::path fixtures = test::fixtures_dir();
const std::string golden_predictions = (fixtures / "golden" / "predictions.jsonl").string();
const std::string mini = (fixtures / "mini_hybridqa").string();

}  // namespace

TEST_CASE("trace output matches the snapshot") {
  auto r = invoke({"trace", "--predictions", golden_predictions, "--id", "q12"});
  CHECK(r.code == cli::kExitOk);
  CHECK(r.out == slurp(fixtures / "trace_q12.txt"));

  auto refined = invoke({"trace", "--predictions", golden_predictions, "--id", "q04"});
  CHECK(refined.out.find("== Attempt 2 [ok]") != std::string::npos);
  CHECK(refined.out.find("KeyError") != std::string::npos);
}

TEST_CASE("trace with an unknown id exits 2") {
  auto r = invoke({"trace", "--predictions", golden_predictions, "--id", "q99"});
  CHECK(r.code == cli::kExitUsage);
  CHECK(r.err.find("q99") != std::string::npos);
}

TEST_CASE("live and record runs without an API key exit 2") {
  unsetenv("HYPRO_API_KEY");
  fs::path out = test::scratch_dir("cli_nokey");
  for (const char* mode : {"live", "record"}) {
    auto r = invoke({"run", "--data", mini, "--mode", mode, "--cache", (out / "c.jsonl").string(), "--out", out.string()});
    CHECK(r.code == cli::kExitUsage);
    CHECK(r.err.find("HYPRO_API_KEY") != std::string::npos);
  }
  CHECK_FALSE(fs::exists(out / "predictions.jsonl"));
}

TEST_CASE("replay run writes predictions, answers and a manifest") {
  fs::path out = test::scratch_dir("cli_replay");
  auto r = invoke({"run", "--data", mini, "--mode", "replay", "--cache", (fixtures / "cache.jsonl").string(), "--out",
                out.string(), "--limit", "3", "--workers", "2", "--quiet", "--no-timing"});
  REQUIRE_MESSAGE(r.code == cli::kExitOk, r.err);
  CHECK(r.err.empty());
  std::ifstream tsv(out / "answers.tsv");
  std::string line;
  std::size_t n = 0;
  while (std::getline(tsv, line)) ++n;
  CHECK(n == 3);
  auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
  CHECK(manifest.at("instances") == 3);
  CHECK(manifest.at("config").at("mode") == "replay");

  auto missing_cache = invoke({"run", "--data", mini, "--mode", "replay", "--cache", (out / "absent.jsonl").string(),
                            "--out", out.string(), "--quiet"});
  CHECK(missing_cache.code == cli::kExitUsage);
}

TEST_CASE("eval of an empty predictions file scores zero and lists everything missing") {
  fs::path dir = test::scratch_dir("cli_empty_eval");
  std::ofstream(dir / "predictions.jsonl").close();
  auto r = invoke({"eval", "--data", mini, "--predictions", (dir / "predictions.jsonl").string()});
  CHECK(r.code == cli::kExitOk);
  CHECK(r.out.find("missing predictions: 12") != std::string::npos);
  auto report = nlohmann::json::parse(slurp(dir / "report.json"));
  CHECK(report.at("em") == 0.0);

  std::ofstream(dir / "bad.jsonl") << "not json\n";
  auto bad = invoke({"eval", "--data", mini, "--predictions", (dir / "bad.jsonl").string()});
  CHECK(bad.code == cli::kExitUsage);
  CHECK(bad.err.find("unparseable") != std::string::npos);
}

TEST_CASE("cache verify reports the state of a cache file") {
  auto good = invoke({"cache", "verify", "--cache", (fixtures / "cache.jsonl").string()});
  CHECK(good.code == cli::kExitOk);
  CHECK(good.out.find("ok") != std::string::npos);

  fs::path dir = test::scratch_dir("cli_cache_verify");
  std::ifstream src(fixtures / "cache.jsonl");
  std::string first;
  std::getline(src, first);
  auto entry = nlohmann::json::parse(first);
  entry["key"] = "0000";
  std::ofstream(dir / "bad.jsonl") << entry.dump() << "\n";
  auto bad = invoke({"cache", "verify", "--cache", (dir / "bad.jsonl").string()});
  CHECK(bad.code == cli::kExitProblems);
  CHECK(bad.out.find("FAILED") != std::string::npos);

  auto absent = invoke({"cache", "verify", "--cache", (dir / "absent.jsonl").string()});
  CHECK(absent.code == cli::kExitUsage);
}

TEST_CASE("usage errors exit 2") {
  CHECK(invoke({"frobnicate"}).code == cli::kExitUsage);
  CHECK(invoke({"run", "--data", mini, "--mode", "sometimes"}).code == cli::kExitUsage);
  CHECK(invoke({"trace", "--id", "q01"}).code == cli::kExitUsage);
  CHECK(invoke({"--help"}).code == cli::kExitOk);
}
