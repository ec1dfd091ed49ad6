#include <doctest.h>

#include <deque>
#include <fstream>
#include <mutex>

#include "hypro/errors.hpp"
#include "hypro/pipeline.hpp"
#include "support/criteria.hpp"
#include "support/transports.hpp"

using namespace hypro;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Mini corpus, live client and a scripted model: codegen and refine replies
// are popped from `programs`, every other request gets `other`.
struct Rig {
  Corpus corpus = load_hybridqa(test::fixtures_dir() / "mini_hybridqa", Split::dev);
  LinkIndex index = build_link_index(corpus);
  TemplateSet templates = TemplateSet::embedded();
  std::mutex mutex;
  std::deque<std::string> programs;
  std::string other = "NONE";
  std::shared_ptr<test::ScriptedTransport> transport =
      std::make_shared<test::ScriptedTransport>([this](const json& body) {
        std::lock_guard lock(mutex);
        if (body.at("messages").at(0).at("role") != "system") return other;
        if (programs.empty()) return std::string("answer = missing_name");
        std::string p = programs.front();
        if (programs.size() > 1) programs.pop_front();
        return p;
      });
  LlmClient client{live(), transport};

  static ClientOptions live() {
    ClientOptions o;
    o.mode = CacheMode::live;
    return o;
  }

  Engine engine(EngineConfig cfg = {}) {
    cfg.mode = CacheMode::live;
    return Engine{corpus, index, client, templates, cfg};
  }

  const QAInstance& q(const std::string& id) { return *corpus.find_instance(id); }
};

std::size_t count(const PredictionRecord& r, const std::string& purpose) {
  return static_cast<std::size_t>(
      std::count_if(r.exchanges.begin(), r.exchanges.end(), [&](const Exchange& e) { return e.purpose == purpose; }));
}

}  // namespace

TEST_CASE("extract_program copes with messy replies") {
  CHECK(extract_program("```python\nanswer = 1\n```") == "answer = 1");
  CHECK(extract_program("Here you go:\n```\nx = 2\nanswer = x\n```\nDone.") == "x = 2\nanswer = x");
  CHECK(extract_program("  ```py\nanswer = 3\n\n\n  ```") == "answer = 3");
  CHECK(extract_program("```python\nanswer = 1\n```\n```python\nanswer = 2\n```") == "answer = 1");
  CHECK(extract_program("Sure. The program is below.\nanswer = 4\nThat should work.") == "answer = 4");
  CHECK(extract_program("answer = None\nfor row in rows:\n    answer = row[\"A\"]\r\n") ==
        "answer = None\nfor row in rows:\n    answer = row[\"A\"]");
  CHECK(extract_program("```python\nanswer = [1,\n```") == "answer = [1,");
  CHECK(extract_program("I cannot answer that.") == "I cannot answer that.");
  CHECK_THROWS_AS(extract_program(""), EmptyGeneration);
  CHECK_THROWS_AS(extract_program("```\n   \n```"), EmptyGeneration);
}

TEST_CASE("config_from_json applies known keys and rejects the rest") {
  EngineConfig c = config_from_json(json{{"shots", 2}, {"lambda", 0.5}, {"retriever", "embedding"},
                                         {"limits", {{"max_steps", 99}}}, {"mode", "record"}});
  CHECK(c.shots == 2);
  CHECK(c.lambda == 0.5);
  CHECK(c.retriever == RetrieverKind::embedding);
  CHECK(c.limits.max_steps == 99);
  CHECK(c.mode == CacheMode::record);
  CHECK(config_from_json(to_json(c)).shots == 2);
  CHECK(EngineConfig{}.effective_retriever(SourceSplit::hybridqa) == RetrieverKind::hybrid);
  CHECK(EngineConfig{}.effective_retriever(SourceSplit::multimodalqa) == RetrieverKind::embedding);

  CHECK_THROWS_AS(config_from_json(json{{"shotz", 1}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(json{{"shots", "four"}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(json{{"shots", -1}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(json{{"lambda", 1.5}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(json{{"retriever", "bm25"}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(json{{"mode", "sometimes"}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(json{{"limits", {{"max_steps", 0}}}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(json::array()), ConfigError);
}

TEST_CASE("refinement budget bounds the attempts") {
  for (int budget : {0, 1, 3}) {
    Rig rig;
    EngineConfig cfg;
    cfg.max_refinements = budget;
    cfg.enable_simplification = false;
    PredictionRecord r = run_instance(rig.engine(cfg), rig.q("q01"));
    CHECK(r.attempts.size() == static_cast<std::size_t>(budget + 1));
    CHECK(count(r, "refine") == static_cast<std::size_t>(budget));
    CHECK(r.answer.empty());
    for (const auto& a : r.attempts) CHECK(a.error_class == "NameError");
  }
  Rig rig;
  EngineConfig cfg;
  cfg.enable_refinement = false;
  cfg.enable_simplification = false;
  CHECK(run_instance(rig.engine(cfg), rig.q("q01")).attempts.size() == 1);
}

TEST_CASE("refinement stops at the first answer and sends the traceback") {
  Rig rig;
  rig.programs = {"```python\nanswer = rows[0][\"Year\"]\n```", "```python\nanswer = rows[3][\"Premiere\"]\n```"};
  EngineConfig cfg;
  cfg.enable_simplification = false;
  PredictionRecord r = run_instance(rig.engine(cfg), rig.q("q04"));
  REQUIRE(r.attempts.size() == 2);
  CHECK(r.attempts[0].status == "error");
  CHECK(r.attempts[0].error_class == "KeyError");
  CHECK(r.attempts[0].error_line == 1);
  CHECK(r.attempts[1].status == "ok");
  CHECK(r.answer == std::vector<std::string>{"2007"});
  const auto& refine = r.exchanges.back();
  CHECK(refine.purpose == "refine");
  const auto& msgs = refine.request.at("messages");
  CHECK(msgs[msgs.size() - 2].dump().find("Year") != std::string::npos);
  CHECK(msgs.back().dump().find("KeyError") != std::string::npos);
}

TEST_CASE("empty results are refined with a note") {
  Rig rig;
  rig.programs = {"answer = []", "answer = [\"x\"]"};
  EngineConfig cfg;
  cfg.enable_simplification = false;
  PredictionRecord r = run_instance(rig.engine(cfg), rig.q("q01"));
  REQUIRE(r.attempts.size() == 2);
  CHECK(r.attempts[0].status == "empty");
  CHECK(r.attempts[0].feedback == kEmptyResultNote);
  CHECK(r.exchanges.back().request.dump().find(std::string(kEmptyResultNote)) != std::string::npos);
}

TEST_CASE("generation prompt carries declarations, shots and the table") {
  Rig rig;
  EngineConfig cfg;
  cfg.shots = 2;
  auto msgs = generation_messages(rig.engine(cfg), rig.q("q01"), "Which network?");
  REQUIRE(msgs.size() == 1 + 2 * 2 + 1);
  CHECK(msgs[0].role == "system");
  CHECK(msgs[0].content.find("extract_info(") != std::string::npos);
  CHECK(msgs[2].role == "assistant");
  CHECK(msgs[2].content.rfind("```python\n", 0) == 0);
  CHECK(msgs.back().content.find("Question: Which network?") != std::string::npos);
  CHECK(msgs.back().content.find("2: The Penguins of Madagascar | 2008 | 3 | Nickelodeon") != std::string::npos);

  cfg.enable_check = false;
  cfg.shots = 10;
  auto plain = generation_messages(rig.engine(cfg), rig.q("q01"), "Which network?");
  for (const auto& m : plain) CHECK(m.content.find("check(") == std::string::npos);
  CHECK(load_shots(rig.templates, SourceSplit::hybridqa, true).size() >
        load_shots(rig.templates, SourceSplit::hybridqa, false).size());
}

TEST_CASE("simplification keeps rewrites that name a cell") {
  Rig rig;
  TraceSink sink;
  rig.other = "Who created Kick Buttowski: Suburban Daredevil?";
  CHECK(simplify_query(rig.engine(), rig.q("q02"), sink) == rig.other);
  REQUIRE(sink.exchanges.size() == 1);
  CHECK(sink.exchanges[0].purpose == "simplify");
  CHECK(sink.exchanges[0].request.dump().find("Retrieved documents") != std::string::npos);

  rig.other = "Who made the show about a daredevil?";
  CHECK(simplify_query(rig.engine(), rig.q("q02"), sink) == rig.q("q02").question);
}

TEST_CASE("records round-trip through JSON lines") {
  Rig rig;
  rig.programs = {"answer = [\"a\", \"b\"]"};
  EngineConfig cfg;
  cfg.enable_simplification = false;
  auto records = run_batch(rig.engine(cfg), {rig.q("q01"), rig.q("q02")}, 2);
  REQUIRE(records.size() == 2);
  CHECK(records[0].question_id == "q01");
  CHECK(records[1].question_id == "q02");

  fs::path dir = test::scratch_dir("pipeline_records");
  write_predictions(records, dir / "p.jsonl");
  auto back = read_predictions(dir / "p.jsonl");
  CHECK(back == records);

  write_predictions(records, dir / "t.jsonl", false);
  auto untimed = read_predictions(dir / "t.jsonl");
  CHECK(untimed[0].wall_ms == 0.0);

  write_answers_tsv(records, dir / "a.tsv");
  std::ifstream tsv(dir / "a.tsv");
  std::string line;
  std::getline(tsv, line);
  CHECK(line == "q01\ta, b");

  std::ofstream(dir / "bad.jsonl") << to_json(records[0]).dump() << "\n{\"question_id\": 3}\n";
  try {
    read_predictions(dir / "bad.jsonl");
    FAIL("expected SchemaMismatch");
  } catch (const SchemaMismatch& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}
