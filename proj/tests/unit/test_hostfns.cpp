#include <doctest.h>

#include <deque>

#include "hypro/errors.hpp"
#include "hypro/hostfns.hpp"
#include "hypro/lang/parser.hpp"
#include "support/criteria.hpp"
#include "support/transports.hpp"

using namespace hypro;
using nlohmann::json;

namespace {

std::string first_text(const json& body) {
  const json& c = body.at("messages").at(0).at("content");
  return c.is_string() ? c.get<std::string>() : c.at(0).at("text").get<std::string>();
}

// Mini corpus with a scripted model whose replies are queued per test.
struct Harness {
  Corpus corpus = load_hybridqa(test::fixtures_dir() / "mini_hybridqa", Split::dev);
  LinkIndex index = build_link_index(corpus);
  TemplateSet templates = TemplateSet::embedded();
  std::deque<std::string> replies;
  std::shared_ptr<test::ScriptedTransport> transport = std::make_shared<test::ScriptedTransport>([this](const json&) {
    if (replies.empty()) return std::string("NONE");
    std::string r = replies.front();
    replies.pop_front();
    return r;
  });
  LlmClient client{live(), transport};
  TraceSink sink;
  HostContext ctx{corpus, index, client, templates, sink, "Florida_college_athletics_0", "text-model", "vision-model",
                  256, {}};

  static ClientOptions live() {
    ClientOptions o;
    o.mode = CacheMode::live;
    return o;
  }
};

}  // namespace

TEST_CASE("parse_numeric accepts plain and formatted numbers") {
  CHECK(parse_numeric("20,000") == 20000.0);
  CHECK(parse_numeric(" $1,250.50 ") == 1250.5);
  CHECK(parse_numeric("-3.5") == -3.5);
  CHECK(parse_numeric("€12") == 12.0);
  CHECK(parse_numeric("-$4") == -4.0);
  CHECK(parse_numeric("$-4") == -4.0);
  CHECK(parse_numeric("+7") == 7.0);
  CHECK(parse_numeric("1,000,000") == 1e6);
  CHECK(parse_numeric(".5") == 0.5);
  CHECK_FALSE(parse_numeric("12,34"));
  CHECK_FALSE(parse_numeric("1,0000"));
  CHECK_FALSE(parse_numeric(",100"));
  CHECK_FALSE(parse_numeric("ten thousand"));
  CHECK_FALSE(parse_numeric(""));
  CHECK_FALSE(parse_numeric("."));
  CHECK_FALSE(parse_numeric("1.2.3"));
  CHECK_FALSE(parse_numeric("12kg"));
}

TEST_CASE("sentinel and verdict replies") {
  CHECK(is_sentinel_reply("NONE"));
  CHECK(is_sentinel_reply("  none. "));
  CHECK_FALSE(is_sentinel_reply("None of them"));
  CHECK(parse_verdict("True.") == true);
  CHECK(parse_verdict(" false ") == false);
  CHECK_FALSE(parse_verdict("maybe").has_value());
  CHECK_FALSE(parse_verdict("true, because").has_value());
}

TEST_CASE("check fast path decides numeric pairs without the model") {
  auto r = test::check_fast_path(300, 5);
  CHECK_MESSAGE(r.status == test::CriterionResult::pass, r.detail);

  Harness h;
  CHECK(check(h.ctx, "Hickam  field", "hickam field", "=="));
  CHECK(h.transport->calls() == 0);
  REQUIRE(h.sink.host_calls.size() == 1);
  CHECK(h.sink.host_calls[0].fast_path);
  CHECK_THROWS_AS(check(h.ctx, "1", "2", ">="), interp::HostError);
}

TEST_CASE("check asks the model and re-asks once on an unclear verdict") {
  Harness h;
  h.replies = {"true"};
  CHECK(check(h.ctx, "20,000", "ten thousand", ">"));
  CHECK(h.sink.exchanges.size() == 1);
  CHECK(h.sink.exchanges[0].purpose == "check");

  h.replies = {"perhaps", "False."};
  CHECK_FALSE(check(h.ctx, "Aloha State", "Hawaii", "=="));
  CHECK(h.sink.exchanges.back().purpose == "check_reask");
  CHECK(h.sink.host_calls.back().exchanges.size() == 2);

  h.replies = {"perhaps", "still unsure"};
  CHECK_THROWS_AS(check(h.ctx, "a", "b", "=="), interp::HostError);
  CHECK(h.sink.host_calls.back().outcome == "error");
  CHECK(h.sink.host_calls.back().error.find("UnparseableVerdict") == 0);
}

TEST_CASE("extract_info reads linked passages and honours the sentinel") {
  Harness h;
  h.replies = {"the Southeastern Conference ( SEC )"};
  CHECK(extract_info(h.ctx, "Florida Gators", "conference") == "the Southeastern Conference ( SEC )");
  const auto body = h.transport->bodies().back();
  const std::string prompt = first_text(body);
  CHECK(prompt.find("Southeastern Conference (SEC) of NCAA") != std::string::npos);
  CHECK(prompt.find("conference") != std::string::npos);
  CHECK(h.sink.host_calls.back().documents == std::vector<DocRef>{{"/wiki/Florida_Gators", DocKind::passage}});

  h.replies = {"none."};
  CHECK_FALSE(extract_info(h.ctx, "Miami Hurricanes", "mascot").has_value());
  CHECK(h.sink.host_calls.back().outcome == "none");
}

TEST_CASE("extract_info on an unlinked cell is a LinkMiss unless a fallback is set") {
  Harness h;
  try {
    extract_info(h.ctx, "1853", "anything");
    FAIL("expected HostError");
  } catch (const interp::HostError& e) {
    CHECK(std::string(e.what()).find("LinkMiss") == 0);
  }
  CHECK(h.transport->calls() == 0);

  h.ctx.fallback_documents = {{"/wiki/Florida_Gators", DocKind::passage}};
  h.replies = {"Gainesville"};
  CHECK(extract_info(h.ctx, "1853", "city") == "Gainesville");
}

TEST_CASE("host functions bound into a program") {
  Harness h;
  interp::Env env = interp::Env::for_table(h.corpus.table("Florida_college_athletics_0"));
  bind_host_functions(env, h.ctx, true);
  h.replies = {"ACC"};
  auto ast = std::get<lang::Ast>(lang::parse(
      "answer = None\nfor row in rows:\n    if check(row[\"Founded\"], \"1900\", \">\"):\n"
      "        answer = extract_info(row[\"Team\"], \"conference\")\n"));
  auto out = interp::execute(ast, env, {});
  REQUIRE(out.ok());
  CHECK(interp::to_display(out.value()) == "ACC");

  auto bad = interp::execute(std::get<lang::Ast>(lang::parse("answer = extract_info([1], \"x\")")), env, {});
  REQUIRE_FALSE(bad.ok());
  CHECK(bad.error().cls == lang::ErrorClass::host_function_error);

  interp::Env no_check;
  bind_host_functions(no_check, h.ctx, false);
  CHECK(no_check.host_functions().count("check") == 0);
  CHECK(no_check.host_functions().count("extract_info") == 1);
}

TEST_CASE("declarations render with and without check") {
  const TemplateSet t = TemplateSet::embedded();
  auto all = load_declarations(t, true);
  auto without = load_declarations(t, false);
  CHECK(all.size() == without.size() + 1);
  const std::string text = render_declarations(all);
  CHECK(text.find("extract_info(") != std::string::npos);
  CHECK(text.find("check(obj1") != std::string::npos);
  CHECK(render_declarations(without).find("check(") == std::string::npos);
  CHECK(declarations_digest(all) != declarations_digest(without));
  CHECK(declarations_digest(all).size() == 64);
}
