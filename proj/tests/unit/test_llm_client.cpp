#include <doctest.h>

#include <cmath>
#include <fstream>

#include "hypro/errors.hpp"
#include "hypro/llm_client.hpp"
#include "support/criteria.hpp"
#include "support/stub_server.hpp"
#include "support/transports.hpp"

using namespace hypro;
namespace fs = std::filesystem;

namespace {

ChatRequest hello(const std::string& text = "hello") {
  ChatRequest req;
  req.model_tag = "stub-model";
  req.messages = {{"system", "Be brief.", {}}, {"user", text, {}}};
  return req;
}

ClientOptions options_for(const test::StubServer& server, CacheMode mode, fs::path cache) {
  ClientOptions o;
  o.mode = mode;
  o.cache_file = std::move(cache);
  o.api_base = server.base_url();
  o.api_key = "test-key";
  o.backoff_ms = 1;
  o.timeout_seconds = 5;
  return o;
}

std::string png_bytes() { return std::string("\x89PNG\r\n\x1a\nabc", 11); }

}  // namespace

TEST_CASE("record over HTTP, then replay offline") {
  test::StubServer server;
  fs::path cache = test::scratch_dir("llm_record") / "cache.jsonl";
  {
    LlmClient client(options_for(server, CacheMode::record, cache));
    CHECK(client.chat(hello()) == "stub: hello");
    CHECK(client.chat(hello()) == "stub: hello");  // second call served from the cache
    CHECK(client.network_calls() == 1);
    auto vecs = client.embed("stub-embed", {"alpha", "beta"});
    REQUIRE(vecs.size() == 2);
    for (const auto& v : vecs) {
      double norm = 0;
      for (double x : v) norm += x * x;
      CHECK(std::sqrt(norm) == doctest::Approx(1.0));
    }
    CHECK(client.network_calls() == 2);
  }
  const std::size_t served = server.requests();

  ClientOptions replay = options_for(server, CacheMode::replay, cache);
  replay.api_key.clear();
  LlmClient offline(replay);
  CHECK(offline.chat(hello()) == "stub: hello");
  CHECK(offline.embed("stub-embed", {"beta"}).at(0).size() == 16);
  CHECK(offline.network_calls() == 0);
  CHECK(server.requests() == served);
  try {
    offline.chat(hello("never recorded"));
    FAIL("expected CacheMiss");
  } catch (const CacheMiss& e) {
    CHECK(e.key() == cache_key(hello("never recorded")));
  }
  CHECK_THROWS_AS(offline.embed("stub-embed", {"gamma"}), CacheMiss);

  auto report = verify_cache_file(cache);
  CHECK(report.ok());
  CHECK(report.lines == 3);
  CHECK(report.entries == 3);
}

TEST_CASE("transient HTTP failures are retried") {
  test::StubServer server(2);
  LlmClient client(options_for(server, CacheMode::live, {}));
  CHECK(client.chat(hello("retry")) == "stub: retry");
  CHECK(server.requests() == 3);
  CHECK(client.network_calls() == 3);

  test::StubServer hopeless(10);
  ClientOptions o = options_for(hopeless, CacheMode::live, {});
  o.max_retries = 1;
  LlmClient giving_up(o);
  try {
    giving_up.chat(hello());
    FAIL("expected ProviderError");
  } catch (const ProviderError& e) {
    CHECK(e.kind() == ProviderError::Kind::http_status);
    CHECK(e.status() == 500);
  }
  CHECK(hopeless.requests() == 2);
}

TEST_CASE("client configuration errors") {
  fs::path absent = test::scratch_dir("llm_absent") / "cache.jsonl";
  ClientOptions o;
  o.mode = CacheMode::replay;
  o.cache_file = absent;
  CHECK_THROWS_AS(LlmClient{o}, MissingFile);
  o.cache_file.clear();
  CHECK_THROWS_AS(LlmClient{o}, ConfigError);

  o.mode = CacheMode::live;
  o.api_key.clear();
  LlmClient keyless(o);
  try {
    keyless.chat(hello());
    FAIL("expected ProviderError");
  } catch (const ProviderError& e) {
    CHECK(e.kind() == ProviderError::Kind::missing_api_key);
  }
  CHECK(parse_cache_mode("record") == CacheMode::record);
  CHECK_FALSE(parse_cache_mode("sometimes").has_value());
}

TEST_CASE("image attachments are validated and hashed by content") {
  ChatRequest req = hello("What is shown?");
  req.messages[1].images = {{png_bytes(), "image/png"}};
  CHECK_NOTHROW(validate_attachments(req));

  ChatRequest gif = req;
  gif.messages[1].images[0].media_type = "image/gif";
  CHECK_THROWS_AS(validate_attachments(gif), ProviderError);
  ChatRequest on_system = req;
  on_system.messages[0].images = req.messages[1].images;
  CHECK_THROWS_AS(validate_attachments(on_system), ProviderError);

  ChatRequest copy = req;
  copy.messages[1].images[0].payload = std::string(png_bytes());
  CHECK(cache_key(copy) == cache_key(req));
  ChatRequest other = req;
  other.messages[1].images[0].payload += "x";
  CHECK(cache_key(other) != cache_key(req));
  CHECK(canonical_request(req).dump().find("abc") == std::string::npos);

  auto transport = std::make_shared<test::ScriptedTransport>([](const nlohmann::json&) { return "a chart"; });
  ClientOptions o;
  o.mode = CacheMode::live;
  LlmClient client(o, transport);
  CHECK(client.chat_vision(req) == "a chart");
  CHECK_THROWS_AS(client.chat_vision(hello()), ProviderError);
}

TEST_CASE("cache keys depend on every request field") {
  ChatRequest base = hello();
  ChatRequest t = base;
  t.temperature = 0.5;
  ChatRequest m = base;
  m.model_tag = "other";
  ChatRequest n = base;
  n.max_output_tokens = 7;
  CHECK(cache_key(base).size() == 64);
  CHECK(cache_key(t) != cache_key(base));
  CHECK(cache_key(m) != cache_key(base));
  CHECK(cache_key(n) != cache_key(base));
  CHECK(cache_key(hello()) == cache_key(base));
}

TEST_CASE("transcript cache: last line wins and torn lines are ignored") {
  fs::path file = test::scratch_dir("llm_cache") / "cache.jsonl";
  {
    TranscriptCache cache(file);
    cache.append({"k1", {{"q", 1}}, "first", 3});
    cache.append({"k1", {{"q", 1}}, "second", 4});
    CHECK(cache.size() == 1);
    CHECK(cache.find("k1")->response == "second");
  }
  std::ofstream(file, std::ios::app) << "{\"key\":\"k2\",\"req";
  TranscriptCache reloaded(file);
  CHECK(reloaded.size() == 1);
  CHECK(reloaded.find("k1")->response == "second");
  CHECK_FALSE(reloaded.find("k2").has_value());

  Transcript t{"k", {{"a", 1}}, nlohmann::json::array({0.5}), 12};
  Transcript back = transcript_from_json(to_json(t));
  CHECK(back.key == t.key);
  CHECK(back.response == t.response);
  CHECK(back.latency_ms == 12);
}

TEST_CASE("verify_cache_file reports mismatched keys") {
  fs::path file = test::scratch_dir("llm_verify") / "cache.jsonl";
  const auto canonical = canonical_request(hello());
  {
    TranscriptCache cache(file);
    cache.append({request_key(canonical), canonical, "ok", 1});
    cache.append({request_key(canonical), canonical, "newer", 1});
    cache.append({"not-the-hash", canonical, "bad", 1});
  }
  auto report = verify_cache_file(file);
  CHECK(report.lines == 3);
  CHECK(report.superseded == 1);
  CHECK_FALSE(report.ok());
  REQUIRE(report.problems.size() == 1);
  CHECK(report.problems[0].find("line 3") != std::string::npos);

  CHECK(verify_cache_file(test::fixtures_dir() / "cache.jsonl").ok());
}
