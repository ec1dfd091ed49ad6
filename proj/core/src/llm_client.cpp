#include "hypro/llm_client.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <httplib.h>

#include "hypro/errors.hpp"
#include "hypro/hash.hpp"
#include "hypro/text.hpp"

namespace hypro {

using nlohmann::json;
namespace fs = std::filesystem;

std::string to_string(CacheMode m) {
  switch (m) {
    case CacheMode::live:
      return "live";
    case CacheMode::replay:
      return "replay";
    case CacheMode::record:
      return "record";
  }
  return "replay";
}

std::optional<CacheMode> parse_cache_mode(const std::string& s) {
  if (s == "live") return CacheMode::live;
  if (s == "replay") return CacheMode::replay;
  if (s == "record") return CacheMode::record;
  return std::nullopt;
}

json canonical_request(const ChatRequest& req) {
  json messages = json::array();
  for (const auto& m : req.messages) {
    json jm = {{"role", m.role}, {"content", m.content}};
    if (!m.images.empty()) {
      json imgs = json::array();
      for (const auto& img : m.images) imgs.push_back({{"sha256", sha256_hex(img.payload)}, {"media_type", img.media_type}});
      jm["images"] = std::move(imgs);
    }
    messages.push_back(std::move(jm));
  }
  return {{"endpoint", "chat"},
          {"model_tag", req.model_tag},
          {"messages", std::move(messages)},
          {"temperature", req.temperature},
          {"max_output_tokens", req.max_output_tokens}};
}

json canonical_embedding_request(const std::string& model_tag, const std::string& text) {
  return {{"endpoint", "embeddings"}, {"model_tag", model_tag}, {"input", text}};
}

std::string request_key(const json& canonical) { return sha256_hex(canonical.dump()); }

json to_json(const Transcript& t) {
  return {{"key", t.key}, {"request", t.request}, {"response", t.response}, {"latency_ms", t.latency_ms}};
}

Transcript transcript_from_json(const json& j) {
  Transcript t;
  t.key = j.at("key").get<std::string>();
  t.request = j.at("request");
  t.response = j.at("response");
  t.latency_ms = j.value("latency_ms", std::int64_t{0});
  return t;
}

// ---- cache -----------------------------------------------------------------

TranscriptCache::TranscriptCache(fs::path file) : file_(std::move(file)) {
  std::ifstream in(file_);
  if (!in) return;  // created on first append
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      Transcript t = transcript_from_json(json::parse(line));
      std::string key = t.key;
      entries_[key] = std::move(t);
    } catch (const json::exception& e) {
      if (in.peek() == std::char_traits<char>::eof()) break;  // torn tail
      throw SchemaMismatch(file_.string() + " line " + std::to_string(lineno) + ": " + e.what());
    }
  }
}

std::optional<Transcript> TranscriptCache::find(const std::string& key) const {
  std::shared_lock lock(mutex_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void TranscriptCache::append(const Transcript& t) {
  std::unique_lock lock(mutex_);
  if (!file_.empty()) {
    std::ofstream out(file_, std::ios::app);
    if (!out) throw MissingFile(file_.string());
    out << to_json(t).dump() << "\n";
    out.flush();
  }
  entries_[t.key] = t;
}

std::size_t TranscriptCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

CacheVerifyReport verify_cache_file(const fs::path& file) {
  CacheVerifyReport report;
  std::ifstream in(file);
  if (!in) throw MissingFile(file.string());
  std::map<std::string, std::size_t> seen;
  std::string line;
  while (std::getline(in, line)) {
    ++report.lines;
    if (trim(line).empty()) continue;
    const std::string where = "line " + std::to_string(report.lines);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception&) {
      report.problems.push_back(where + ": not valid JSON");
      continue;
    }
    for (const char* f : {"key", "request", "response", "latency_ms"}) {
      if (!j.contains(f)) report.problems.push_back(where + ": field '" + f + "' is missing");
    }
    if (!j.contains("key") || !j.contains("request")) continue;
    const std::string key = j["key"].is_string() ? j["key"].get<std::string>() : "";
    if (request_key(j["request"]) != key) report.problems.push_back(where + ": key does not match request");
    if (seen.count(key)) ++report.superseded;
    seen[key] = report.lines;
  }
  report.entries = seen.size();
  return report;
}

// ---- HTTP --------------------------------------------------------------------

namespace {

class HttplibTransport final : public HttpTransport {
 public:
  HttplibTransport(const std::string& base_url, int timeout_seconds) : timeout_seconds_(timeout_seconds) {
    auto scheme_end = base_url.find("://");
    std::size_t host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
    std::size_t path_start = base_url.find('/', host_start);
    origin_ = base_url.substr(0, path_start);
    prefix_ = path_start == std::string::npos ? "" : base_url.substr(path_start);
    while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
  }

  HttpResponse post(const std::string& path, const std::string& body, const std::string& api_key) override {
    httplib::Client client(origin_);
    client.set_connection_timeout(timeout_seconds_, 0);
    client.set_read_timeout(timeout_seconds_, 0);
    client.set_write_timeout(timeout_seconds_, 0);
    httplib::Headers headers;
    if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);
    auto started = std::chrono::steady_clock::now();
    auto res = client.Post(prefix_ + path, headers, body, "application/json");
    if (!res) {
      auto err = res.error();
      auto elapsed = std::chrono::steady_clock::now() - started;
      if (err == httplib::Error::ConnectionTimeout ||
          (err == httplib::Error::Read && elapsed >= std::chrono::seconds(timeout_seconds_))) {
        throw Timeout("request to " + origin_ + prefix_ + path + " timed out");
      }
      throw ProviderError(ProviderError::Kind::transport, 0, "",
                          "request to " + origin_ + prefix_ + path + " failed: " + httplib::to_string(err));
    }
    return {res->status, res->body};
  }

 private:
  std::string origin_;
  std::string prefix_;
  int timeout_seconds_;
};

std::int64_t elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - since).count();
}

json wire_chat_body(const ChatRequest& req) {
  json messages = json::array();
  for (const auto& m : req.messages) {
    if (m.images.empty()) {
      messages.push_back({{"role", m.role}, {"content", m.content}});
      continue;
    }
    json parts = json::array();
    parts.push_back({{"type", "text"}, {"text", m.content}});
    for (const auto& img : m.images) {
      parts.push_back({{"type", "image_url"},
                       {"image_url", {{"url", "data:" + img.media_type + ";base64," + base64_encode(img.payload)}}}});
    }
    messages.push_back({{"role", m.role}, {"content", std::move(parts)}});
  }
  return {{"model", req.model_tag},
          {"messages", std::move(messages)},
          {"temperature", req.temperature},
          {"max_tokens", req.max_output_tokens}};
}

json parse_body(const HttpResponse& r) {
  try {
    return json::parse(r.body);
  } catch (const json::exception&) {
    throw ProviderError(ProviderError::Kind::malformed_response, r.status, r.body, "provider returned non-JSON body");
  }
}

}  // namespace

std::unique_ptr<HttpTransport> make_http_transport(const std::string& base_url, int timeout_seconds) {
  return std::make_unique<HttplibTransport>(base_url, timeout_seconds);
}

ClientOptions ClientOptions::from_environment(CacheMode mode, fs::path cache_file) {
  ClientOptions o;
  o.mode = mode;
  o.cache_file = std::move(cache_file);
  if (const char* key = std::getenv("HYPRO_API_KEY")) o.api_key = key;
  if (const char* base = std::getenv("HYPRO_API_BASE"); base && *base) o.api_base = base;
  return o;
}

void validate_attachments(const ChatRequest& req) {
  for (const auto& m : req.messages) {
    for (const auto& img : m.images) {
      if (m.role != "user") {
        throw ProviderError(ProviderError::Kind::invalid_attachment, 0, "",
                            "image attachments are only allowed on user messages");
      }
      if (img.media_type != "image/jpeg" && img.media_type != "image/png") {
        throw ProviderError(ProviderError::Kind::invalid_attachment, 0, "",
                            "unsupported image media type: " + img.media_type);
      }
    }
  }
}

// ---- client --------------------------------------------------------------------

LlmClient::LlmClient(ClientOptions options, std::shared_ptr<HttpTransport> transport)
    : options_(std::move(options)),
      transport_(std::move(transport)),
      in_flight_(std::max(1, options_.max_in_flight)) {
  if (options_.mode == CacheMode::live) {
    cache_ = std::make_unique<TranscriptCache>();
  } else {
    if (options_.cache_file.empty()) throw ConfigError("a cache file is required in " + to_string(options_.mode) + " mode");
    if (options_.mode == CacheMode::replay && !fs::exists(options_.cache_file)) {
      throw MissingFile(options_.cache_file.string());
    }
    cache_ = std::make_unique<TranscriptCache>(options_.cache_file);
  }
}

HttpTransport& LlmClient::transport() {
  std::lock_guard lock(transport_mutex_);
  if (!transport_) transport_ = make_http_transport(options_.api_base, options_.timeout_seconds);
  return *transport_;
}

HttpResponse LlmClient::send(const std::string& path, const std::string& body) {
  if (options_.api_key.empty() && !transport_) {
    throw ProviderError(ProviderError::Kind::missing_api_key, 0, "", "HYPRO_API_KEY is not set");
  }
  HttpTransport& t = transport();
  for (int attempt = 0;; ++attempt) {
    HttpResponse r;
    bool retryable = false;
    std::optional<std::string> failure;
    in_flight_.acquire();
    try {
      ++network_calls_;
      r = t.post(path, body, options_.api_key);
    } catch (const LlmError& e) {
      in_flight_.release();
      if (attempt >= options_.max_retries) throw;
      retryable = true;
      failure = e.what();
    }
    if (!failure) {
      in_flight_.release();
      if (r.status >= 200 && r.status < 300) return r;
      retryable = r.status == 408 || r.status == 429 || r.status >= 500;
      if (!retryable || attempt >= options_.max_retries) {
        throw ProviderError(ProviderError::Kind::http_status, r.status, r.body,
                            "provider returned HTTP " + std::to_string(r.status));
      }
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(static_cast<std::int64_t>(options_.backoff_ms) << attempt));
  }
}

std::string LlmClient::chat(const ChatRequest& req) {
  validate_attachments(req);
  if (req.messages.empty()) throw ConfigError("chat request has no messages");
  const json canonical = canonical_request(req);
  const std::string key = request_key(canonical);
  if (options_.mode != CacheMode::live) {
    if (auto hit = cache_->find(key)) {
      if (!hit->response.is_string()) throw SchemaMismatch("cached response for " + key + " is not text");
      return hit->response.get<std::string>();
    }
    if (options_.mode == CacheMode::replay) throw CacheMiss(key);
  }
  auto started = std::chrono::steady_clock::now();
  HttpResponse r = send("/chat/completions", wire_chat_body(req).dump());
  json body = parse_body(r);
  std::string text;
  try {
    const json& content = body.at("choices").at(0).at("message").at("content");
    text = content.is_null() ? "" : content.get<std::string>();
  } catch (const json::exception&) {
    throw ProviderError(ProviderError::Kind::malformed_response, r.status, r.body, "response has no message content");
  }
  if (options_.mode == CacheMode::record) cache_->append({key, canonical, text, elapsed_ms(started)});
  return text;
}

std::string LlmClient::chat_vision(const ChatRequest& req) {
  bool any = false;
  for (const auto& m : req.messages) any = any || !m.images.empty();
  if (!any) throw ProviderError(ProviderError::Kind::invalid_attachment, 0, "", "vision request carries no image");
  return chat(req);
}

std::vector<std::vector<double>> LlmClient::embed(const std::string& model_tag, const std::vector<std::string>& texts) {
  std::vector<std::vector<double>> out(texts.size());
  std::vector<std::size_t> missing;
  std::vector<json> requests(texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    requests[i] = canonical_embedding_request(model_tag, texts[i]);
    if (options_.mode == CacheMode::live) {
      missing.push_back(i);
      continue;
    }
    const std::string key = request_key(requests[i]);
    if (auto hit = cache_->find(key)) {
      out[i] = hit->response.get<std::vector<double>>();
    } else if (options_.mode == CacheMode::replay) {
      throw CacheMiss(key);
    } else {
      missing.push_back(i);
    }
  }
  if (missing.empty()) return out;

  json input = json::array();
  for (auto i : missing) input.push_back(texts[i]);
  auto started = std::chrono::steady_clock::now();
  HttpResponse r = send("/embeddings", json{{"model", model_tag}, {"input", input}}.dump());
  json body = parse_body(r);
  const auto latency = elapsed_ms(started);
  try {
    const json& data = body.at("data");
    if (data.size() != missing.size()) throw json::other_error::create(501, "embedding count mismatch", nullptr);
    for (const auto& item : data) {
      std::size_t idx = item.value("index", std::size_t{0});
      if (idx >= missing.size()) throw json::other_error::create(501, "embedding index out of range", nullptr);
      out[missing[idx]] = item.at("embedding").get<std::vector<double>>();
    }
  } catch (const json::exception&) {
    throw ProviderError(ProviderError::Kind::malformed_response, r.status, r.body, "malformed embeddings response");
  }
  if (options_.mode == CacheMode::record) {
    for (auto i : missing) cache_->append({request_key(requests[i]), requests[i], out[i], latency});
  }
  return out;
}

}  // namespace hypro
