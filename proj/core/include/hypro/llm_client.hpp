#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <shared_mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace hypro {

enum class CacheMode { live, replay, record };

std::string to_string(CacheMode m);
std::optional<CacheMode> parse_cache_mode(const std::string& s);

struct ImageAttachment {
  std::string payload;  // raw bytes
  std::string media_type;
};

struct ChatMessage {
  std::string role;  // system, user, assistant
  std::string content;
  std::vector<ImageAttachment> images;  // user messages only
};

struct ChatRequest {
  std::string model_tag;
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
  int max_output_tokens = 1024;
};

/// Canonical form used for hashing and stored in the cache. Image payloads
/// are replaced by their SHA-256 so the key ignores file names.
nlohmann::json canonical_request(const ChatRequest& req);
nlohmann::json canonical_embedding_request(const std::string& model_tag, const std::string& text);

/// SHA-256 of the compact dump of a canonical request.
std::string request_key(const nlohmann::json& canonical);
inline std::string cache_key(const ChatRequest& req) { return request_key(canonical_request(req)); }

struct Transcript {
  std::string key;
  nlohmann::json request;
  nlohmann::json response;  // text for chat, number array for embeddings
  std::int64_t latency_ms = 0;
};

nlohmann::json to_json(const Transcript& t);
Transcript transcript_from_json(const nlohmann::json& j);

/// Append-only JSONL store; the last line for a key wins. A torn final line
/// (from an interrupted write) is ignored on load.
class TranscriptCache {
 public:
  TranscriptCache() = default;
  explicit TranscriptCache(std::filesystem::path file);

  std::optional<Transcript> find(const std::string& key) const;
  void append(const Transcript& t);
  std::size_t size() const;
  const std::filesystem::path& file() const { return file_; }

 private:
  std::filesystem::path file_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, Transcript> entries_;
};

struct CacheVerifyReport {
  std::size_t lines = 0;
  std::size_t entries = 0;
  std::size_t superseded = 0;  // earlier lines shadowed by a later one
  std::vector<std::string> problems;

  bool ok() const { return problems.empty(); }
};

/// Checks every line parses and that each stored key matches its request.
CacheVerifyReport verify_cache_file(const std::filesystem::path& file);

struct HttpResponse {
  int status = 0;
  std::string body;
};

/// One POST to an OpenAI-compatible endpoint. Implementations throw
/// ProviderError(transport) or Timeout on connection failures.
class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse post(const std::string& path, const std::string& body, const std::string& api_key) = 0;
};

/// `base_url` like "https://api.openai.com/v1" or "http://127.0.0.1:8080".
std::unique_ptr<HttpTransport> make_http_transport(const std::string& base_url, int timeout_seconds);

struct ClientOptions {
  CacheMode mode = CacheMode::replay;
  std::filesystem::path cache_file;
  std::string api_base = "https://api.openai.com/v1";
  std::string api_key;
  int max_retries = 3;
  int backoff_ms = 500;
  int timeout_seconds = 120;
  int max_in_flight = 4;

  /// Fills api_key and api_base from HYPRO_API_KEY and HYPRO_API_BASE.
  static ClientOptions from_environment(CacheMode mode, std::filesystem::path cache_file);
};

/// Shared by all workers. Replay never touches the network; record serves
/// cached keys and fills misses live; live bypasses the cache entirely.
class LlmClient {
 public:
  explicit LlmClient(ClientOptions options, std::shared_ptr<HttpTransport> transport = nullptr);

  /// Throws CacheMiss, ProviderError or Timeout.
  std::string chat(const ChatRequest& req);
  /// As chat; requires at least one image attachment.
  std::string chat_vision(const ChatRequest& req);
  std::vector<std::vector<double>> embed(const std::string& model_tag, const std::vector<std::string>& texts);

  CacheMode mode() const { return options_.mode; }
  std::size_t network_calls() const { return network_calls_.load(); }
  const TranscriptCache& cache() const { return *cache_; }

 private:
  HttpResponse send(const std::string& path, const std::string& body);
  HttpTransport& transport();

  ClientOptions options_;
  std::shared_ptr<HttpTransport> transport_;
  std::mutex transport_mutex_;
  std::unique_ptr<TranscriptCache> cache_;
  std::counting_semaphore<> in_flight_;
  std::atomic<std::size_t> network_calls_{0};
};

/// Rejects media types other than image/jpeg and image/png, and images on
/// non-user messages, with ProviderError(invalid_attachment).
void validate_attachments(const ChatRequest& req);

}  // namespace hypro
