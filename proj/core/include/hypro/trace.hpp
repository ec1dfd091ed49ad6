#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hypro/llm_client.hpp"
#include "hypro/types.hpp"

namespace hypro {

/// One LLM request/response pair as seen by the pipeline.
struct Exchange {
  std::string purpose;  // simplify, codegen, refine, extract_text, extract_image, check, check_reask
  std::string key;
  nlohmann::json request;  // canonical form
  std::string response;
  std::string error;  // empty on success

  friend bool operator==(const Exchange&, const Exchange&) = default;
};

/// One host function invocation made by a program.
struct HostCallTrace {
  std::string function;
  std::vector<std::string> args;
  std::size_t attempt = 0;
  std::vector<DocRef> documents;      // extract_info: documents consulted
  std::vector<std::size_t> exchanges;  // indices into the owning exchange list
  bool fast_path = false;             // check decided without the model
  std::string outcome;                // text, none, true, false, error
  std::string result;
  std::string error;

  friend bool operator==(const HostCallTrace&, const HostCallTrace&) = default;
};

/// Per-instance collector. Confined to one worker.
struct TraceSink {
  std::vector<Exchange> exchanges;
  std::vector<HostCallTrace> host_calls;
  std::size_t attempt = 0;
};

/// Sends `req` and records the exchange, including failed ones.
std::string traced_chat(LlmClient& client, TraceSink& sink, const std::string& purpose, const ChatRequest& req);

nlohmann::json to_json(const Exchange& e);
Exchange exchange_from_json(const nlohmann::json& j);
nlohmann::json to_json(const HostCallTrace& t);
HostCallTrace host_call_from_json(const nlohmann::json& j);

}  // namespace hypro
