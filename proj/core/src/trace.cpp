#include "hypro/trace.hpp"

namespace hypro {

using nlohmann::json;

std::string traced_chat(LlmClient& client, TraceSink& sink, const std::string& purpose, const ChatRequest& req) {
  Exchange ex;
  ex.purpose = purpose;
  ex.request = canonical_request(req);
  ex.key = request_key(ex.request);
  bool vision = false;
  for (const auto& m : req.messages) vision = vision || !m.images.empty();
  try {
    ex.response = vision ? client.chat_vision(req) : client.chat(req);
  } catch (const std::exception& e) {
    ex.error = e.what();
    sink.exchanges.push_back(std::move(ex));
    throw;
  }
  sink.exchanges.push_back(ex);
  return ex.response;
}

json to_json(const Exchange& e) {
  json j = {{"purpose", e.purpose}, {"key", e.key}, {"request", e.request}, {"response", e.response}};
  if (!e.error.empty()) j["error"] = e.error;
  return j;
}

Exchange exchange_from_json(const json& j) {
  Exchange e;
  e.purpose = j.at("purpose").get<std::string>();
  e.key = j.at("key").get<std::string>();
  e.request = j.at("request");
  e.response = j.value("response", "");
  e.error = j.value("error", "");
  return e;
}

json to_json(const HostCallTrace& t) {
  json docs = json::array();
  for (const auto& d : t.documents) docs.push_back({{"doc_id", d.doc_id}, {"kind", to_string(d.kind)}});
  json j = {{"function", t.function}, {"args", t.args},           {"attempt", t.attempt},
            {"documents", docs},      {"exchanges", t.exchanges}, {"fast_path", t.fast_path},
            {"outcome", t.outcome},   {"result", t.result}};
  if (!t.error.empty()) j["error"] = t.error;
  return j;
}

HostCallTrace host_call_from_json(const json& j) {
  HostCallTrace t;
  t.function = j.at("function").get<std::string>();
  t.args = j.at("args").get<std::vector<std::string>>();
  t.attempt = j.value("attempt", std::size_t{0});
  for (const auto& d : j.value("documents", json::array())) {
    t.documents.push_back({d.at("doc_id").get<std::string>(),
                           parse_doc_kind(d.at("kind").get<std::string>()).value_or(DocKind::passage)});
  }
  t.exchanges = j.value("exchanges", std::vector<std::size_t>{});
  t.fast_path = j.value("fast_path", false);
  t.outcome = j.value("outcome", "");
  t.result = j.value("result", "");
  t.error = j.value("error", "");
  return t;
}

}  // namespace hypro
