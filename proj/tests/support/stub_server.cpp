#include "support/stub_server.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "support/transports.hpp"

namespace hypro::test {

using nlohmann::json;

StubServer::StubServer(int fail_first) : server_(std::make_unique<httplib::Server>()), fail_remaining_(fail_first) {
  auto guard = [this](httplib::Response& res) {
    ++requests_;
    if (fail_remaining_.fetch_sub(1) > 0) {
      res.status = 500;
      res.set_content("{\"error\":\"try again\"}", "application/json");
      return false;
    }
    return true;
  };
  server_->Post("/v1/chat/completions", [guard](const httplib::Request& req, httplib::Response& res) {
    if (!guard(res)) return;
    json body = json::parse(req.body);
    const json& content = body["messages"].back()["content"];
    std::string text = content.is_string() ? content.get<std::string>() : content[0]["text"].get<std::string>();
    json reply = {{"choices", json::array({{{"message", {{"role", "assistant"}, {"content", "stub: " + text}}}}})}};
    res.set_content(reply.dump(), "application/json");
  });
  server_->Post("/v1/embeddings", [guard](const httplib::Request& req, httplib::Response& res) {
    if (!guard(res)) return;
    json body = json::parse(req.body);
    json data = json::array();
    for (std::size_t i = 0; i < body["input"].size(); ++i) {
      data.push_back({{"index", i}, {"embedding", pseudo_embedding(body["input"][i].get<std::string>(), 16)}});
    }
    res.set_content(json{{"data", data}}.dump(), "application/json");
  });
  port_ = server_->bind_to_any_port("127.0.0.1");
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

StubServer::~StubServer() {
  server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace hypro::test
