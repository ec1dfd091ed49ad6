#include "support/transports.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <regex>

#include "hypro/errors.hpp"
#include "hypro/pipeline.hpp"
#include "hypro/text.hpp"

namespace hypro::test {

using nlohmann::json;

HttpResponse ScriptedTransport::post(const std::string& path, const std::string& body, const std::string&) {
  ++calls_;
  json j = json::parse(body);
  {
    std::lock_guard lock(mutex_);
    bodies_.push_back(j);
  }
  if (path == "/embeddings") {
    json data = json::array();
    for (std::size_t i = 0; i < j["input"].size(); ++i) {
      const std::string text = j["input"][i].get<std::string>();
      data.push_back({{"index", i}, {"embedding", embed_ ? embed_(text) : pseudo_embedding(text)}});
    }
    return {200, json{{"data", data}}.dump()};
  }
  json reply = {{"choices", json::array({{{"message", {{"role", "assistant"}, {"content", chat_(j)}}}}})}};
  return {200, reply.dump()};
}

std::vector<json> ScriptedTransport::bodies() const {
  std::lock_guard lock(mutex_);
  return bodies_;
}

HttpResponse NoNetworkTransport::post(const std::string&, const std::string&, const std::string&) {
  ++calls_;
  throw ProviderError(ProviderError::Kind::transport, 0, "", "network access is disabled in this test");
}

std::vector<double> pseudo_embedding(const std::string& text, std::size_t dim) {
  std::seed_seq seq(text.begin(), text.end());
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> dist;
  std::vector<double> v(dim);
  double norm = 0;
  for (auto& x : v) {
    x = dist(rng);
    norm += x * x;
  }
  for (auto& x : v) x /= std::sqrt(norm);
  return v;
}

namespace {

std::string text_content(const json& message) {
  const json& c = message.at("content");
  if (c.is_string()) return c.get<std::string>();
  for (const auto& part : c) {
    if (part.value("type", "") == "text") return part.at("text").get<std::string>();
  }
  return "";
}

std::string after(const std::string& text, const std::string& marker) {
  auto pos = text.rfind(marker);
  if (pos == std::string::npos) return "";
  std::string rest = text.substr(pos + marker.size());
  return rest.substr(0, rest.find('\n'));
}

}  // namespace

FixtureScript::FixtureScript(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw MissingFile(file);
  json j = json::parse(in);
  for (const auto& q : j.at("questions")) {
    const std::string question = q.at("question").get<std::string>();
    programs_[question] = q.at("responses").get<std::vector<std::string>>();
    if (q.contains("rewrite")) {
      rewrites_[question] = q["rewrite"].get<std::string>();
      aliases_[q["rewrite"].get<std::string>()] = question;
    }
  }
  for (const auto& e : j.at("extractions")) {
    extractions_[{e.at("cell").get<std::string>(), e.at("target").get<std::string>()}] = e.at("reply").get<std::string>();
  }
  for (const auto& c : j.at("checks")) {
    verdicts_[{c.at("obj1").get<std::string>(), c.at("op").get<std::string>(), c.at("obj2").get<std::string>()}] =
        c.at("replies").get<std::vector<std::string>>();
  }
}

std::string FixtureScript::codegen(const json& messages) const {
  const std::string last = text_content(messages.back());
  const bool refine = last.rfind("The program above did not produce an answer.", 0) == 0;
  const std::size_t question_msg = refine ? messages.size() - 3 : messages.size() - 1;
  std::string question = after(text_content(messages[question_msg]), "Question: ");
  if (auto a = aliases_.find(question); a != aliases_.end()) question = a->second;
  auto it = programs_.find(question);
  if (it == programs_.end()) return "I cannot answer that.";
  const auto& responses = it->second;
  if (!refine) return responses.front();
  const std::string prev = extract_program(text_content(messages[messages.size() - 2]));
  for (std::size_t i = 0; i < responses.size(); ++i) {
    std::string candidate;
    try {
      candidate = extract_program(responses[i]);
    } catch (const std::exception&) {
      continue;
    }
    if (candidate == prev) return responses[std::min(i + 1, responses.size() - 1)];
  }
  return responses.back();
}

std::string FixtureScript::respond(const json& body) const {
  const json& messages = body.at("messages");
  if (messages.front().at("role") == "system") return codegen(messages);
  const std::string first = text_content(messages.front());
  if (first.rfind("Rewrite the question", 0) == 0) {
    std::string question = after(first, "Question: ");
    auto it = rewrites_.find(question);
    return it == rewrites_.end() ? question : it->second;
  }
  if (first.rfind("A table cell reads \"", 0) == 0) {
    static const std::regex cell_re("^A table cell reads \"(.*)\"\\. It links to");
    std::smatch m;
    std::string cell = std::regex_search(first, m, cell_re) ? m[1].str() : "";
    std::string target = after(first, "Find this information in the passage: ");
    if (target.empty()) target = after(first, "Find this information in the image: ");
    auto it = extractions_.find({cell, target});
    return it == extractions_.end() ? "NONE" : it->second;
  }
  if (first.rfind("Decide whether a comparison holds", 0) == 0) {
    static const std::regex cmp_re("Comparison:\n\"(.*)\" (==|>|<) \"(.*)\"\n");
    std::smatch m;
    if (!std::regex_search(first, m, cmp_re)) return "false";
    auto it = verdicts_.find({m[1].str(), m[2].str(), m[3].str()});
    if (it == verdicts_.end()) return "false";
    const std::size_t round = messages.size() > 1 ? 1 : 0;
    return it->second[std::min(round, it->second.size() - 1)];
  }
  return "NONE";
}

}  // namespace hypro::test
