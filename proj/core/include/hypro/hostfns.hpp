#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hypro/dataset.hpp"
#include "hypro/interp/interpreter.hpp"
#include "hypro/link_index.hpp"
#include "hypro/llm_client.hpp"
#include "hypro/templates.hpp"
#include "hypro/trace.hpp"

namespace hypro {

struct Parameter {
  std::string name;
  std::string description;
};

struct FunctionDeclaration {
  std::string name;
  std::vector<Parameter> parameters;
  std::string role;
};

/// Reads declarations.json. `enable_check` false drops `check`.
std::vector<FunctionDeclaration> load_declarations(const TemplateSet& templates, bool enable_check = true);

/// Prompt text: one block per function with its signature, parameters and role.
std::string render_declarations(const std::vector<FunctionDeclaration>& decls);

std::string declarations_digest(const std::vector<FunctionDeclaration>& decls);

inline constexpr std::string_view kNoAnswerSentinel = "NONE";

/// Everything one instance's host functions need. Confined to one worker.
struct HostContext {
  const Corpus& corpus;
  const LinkIndex& index;
  LlmClient& client;
  const TemplateSet& templates;
  TraceSink& sink;
  std::string table_id;
  std::string text_model;
  std::string vision_model;
  int max_output_tokens = 256;
  /// Documents used when a cell resolves to nothing (oracle gold set).
  std::vector<DocRef> fallback_documents;
};

/// Parses plain or formatted numbers: "20,000", "$1,250.50", "-3.5", "€12".
std::optional<double> parse_numeric(std::string_view text);

/// Exact reply "NONE", ignoring case, surrounding whitespace and a final period.
bool is_sentinel_reply(std::string_view reply);

/// "true"/"false" ignoring case, surrounding whitespace and a final period.
std::optional<bool> parse_verdict(std::string_view reply);

/// Throws interp::HostError on a link miss or a provider failure.
std::optional<std::string> extract_info(HostContext& ctx, const std::string& cell, const std::string& target);

/// Throws interp::HostError on a bad operator or an unparseable verdict.
bool check(HostContext& ctx, const std::string& obj1, const std::string& obj2, const std::string& op);

/// Binds extract_info and, when enabled, check into `env`.
void bind_host_functions(interp::Env& env, HostContext& ctx, bool enable_check);

}  // namespace hypro
