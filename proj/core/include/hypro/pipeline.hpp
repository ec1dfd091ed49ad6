#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hypro/dataset.hpp"
#include "hypro/hostfns.hpp"
#include "hypro/interp/interpreter.hpp"
#include "hypro/link_index.hpp"
#include "hypro/llm_client.hpp"
#include "hypro/templates.hpp"
#include "hypro/trace.hpp"

namespace hypro {

enum class RetrieverKind { hybrid, embedding };

std::string to_string(RetrieverKind k);
std::optional<RetrieverKind> parse_retriever_kind(const std::string& s);

struct EngineConfig {
  int shots = 4;
  int max_refinements = 2;
  std::optional<RetrieverKind> retriever;  // unset: hybrid for HybridQA, embedding for MultiModalQA
  std::size_t retrieve_k = 3;
  double lambda = 0.7;
  bool enable_check = true;
  bool enable_simplification = true;
  bool enable_refinement = true;
  std::string codegen_model = "gpt-4-0613";
  std::string host_model = "gpt-4-0613";
  std::string vision_model = "gpt-4-vision-preview";
  std::string embedding_model = "all-mpnet-base-v2";
  int codegen_max_tokens = 1024;
  int host_max_tokens = 256;
  std::size_t cell_char_limit = 64;
  interp::Limits limits;
  CacheMode mode = CacheMode::replay;

  RetrieverKind effective_retriever(SourceSplit source) const;
  /// Throws ConfigError on out-of-range values.
  void validate() const;
};

nlohmann::json to_json(const EngineConfig& c);
/// Applies the keys present in `j` on top of `base`. Unknown keys and
/// ill-typed values raise ConfigError.
EngineConfig config_from_json(const nlohmann::json& j, EngineConfig base = {});

struct Attempt {
  std::string source;
  std::string status;  // ok, empty, error, parse_error, generation_error
  std::vector<std::string> answer;
  std::string error_class;  // NameError, SyntaxError, ... when failed
  int error_line = 0;
  std::string message;
  std::string feedback;  // traceback or note sent to refinement
  std::size_t steps = 0;
  std::size_t host_calls = 0;

  bool failed() const { return status == "error" || status == "parse_error" || status == "generation_error"; }
  friend bool operator==(const Attempt&, const Attempt&) = default;
};

struct PredictionRecord {
  std::string question_id;
  std::string question;
  std::string simplified_question;
  std::vector<Attempt> attempts;
  std::vector<std::string> answer;  // empty when no attempt produced a result
  std::vector<Exchange> exchanges;
  std::vector<HostCallTrace> host_calls;
  double wall_ms = 0;

  friend bool operator==(const PredictionRecord&, const PredictionRecord&) = default;
};

nlohmann::json to_json(const PredictionRecord& r, bool include_timing = true);
PredictionRecord record_from_json(const nlohmann::json& j);

/// One line per record. Throws SchemaMismatch naming the bad line.
std::vector<PredictionRecord> read_predictions(const std::filesystem::path& file);
/// `include_timing` false drops wall_ms so replays are byte-identical.
void write_predictions(const std::vector<PredictionRecord>& records, const std::filesystem::path& file,
                       bool include_timing = true);
/// `question_id \t answer`, list answers joined with ", ".
void write_answers_tsv(const std::vector<PredictionRecord>& records, const std::filesystem::path& file);

inline constexpr std::string_view kEmptyResultNote = "the program returned an empty result";

/// Shared, read-mostly state for a run.
struct Engine {
  const Corpus& corpus;
  const LinkIndex& index;
  LlmClient& client;
  const TemplateSet& templates;
  EngineConfig config;
};

struct FewShot {
  std::string kind;
  std::string question;
  std::string table;
  std::string program;
};

/// The shot file for `source`. Without `check`, exemplars calling it are dropped.
std::vector<FewShot> load_shots(const TemplateSet& templates, SourceSplit source, bool enable_check);

/// Extracts the program from a model reply: the first fenced block, else the
/// first run of lines that parses. Throws EmptyGeneration when nothing is left.
std::string extract_program(const std::string& response);

std::string simplify_query(const Engine& engine, const QAInstance& instance, TraceSink& sink);

/// Messages up to and including the question; shared by generation and refinement.
std::vector<ChatMessage> generation_messages(const Engine& engine, const QAInstance& instance,
                                             const std::string& question);

std::string generate_program(const Engine& engine, const std::vector<ChatMessage>& messages, TraceSink& sink);

std::string refine_program(const Engine& engine, const std::vector<ChatMessage>& messages,
                           const std::string& prev_source, const std::string& feedback, TraceSink& sink);

PredictionRecord run_instance(const Engine& engine, const QAInstance& instance);

using ProgressFn = std::function<void(std::size_t done, std::size_t total, const PredictionRecord&)>;

/// Runs instances on `workers` threads; output order follows input order.
std::vector<PredictionRecord> run_batch(const Engine& engine, const std::vector<QAInstance>& instances,
                                        std::size_t workers, const ProgressFn& progress = {});

}  // namespace hypro
