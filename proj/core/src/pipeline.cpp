#include "hypro/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "hypro/errors.hpp"
#include "hypro/lang/diagnostics.hpp"
#include "hypro/lang/parser.hpp"
#include "hypro/retriever.hpp"
#include "hypro/text.hpp"

namespace hypro {

using nlohmann::json;
namespace fs = std::filesystem;

std::string to_string(RetrieverKind k) { return k == RetrieverKind::hybrid ? "hybrid" : "embedding"; }

std::optional<RetrieverKind> parse_retriever_kind(const std::string& s) {
  if (s == "hybrid") return RetrieverKind::hybrid;
  if (s == "embedding") return RetrieverKind::embedding;
  return std::nullopt;
}

RetrieverKind EngineConfig::effective_retriever(SourceSplit source) const {
  if (retriever) return *retriever;
  return source == SourceSplit::hybridqa ? RetrieverKind::hybrid : RetrieverKind::embedding;
}

void EngineConfig::validate() const {
  if (shots < 0) throw ConfigError("shots must be >= 0");
  if (max_refinements < 0) throw ConfigError("max_refinements must be >= 0");
  if (retrieve_k < 1) throw ConfigError("retrieve_k must be >= 1");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("lambda must lie in [0, 1]");
  if (cell_char_limit < 8) throw ConfigError("cell_char_limit must be >= 8");
  if (codegen_max_tokens < 1 || host_max_tokens < 1) throw ConfigError("token limits must be positive");
  if (limits.max_steps == 0 || limits.max_seq_len == 0 || limits.max_host_calls == 0 || limits.max_text_len == 0) {
    throw ConfigError("limits must be positive");
  }
}

json to_json(const EngineConfig& c) {
  return {{"shots", c.shots},
          {"max_refinements", c.max_refinements},
          {"retriever", c.retriever ? json(to_string(*c.retriever)) : json(nullptr)},
          {"retrieve_k", c.retrieve_k},
          {"lambda", c.lambda},
          {"enable_check", c.enable_check},
          {"enable_simplification", c.enable_simplification},
          {"enable_refinement", c.enable_refinement},
          {"codegen_model", c.codegen_model},
          {"host_model", c.host_model},
          {"vision_model", c.vision_model},
          {"embedding_model", c.embedding_model},
          {"codegen_max_tokens", c.codegen_max_tokens},
          {"host_max_tokens", c.host_max_tokens},
          {"cell_char_limit", c.cell_char_limit},
          {"limits",
           {{"max_steps", c.limits.max_steps},
            {"max_seq_len", c.limits.max_seq_len},
            {"max_host_calls", c.limits.max_host_calls},
            {"max_text_len", c.limits.max_text_len}}},
          {"mode", to_string(c.mode)}};
}

namespace {

template <typename T>
void read_key(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config key '") + key + "' has the wrong type");
  }
}

}  // namespace

EngineConfig config_from_json(const json& j, EngineConfig c) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> known = {
      "shots",        "max_refinements", "retriever",     "retrieve_k",         "lambda",
      "enable_check", "enable_simplification", "enable_refinement", "codegen_model", "host_model",
      "vision_model", "embedding_model", "codegen_max_tokens", "host_max_tokens", "cell_char_limit",
      "limits",       "mode"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  read_key(j, "shots", c.shots);
  read_key(j, "max_refinements", c.max_refinements);
  if (j.contains("retriever")) {
    if (j["retriever"].is_null()) {
      c.retriever.reset();
    } else {
      std::string s;
      read_key(j, "retriever", s);
      c.retriever = parse_retriever_kind(s);
      if (!c.retriever) throw ConfigError("retriever must be 'hybrid' or 'embedding'");
    }
  }
  read_key(j, "retrieve_k", c.retrieve_k);
  read_key(j, "lambda", c.lambda);
  read_key(j, "enable_check", c.enable_check);
  read_key(j, "enable_simplification", c.enable_simplification);
  read_key(j, "enable_refinement", c.enable_refinement);
  read_key(j, "codegen_model", c.codegen_model);
  read_key(j, "host_model", c.host_model);
  read_key(j, "vision_model", c.vision_model);
  read_key(j, "embedding_model", c.embedding_model);
  read_key(j, "codegen_max_tokens", c.codegen_max_tokens);
  read_key(j, "host_max_tokens", c.host_max_tokens);
  read_key(j, "cell_char_limit", c.cell_char_limit);
  if (j.contains("limits")) {
    const json& l = j["limits"];
    if (!l.is_object()) throw ConfigError("config key 'limits' must be an object");
    read_key(l, "max_steps", c.limits.max_steps);
    read_key(l, "max_seq_len", c.limits.max_seq_len);
    read_key(l, "max_host_calls", c.limits.max_host_calls);
    read_key(l, "max_text_len", c.limits.max_text_len);
  }
  if (j.contains("mode")) {
    std::string s;
    read_key(j, "mode", s);
    auto m = parse_cache_mode(s);
    if (!m) throw ConfigError("mode must be live, replay or record");
    c.mode = *m;
  }
  c.validate();
  return c;
}

// ---- records -------------------------------------------------------------------

namespace {

json attempt_to_json(const Attempt& a) {
  json j = {{"source", a.source}, {"status", a.status}, {"answer", a.answer}, {"steps", a.steps},
            {"host_calls", a.host_calls}};
  if (!a.error_class.empty()) {
    j["error_class"] = a.error_class;
    j["error_line"] = a.error_line;
    j["message"] = a.message;
  }
  if (!a.feedback.empty()) j["feedback"] = a.feedback;
  return j;
}

Attempt attempt_from_json(const json& j) {
  Attempt a;
  a.source = j.at("source").get<std::string>();
  a.status = j.at("status").get<std::string>();
  a.answer = j.value("answer", std::vector<std::string>{});
  a.error_class = j.value("error_class", "");
  a.error_line = j.value("error_line", 0);
  a.message = j.value("message", "");
  a.feedback = j.value("feedback", "");
  a.steps = j.value("steps", std::size_t{0});
  a.host_calls = j.value("host_calls", std::size_t{0});
  return a;
}

}  // namespace

json to_json(const PredictionRecord& r, bool include_timing) {
  json attempts = json::array();
  for (const auto& a : r.attempts) attempts.push_back(attempt_to_json(a));
  json exchanges = json::array();
  for (const auto& e : r.exchanges) exchanges.push_back(to_json(e));
  json calls = json::array();
  for (const auto& c : r.host_calls) calls.push_back(to_json(c));
  json j = {{"question_id", r.question_id},
            {"question", r.question},
            {"simplified_question", r.simplified_question},
            {"attempts", std::move(attempts)},
            {"answer", r.answer},
            {"exchanges", std::move(exchanges)},
            {"host_calls", std::move(calls)}};
  if (include_timing) j["wall_ms"] = r.wall_ms;
  return j;
}

PredictionRecord record_from_json(const json& j) {
  PredictionRecord r;
  r.question_id = j.at("question_id").get<std::string>();
  r.question = j.value("question", "");
  r.simplified_question = j.value("simplified_question", r.question);
  for (const auto& a : j.value("attempts", json::array())) r.attempts.push_back(attempt_from_json(a));
  r.answer = j.at("answer").get<std::vector<std::string>>();
  for (const auto& e : j.value("exchanges", json::array())) r.exchanges.push_back(exchange_from_json(e));
  for (const auto& c : j.value("host_calls", json::array())) r.host_calls.push_back(host_call_from_json(c));
  r.wall_ms = j.value("wall_ms", 0.0);
  return r;
}

std::vector<PredictionRecord> read_predictions(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw MissingFile(file.string());
  std::vector<PredictionRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      out.push_back(record_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw SchemaMismatch(file.filename().string() + " line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void write_predictions(const std::vector<PredictionRecord>& records, const fs::path& file, bool include_timing) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw MissingFile(file.string());
  for (const auto& r : records) out << to_json(r, include_timing).dump() << "\n";
}

void write_answers_tsv(const std::vector<PredictionRecord>& records, const fs::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw MissingFile(file.string());
  auto clean = [](std::string s) {
    for (char& c : s) {
      if (c == '\t' || c == '\n' || c == '\r') c = ' ';
    }
    return s;
  };
  for (const auto& r : records) {
    std::string joined;
    for (std::size_t i = 0; i < r.answer.size(); ++i) joined += (i ? ", " : "") + r.answer[i];
    out << clean(r.question_id) << "\t" << clean(joined) << "\n";
  }
}

// ---- prompts ---------------------------------------------------------------------

std::vector<FewShot> load_shots(const TemplateSet& templates, SourceSplit source, bool enable_check) {
  const std::string name = source == SourceSplit::hybridqa ? "shots_hybridqa.json" : "shots_multimodalqa.json";
  std::vector<FewShot> out;
  try {
    for (const auto& s : json::parse(templates.raw(name))) {
      FewShot shot{s.value("kind", ""), s.at("question").get<std::string>(), s.at("table").get<std::string>(),
                   s.at("program").get<std::string>()};
      if (!enable_check && shot.program.find("check(") != std::string::npos) continue;
      out.push_back(std::move(shot));
    }
  } catch (const json::exception& e) {
    throw ConfigError(name + ": " + e.what());
  }
  return out;
}

namespace {

std::string fenced(const std::string& program) { return "```python\n" + program + "\n```"; }

std::vector<std::string> split_lines(const std::string& s) {
  std::vector<std::string> lines;
  std::istringstream is(s);
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

std::string join_lines(const std::vector<std::string>& lines, std::size_t begin, std::size_t end) {
  std::string out;
  for (std::size_t i = begin; i < end; ++i) {
    out += lines[i];
    if (i + 1 < end) out += "\n";
  }
  return out;
}

// A block that does something, not a lone word of prose.
bool is_program(const lang::Ast& ast) {
  for (const auto& st : ast.statements) {
    if (!std::holds_alternative<lang::ExprStmt>(st.node)) return true;
  }
  return false;
}

std::string strip_trailing_blank(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == ' ' || s.back() == '\r')) s.pop_back();
  return s;
}

}  // namespace

std::string extract_program(const std::string& response) {
  const auto lines = split_lines(response);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).rfind("```", 0) != 0) continue;
    std::size_t end = i + 1;
    while (end < lines.size() && trim(lines[end]).rfind("```", 0) != 0) ++end;
    std::string body = strip_trailing_blank(join_lines(lines, i + 1, end));
    if (trim(body).empty()) throw EmptyGeneration();
    return body;
  }
  for (std::size_t begin = 0; begin < lines.size(); ++begin) {
    if (trim(lines[begin]).empty() || lines[begin][0] == ' ' || lines[begin][0] == '\t') continue;
    for (std::size_t end = lines.size(); end > begin; --end) {
      std::string candidate = strip_trailing_blank(join_lines(lines, begin, end));
      auto parsed = lang::parse(candidate);
      if (auto* ast = std::get_if<lang::Ast>(&parsed); ast && is_program(*ast)) return candidate;
    }
  }
  std::string whole = strip_trailing_blank(trim(response));
  if (whole.empty()) throw EmptyGeneration();
  return whole;
}

namespace {

std::string snippet_of(const Document& doc) {
  if (doc.kind == DocKind::image) return "Image: " + doc.title;
  std::string text = doc.text.size() > 300 ? doc.text.substr(0, 300) + "…" : doc.text;
  return doc.title + ": " + text;
}

std::string retrieval_text(const Document& doc) {
  return doc.kind == DocKind::image ? doc.title : doc.title + " " + doc.text;
}

bool mentions_cell(const std::string& text, const TableContext& table) {
  const std::string hay = canonicalize_cell_key(text);
  for (const auto& row : table.rows) {
    for (const auto& cell : row) {
      std::string key = canonicalize_cell_key(cell.text);
      if (!key.empty() && hay.find(key) != std::string::npos) return true;
    }
  }
  return false;
}

std::string evidence_text(const Engine& engine, const QAInstance& instance) {
  if (!engine.corpus.oracle || instance.gold_docs.empty()) return "";
  std::string out = "\nGold documents for this question (read them with extract_info):\n";
  for (const auto& ref : instance.gold_docs) {
    const Document* doc = engine.corpus.find_document(ref.doc_id);
    if (!doc) continue;
    out += "- " + doc->title + " (" + to_string(doc->kind) + ")\n";
  }
  return out;
}

}  // namespace

std::string simplify_query(const Engine& engine, const QAInstance& instance, TraceSink& sink) {
  const TableContext& table = engine.corpus.table(instance.table_id);
  std::vector<RetrievalDoc> docs;
  for (const auto& ref : retrievable_documents(engine.corpus, instance)) {
    if (const Document* doc = engine.corpus.find_document(ref.doc_id)) docs.emplace_back(doc->doc_id, retrieval_text(*doc));
  }
  if (docs.empty()) return instance.question;
  try {
    const auto& cfg = engine.config;
    std::vector<RetrievalHit> hits;
    if (cfg.effective_retriever(engine.corpus.source) == RetrieverKind::embedding) {
      try {
        hits = embed_retrieve(instance.question, docs, cfg.retrieve_k, [&](const std::vector<std::string>& texts) {
          return engine.client.embed(cfg.embedding_model, texts);
        });
      } catch (const EmbeddingUnavailable&) {
        hits = hybrid_retrieve(instance.question, docs, cfg.retrieve_k, cfg.lambda);
      }
    } else {
      hits = hybrid_retrieve(instance.question, docs, cfg.retrieve_k, cfg.lambda);
    }
    std::string snippets;
    for (std::size_t i = 0; i < hits.size(); ++i) {
      const Document* doc = engine.corpus.find_document(hits[i].doc_id);
      snippets += "[" + std::to_string(i + 1) + "] " + snippet_of(*doc) + (i + 1 < hits.size() ? "\n" : "");
    }
    ChatRequest req;
    req.model_tag = cfg.codegen_model;
    req.max_output_tokens = cfg.host_max_tokens;
    req.messages.push_back({"user",
                            engine.templates.render("simplify.txt",
                                                    {{"snippets", snippets},
                                                     {"table", render_table_prompt(table, cfg.cell_char_limit)},
                                                     {"question", instance.question}}),
                            {}});
    std::string reply = traced_chat(engine.client, sink, "simplify", req);
    auto lines = split_lines(trim(reply));
    std::string rewrite = lines.empty() ? "" : trim(lines.front());
    if (rewrite.size() >= 2 && rewrite.front() == '"' && rewrite.back() == '"') rewrite = rewrite.substr(1, rewrite.size() - 2);
    if (rewrite.empty() || !mentions_cell(rewrite, table)) return instance.question;
    return rewrite;
  } catch (const std::exception&) {
    return instance.question;
  }
}

std::vector<ChatMessage> generation_messages(const Engine& engine, const QAInstance& instance,
                                             const std::string& question) {
  const auto& cfg = engine.config;
  const auto decls = load_declarations(engine.templates, cfg.enable_check);
  std::vector<ChatMessage> messages;
  messages.push_back({"system",
                      engine.templates.render("codegen_system.txt", {{"grammar", engine.templates.raw("grammar.ebnf")},
                                                                     {"declarations", render_declarations(decls)}}),
                      {}});
  auto shots = load_shots(engine.templates, engine.corpus.source, cfg.enable_check);
  if (shots.size() > static_cast<std::size_t>(cfg.shots)) shots.resize(static_cast<std::size_t>(cfg.shots));
  for (const auto& s : shots) {
    messages.push_back(
        {"user", engine.templates.render("codegen_user.txt", {{"table", s.table}, {"evidence", ""}, {"question", s.question}}),
         {}});
    messages.push_back({"assistant", fenced(s.program), {}});
  }
  const TableContext& table = engine.corpus.table(instance.table_id);
  messages.push_back({"user",
                      engine.templates.render("codegen_user.txt",
                                              {{"table", render_table_prompt(table, cfg.cell_char_limit)},
                                               {"evidence", evidence_text(engine, instance)},
                                               {"question", question}}),
                      {}});
  return messages;
}

std::string generate_program(const Engine& engine, const std::vector<ChatMessage>& messages, TraceSink& sink) {
  ChatRequest req{engine.config.codegen_model, messages, 0.0, engine.config.codegen_max_tokens};
  return extract_program(traced_chat(engine.client, sink, "codegen", req));
}

std::string refine_program(const Engine& engine, const std::vector<ChatMessage>& messages,
                           const std::string& prev_source, const std::string& feedback, TraceSink& sink) {
  ChatRequest req{engine.config.codegen_model, messages, 0.0, engine.config.codegen_max_tokens};
  req.messages.push_back({"assistant", fenced(prev_source), {}});
  req.messages.push_back({"user", engine.templates.render("refine_user.txt", {{"feedback", feedback}}), {}});
  return extract_program(traced_chat(engine.client, sink, "refine", req));
}

namespace {

Attempt execute_attempt(const Engine& engine, const QAInstance& instance, const std::string& source, TraceSink& sink) {
  Attempt a;
  a.source = source;
  auto parsed = lang::parse(source);
  if (auto* err = std::get_if<lang::ParseError>(&parsed)) {
    a.status = "parse_error";
    a.error_class = "SyntaxError";
    a.error_line = err->line;
    a.message = err->message;
    a.feedback = lang::format_parse_error(*err);
    return a;
  }
  const TableContext& table = engine.corpus.table(instance.table_id);
  interp::Env env = interp::Env::for_table(table);
  HostContext ctx{engine.corpus,
                  engine.index,
                  engine.client,
                  engine.templates,
                  sink,
                  instance.table_id,
                  engine.config.host_model,
                  engine.config.vision_model,
                  engine.config.host_max_tokens,
                  engine.corpus.oracle ? instance.gold_docs : std::vector<DocRef>{}};
  bind_host_functions(env, ctx, engine.config.enable_check);
  auto outcome = interp::execute(std::get<lang::Ast>(parsed), std::move(env), engine.config.limits);
  a.steps = outcome.steps;
  a.host_calls = outcome.host_calls;
  if (!outcome.ok()) {
    const auto& err = outcome.error();
    a.status = "error";
    a.error_class = lang::class_name(err.cls);
    a.error_line = err.line;
    a.message = err.message;
    a.feedback = lang::format_traceback(err, source);
    return a;
  }
  a.answer = answer_value_to_strings(interp::to_answer_value(outcome.value()));
  a.answer.erase(std::remove_if(a.answer.begin(), a.answer.end(), [](const std::string& s) { return trim(s).empty(); }),
                 a.answer.end());
  if (a.answer.empty()) {
    a.status = "empty";
    a.feedback = std::string(kEmptyResultNote);
  } else {
    a.status = "ok";
  }
  return a;
}

Attempt generation_failure(const std::exception& e) {
  Attempt a;
  a.status = "generation_error";
  a.error_class = "GenerationError";
  a.message = e.what();
  return a;
}

}  // namespace

PredictionRecord run_instance(const Engine& engine, const QAInstance& instance) {
  const auto started = std::chrono::steady_clock::now();
  const auto& cfg = engine.config;
  PredictionRecord record;
  record.question_id = instance.question_id;
  record.question = instance.question;
  record.simplified_question = instance.question;
  TraceSink sink;

  if (cfg.enable_simplification && !engine.corpus.oracle) record.simplified_question = simplify_query(engine, instance, sink);

  const std::size_t budget = 1 + (cfg.enable_refinement ? static_cast<std::size_t>(cfg.max_refinements) : 0);
  std::vector<ChatMessage> messages;
  std::string source;
  try {
    messages = generation_messages(engine, instance, record.simplified_question);
    source = generate_program(engine, messages, sink);
  } catch (const std::exception& e) {
    record.attempts.push_back(generation_failure(e));
  }

  if (record.attempts.empty()) {
    for (std::size_t i = 0; i < budget; ++i) {
      sink.attempt = i;
      Attempt a = execute_attempt(engine, instance, source, sink);
      const bool done = a.status == "ok";
      const std::string feedback = a.feedback;
      record.attempts.push_back(std::move(a));
      if (done) {
        record.answer = record.attempts.back().answer;
        break;
      }
      if (i + 1 == budget) break;
      try {
        source = refine_program(engine, messages, source, feedback, sink);
      } catch (const std::exception& e) {
        record.attempts.push_back(generation_failure(e));
        break;
      }
    }
  }

  record.exchanges = std::move(sink.exchanges);
  record.host_calls = std::move(sink.host_calls);
  record.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  return record;
}

std::vector<PredictionRecord> run_batch(const Engine& engine, const std::vector<QAInstance>& instances,
                                        std::size_t workers, const ProgressFn& progress) {
  std::vector<PredictionRecord> out(instances.size());
  std::atomic<std::size_t> next{0};
  std::size_t done = 0;
  std::mutex progress_mutex;
  std::exception_ptr failure;
  auto work = [&] {
    try {
      for (std::size_t i = next++; i < instances.size(); i = next++) {
        out[i] = run_instance(engine, instances[i]);
        if (progress) {
          std::lock_guard lock(progress_mutex);
          progress(++done, instances.size(), out[i]);
        }
      }
    } catch (...) {
      std::lock_guard lock(progress_mutex);
      if (!failure) failure = std::current_exception();
      next = instances.size();
    }
  };
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(instances.size(), 1));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace hypro
