#include "cli/commands.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "hypro/dataset.hpp"
#include "hypro/errors.hpp"
#include "hypro/eval.hpp"
#include "hypro/hash.hpp"
#include "hypro/hostfns.hpp"
#include "hypro/link_index.hpp"
#include "hypro/pipeline.hpp"
#include "hypro/templates.hpp"
#include "hypro/text.hpp"

namespace hypro::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string utc_now() {
  std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json read_json(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw MissingFile(file.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(file.string() + ": " + e.what());
  }
}

void write_file(const fs::path& file, const std::string& content) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw MissingFile(file.string());
  out << content;
}

Corpus load_corpus(const DatasetArgs& d) {
  auto split = parse_split(d.split);
  if (!split) throw ConfigError("unknown split '" + d.split + "'");
  if (d.data_root.empty()) throw ConfigError("--data is required");
  if (d.dataset == "hybridqa") {
    if (d.oracle) throw ConfigError("--oracle applies to multimodalqa only");
    return load_hybridqa(d.data_root, *split);
  }
  if (d.dataset == "multimodalqa") return load_multimodalqa(d.data_root, *split, d.oracle);
  throw ConfigError("unknown dataset '" + d.dataset + "'");
}

EngineConfig effective_config(const RunArgs& args) {
  EngineConfig cfg;
  if (!args.config.empty()) {
    json j = read_json(args.config);
    if (j.is_object() && j.contains("config") && j["config"].is_object()) j = j["config"];  // a run manifest
    cfg = config_from_json(j, cfg);
  }
  if (args.mode) {
    auto m = parse_cache_mode(*args.mode);
    if (!m) throw ConfigError("--mode must be live, replay or record");
    cfg.mode = *m;
  }
  if (args.shots) cfg.shots = *args.shots;
  if (args.no_check) cfg.enable_check = false;
  if (args.no_simplify) cfg.enable_simplification = false;
  if (args.no_refine) cfg.enable_refinement = false;
  cfg.validate();
  return cfg;
}

std::string one_line(std::string s, std::size_t limit) {
  for (char& c : s) {
    if (c == '\n' || c == '\r' || c == '\t') c = ' ';
  }
  if (s.size() > limit) s = s.substr(0, limit) + "...";
  return s;
}

std::string quoted_args(const std::vector<std::string>& args) {
  std::string out;
  for (std::size_t i = 0; i < args.size(); ++i) out += (i ? ", " : "") + json(args[i]).dump();
  return out;
}

}  // namespace

int cmd_run(const RunArgs& args, std::ostream& out, std::ostream& err, std::shared_ptr<HttpTransport> transport,
            std::size_t* network_calls) {
  try {
    const EngineConfig cfg = effective_config(args);
    ClientOptions client_opts = ClientOptions::from_environment(cfg.mode, args.cache);
    if (cfg.mode != CacheMode::replay && client_opts.api_key.empty() && !transport) {
      err << "error: HYPRO_API_KEY is not set; it is required in " << to_string(cfg.mode) << " mode\n";
      return kExitUsage;
    }
    if (cfg.mode != CacheMode::live && args.cache.empty()) throw ConfigError("--cache is required in this mode");

    const TemplateSet templates = args.templates.empty() ? TemplateSet::embedded() : TemplateSet::with_overrides(args.templates);
    templates.validate();

    Corpus corpus = load_corpus(args.data);
    const LinkIndex index = build_link_index(corpus);
    std::vector<QAInstance> instances = corpus.instances;
    if (args.limit && *args.limit < instances.size()) instances.resize(*args.limit);

    LlmClient client(client_opts, transport);
    const Engine engine{corpus, index, client, templates, cfg};

    std::size_t workers = args.workers.value_or(std::max(1u, std::thread::hardware_concurrency()));
    workers = std::clamp<std::size_t>(workers, 1, static_cast<std::size_t>(std::max(1, client_opts.max_in_flight)));

    fs::create_directories(args.out);
    const std::string started = utc_now();
    auto progress = [&](std::size_t done, std::size_t total, const PredictionRecord& r) {
      if (args.quiet) return;
      const std::string status = r.attempts.empty() ? "none" : r.attempts.back().status;
      err << "[" << done << "/" << total << "] " << r.question_id << " " << status << " attempts=" << r.attempts.size()
          << "\n";
    };
    auto records = run_batch(engine, instances, workers, progress);

    write_predictions(records, args.out / "predictions.jsonl", !args.no_timing);
    write_answers_tsv(records, args.out / "answers.tsv");
    const auto decls = load_declarations(templates, cfg.enable_check);
    json manifest = {{"config", to_json(cfg)},
                     {"dataset", args.data.dataset},
                     {"split", args.data.split},
                     {"oracle", args.data.oracle},
                     {"limit", args.limit ? json(*args.limit) : json(nullptr)},
                     {"instances", records.size()},
                     {"corpus_hash", corpus_hash(corpus)},
                     {"cache_file", args.cache.string()},
                     {"template_revision", templates.revision()},
                     {"declarations_digest", declarations_digest(decls)},
                     {"started_at", started},
                     {"finished_at", utc_now()}};
    write_file(args.out / "manifest.json", manifest.dump(2) + "\n");
    if (network_calls) *network_calls = client.network_calls();
    out << "wrote " << records.size() << " predictions to " << (args.out / "predictions.jsonl").string() << "\n";
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
  } catch (const MissingFile& e) {
    err << "error: " << e.what() << "\n";
  } catch (const SchemaMismatch& e) {
    err << "error: dataset schema mismatch: " << e.what() << "\n";
  } catch (const ImageDecodeError& e) {
    err << "error: " << e.what() << "\n";
  }
  return kExitUsage;
}

int cmd_eval(const EvalArgs& args, std::ostream& out, std::ostream& err) {
  try {
    std::vector<PredictionRecord> records;
    try {
      records = read_predictions(args.predictions);
    } catch (const SchemaMismatch& e) {
      err << "error: unparseable predictions: " << e.what() << "\n";
      return kExitUsage;
    }
    Corpus corpus = load_corpus(args.data);
    std::vector<QAInstance> instances = corpus.instances;
    if (args.limit && *args.limit < instances.size()) instances.resize(*args.limit);
    const EvalReport report = evaluate_run(records, instances);

    out << render_report_table(report);
    if (!report.missing_predictions.empty()) {
      out << "missing predictions: " << report.missing_predictions.size() << "\n";
    }
    if (!report.unknown_predictions.empty()) {
      out << "predictions for unknown question ids:\n";
      for (const auto& id : report.unknown_predictions) out << "  " << id << "\n";
    }
    const fs::path dir = args.out.empty() ? args.predictions.parent_path() : args.out;
    if (!dir.empty()) fs::create_directories(dir);
    write_file(dir / "report.json", to_json(report).dump(2) + "\n");
    write_file(dir / "report.txt", render_report_table(report));
    write_file(dir / "error_histogram.csv", render_error_histogram_csv(report));
    return kExitOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

int cmd_trace(const TraceArgs& args, std::ostream& out, std::ostream& err) {
  std::vector<PredictionRecord> records;
  try {
    records = read_predictions(args.predictions);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  auto it = std::find_if(records.begin(), records.end(),
                         [&](const PredictionRecord& r) { return r.question_id == args.question_id; });
  if (it == records.end()) {
    err << "error: no record for question id " << args.question_id << "\n";
    return kExitUsage;
  }
  const PredictionRecord& r = *it;
  out << "Question:   " << r.question << "\n";
  out << "Simplified: " << r.simplified_question << "\n";
  for (std::size_t i = 0; i < r.attempts.size(); ++i) {
    const Attempt& a = r.attempts[i];
    out << "\n== Attempt " << (i + 1) << " [" << a.status << "]\n";
    if (!a.source.empty()) out << "-- program\n" << a.source << "\n";
    if (a.status == "error" || a.status == "parse_error") {
      out << "-- traceback\n" << a.feedback << "\n";
    } else if (a.status == "empty") {
      out << "-- note\n" << a.feedback << "\n";
    } else if (a.status == "generation_error") {
      out << "-- generation failed\n" << a.message << "\n";
    } else {
      out << "-- result\n" << quoted_args(a.answer) << "\n";
    }
  }
  out << "\n== Exchanges\n";
  for (std::size_t i = 0; i < r.exchanges.size(); ++i) {
    const Exchange& e = r.exchanges[i];
    out << "  " << (i + 1) << ". " << e.purpose << " key=" << e.key.substr(0, 12) << " ";
    out << (e.error.empty() ? "reply: " + one_line(e.response, 72) : "failed: " + one_line(e.error, 72)) << "\n";
  }
  if (!r.host_calls.empty()) {
    out << "\n== Host calls\n";
    for (const auto& c : r.host_calls) {
      out << "  [attempt " << (c.attempt + 1) << "] " << c.function << "(" << quoted_args(c.args) << ") -> " << c.outcome;
      if (!c.result.empty() && c.outcome == "text") out << " " << json(c.result).dump();
      if (c.fast_path) out << " (fast path)";
      if (!c.error.empty()) out << " " << one_line(c.error, 72);
      out << "\n";
    }
  }
  std::string joined;
  for (std::size_t i = 0; i < r.answer.size(); ++i) joined += (i ? ", " : "") + r.answer[i];
  out << "\nFinal answer: " << (r.answer.empty() ? "(none)" : joined) << "\n";
  const std::string cls = r.attempts.empty() || r.attempts.back().error_class.empty() ? "none" : r.attempts.back().error_class;
  out << "Error class:  " << cls << "\n";
  return kExitOk;
}

int cmd_cache_verify(const fs::path& cache, std::ostream& out, std::ostream& err) {
  try {
    const CacheVerifyReport report = verify_cache_file(cache);
    out << "lines: " << report.lines << "\nentries: " << report.entries << "\nsuperseded: " << report.superseded << "\n";
    for (const auto& p : report.problems) out << "problem: " << p << "\n";
    out << (report.ok() ? "ok" : "FAILED") << "\n";
    return report.ok() ? kExitOk : kExitProblems;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Program-driven question answering over tables, passages and images"};
  app.require_subcommand(1);

  auto add_dataset = [](CLI::App* sub, DatasetArgs& d) {
    sub->add_option("--dataset", d.dataset, "hybridqa or multimodalqa")
        ->check(CLI::IsMember({"hybridqa", "multimodalqa"}));
    sub->add_option("--split", d.split, "train, dev or test");
    sub->add_option("--data", d.data_root, "dataset release root")->required();
    sub->add_flag("--oracle", d.oracle, "give gold documents; skips query simplification (multimodalqa)");
  };

  RunArgs run;
  std::string mode;
  std::size_t limit = 0, workers = 0;
  int shots = 0;
  auto* run_cmd = app.add_subcommand("run", "answer questions and write predictions");
  add_dataset(run_cmd, run.data);
  auto* mode_opt = run_cmd->add_option("--mode", mode, "live, replay or record")
                       ->check(CLI::IsMember({"live", "replay", "record"}));
  run_cmd->add_option("--cache", run.cache, "transcript cache file (JSONL)");
  auto* limit_opt = run_cmd->add_option("--limit", limit, "answer only the first N questions");
  auto* shots_opt = run_cmd->add_option("--shots", shots, "number of few-shot exemplars");
  run_cmd->add_flag("--no-check", run.no_check, "disable the check function");
  run_cmd->add_flag("--no-simplify", run.no_simplify, "disable query simplification");
  run_cmd->add_flag("--no-refine", run.no_refine, "disable program refinement");
  auto* workers_opt = run_cmd->add_option("--workers", workers, "parallel questions");
  run_cmd->add_option("--config", run.config, "JSON engine config or a previous run manifest");
  run_cmd->add_option("--templates", run.templates, "directory overriding shipped prompt files");
  run_cmd->add_option("--out", run.out, "output directory");
  run_cmd->add_flag("--quiet", run.quiet, "no progress lines");
  run_cmd->add_flag("--no-timing", run.no_timing, "omit wall_ms from predictions");

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "score predictions");
  add_dataset(eval_cmd, eval.data);
  eval_cmd->add_option("--predictions", eval.predictions, "predictions.jsonl")->required();
  eval_cmd->add_option("--out", eval.out, "report directory");
  std::size_t eval_limit = 0;
  auto* eval_limit_opt = eval_cmd->add_option("--limit", eval_limit, "score only the first N questions");

  TraceArgs trace;
  auto* trace_cmd = app.add_subcommand("trace", "show one question's attempts and exchanges");
  trace_cmd->add_option("--predictions", trace.predictions, "predictions.jsonl")->required();
  trace_cmd->add_option("--id", trace.question_id, "question id")->required();

  fs::path cache_file;
  auto* cache_cmd = app.add_subcommand("cache", "transcript cache tools");
  cache_cmd->require_subcommand(1);
  auto* verify_cmd = cache_cmd->add_subcommand("verify", "check a cache file");
  verify_cmd->add_option("--cache", cache_file, "cache file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  if (*run_cmd) {
    if (mode_opt->count()) run.mode = mode;
    if (limit_opt->count()) run.limit = limit;
    if (shots_opt->count()) run.shots = shots;
    if (workers_opt->count()) run.workers = workers;
    return cmd_run(run, out, err);
  }
  if (*eval_cmd) {
    if (eval_limit_opt->count()) eval.limit = eval_limit;
    return cmd_eval(eval, out, err);
  }
  if (*trace_cmd) return cmd_trace(trace, out, err);
  if (*verify_cmd) return cmd_cache_verify(cache_file, out, err);
  return kExitUsage;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"hypro"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace hypro::cli
