#include "hypro/hostfns.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include "hypro/errors.hpp"
#include "hypro/hash.hpp"
#include "hypro/text.hpp"

namespace hypro {

using interp::HostError;
using interp::Value;
using nlohmann::json;

std::vector<FunctionDeclaration> load_declarations(const TemplateSet& templates, bool enable_check) {
  json j;
  try {
    j = json::parse(templates.raw("declarations.json"));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("declarations.json: ") + e.what());
  }
  std::vector<FunctionDeclaration> out;
  try {
    for (const auto& d : j) {
      FunctionDeclaration decl;
      decl.name = d.at("name").get<std::string>();
      decl.role = d.at("role").get<std::string>();
      for (const auto& p : d.at("parameters")) {
        decl.parameters.push_back({p.at("name").get<std::string>(), p.at("description").get<std::string>()});
      }
      if (!enable_check && decl.name == "check") continue;
      out.push_back(std::move(decl));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("declarations.json: ") + e.what());
  }
  return out;
}

std::string render_declarations(const std::vector<FunctionDeclaration>& decls) {
  std::ostringstream os;
  for (std::size_t i = 0; i < decls.size(); ++i) {
    const auto& d = decls[i];
    if (i) os << "\n\n";
    os << d.name << "(";
    for (std::size_t p = 0; p < d.parameters.size(); ++p) os << (p ? ", " : "") << d.parameters[p].name;
    os << ")\n";
    for (const auto& p : d.parameters) os << "  " << p.name << ": " << p.description << "\n";
    os << "  " << d.role;
  }
  return os.str();
}

std::string declarations_digest(const std::vector<FunctionDeclaration>& decls) {
  return sha256_hex(render_declarations(decls));
}

std::optional<double> parse_numeric(std::string_view text) {
  std::string s = trim(text);
  bool negative = false;
  auto strip_sign = [&] {
    if (!s.empty() && (s[0] == '-' || s[0] == '+')) {
      negative = s[0] == '-';
      s.erase(0, 1);
    }
  };
  strip_sign();
  for (std::string_view sym : {"$", "€", "£", "¥", "US$"}) {
    if (s.rfind(sym, 0) == 0) {
      s.erase(0, sym.size());
      break;
    }
  }
  if (!negative) strip_sign();
  if (s.empty()) return std::nullopt;

  // Separators must split the integer part into groups of three.
  std::string digits;
  std::size_t dot = s.find('.');
  std::string_view int_part = std::string_view(s).substr(0, dot);
  if (int_part.find(',') != std::string_view::npos) {
    std::size_t group = 0;
    bool first = true;
    for (std::size_t i = 0; i < int_part.size(); ++i) {
      char c = int_part[i];
      if (c == ',') {
        if ((first && (group == 0 || group > 3)) || (!first && group != 3)) return std::nullopt;
        first = false;
        group = 0;
      } else {
        ++group;
      }
    }
    if (group != 3) return std::nullopt;
  }
  for (char c : s) {
    if (c != ',') digits.push_back(c);
  }
  for (char c : digits) {
    if (!(c >= '0' && c <= '9') && c != '.') return std::nullopt;
  }
  if (digits.empty() || digits == ".") return std::nullopt;
  double v = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v, std::chars_format::fixed);
  if (ec != std::errc() || ptr != digits.data() + digits.size()) return std::nullopt;
  return negative ? -v : v;
}

namespace {

std::string reply_token(std::string_view reply) {
  std::string s = casefold(trim(reply));
  if (!s.empty() && s.back() == '.') s.pop_back();
  return trim(s);
}

std::string arg_text(const Value& v) {
  if (v.is_text()) return v.text();
  return interp::to_display(v);
}

void require_text_args(const std::string& fn, std::span<const Value> args) {
  for (const auto& a : args) {
    if (a.is_none() || a.is_seq() || a.is_rowmap()) {
      throw HostError(fn + " expects text arguments, got " + interp::type_name(a));
    }
  }
}

}  // namespace

bool is_sentinel_reply(std::string_view reply) { return reply_token(reply) == "none"; }

std::optional<bool> parse_verdict(std::string_view reply) {
  std::string t = reply_token(reply);
  if (t == "true") return true;
  if (t == "false") return false;
  return std::nullopt;
}

std::optional<std::string> extract_info(HostContext& ctx, const std::string& cell, const std::string& target) {
  HostCallTrace trace;
  trace.function = "extract_info";
  trace.args = {cell, target};
  trace.attempt = ctx.sink.attempt;

  std::vector<DocRef> refs = ctx.index.resolve(cell, ctx.table_id);
  if (refs.empty()) refs = ctx.fallback_documents;
  if (refs.empty()) {
    trace.outcome = "error";
    trace.error = "LinkMiss: no document is linked to cell '" + cell + "'";
    ctx.sink.host_calls.push_back(trace);
    throw HostError(trace.error);
  }
  std::stable_partition(refs.begin(), refs.end(), [](const DocRef& r) { return r.kind == DocKind::passage; });
  trace.documents = refs;

  auto finish = [&](std::optional<std::string> result) {
    trace.outcome = result ? "text" : "none";
    trace.result = result.value_or("");
    ctx.sink.host_calls.push_back(trace);
    return result;
  };

  for (const auto& ref : refs) {
    const Document* doc = ctx.corpus.find_document(ref.doc_id);
    if (!doc) continue;
    ChatRequest req;
    req.max_output_tokens = ctx.max_output_tokens;
    std::string purpose;
    if (doc->kind == DocKind::passage) {
      purpose = "extract_text";
      req.model_tag = ctx.text_model;
      req.messages.push_back(
          {"user",
           ctx.templates.render("extract_text.txt",
                                {{"cell", cell}, {"target", target}, {"title", doc->title}, {"passage", doc->text}}),
           {}});
    } else {
      purpose = "extract_image";
      req.model_tag = ctx.vision_model;
      ChatMessage m{"user",
                    ctx.templates.render("extract_image.txt", {{"cell", cell}, {"target", target}, {"title", doc->title}}),
                    {}};
      try {
        m.images.push_back({read_image_payload(*doc), doc->media_type});
      } catch (const std::exception& e) {
        trace.outcome = "error";
        trace.error = e.what();
        ctx.sink.host_calls.push_back(trace);
        throw HostError(e.what());
      }
      req.messages.push_back(std::move(m));
    }
    std::string reply;
    try {
      trace.exchanges.push_back(ctx.sink.exchanges.size());
      reply = traced_chat(ctx.client, ctx.sink, purpose, req);
    } catch (const std::exception& e) {
      trace.outcome = "error";
      trace.error = e.what();
      ctx.sink.host_calls.push_back(trace);
      throw HostError(e.what());
    }
    if (!is_sentinel_reply(reply) && !trim(reply).empty()) return finish(trim(reply));
  }
  return finish(std::nullopt);
}

bool check(HostContext& ctx, const std::string& obj1, const std::string& obj2, const std::string& op) {
  if (op != ">" && op != "<" && op != "==") {
    throw HostError("check: op must be one of \">\", \"<\", \"==\", got \"" + op + "\"");
  }
  HostCallTrace trace;
  trace.function = "check";
  trace.args = {obj1, obj2, op};
  trace.attempt = ctx.sink.attempt;
  auto finish = [&](bool verdict) {
    trace.outcome = verdict ? "true" : "false";
    trace.result = trace.outcome;
    ctx.sink.host_calls.push_back(trace);
    return verdict;
  };

  auto a = parse_numeric(obj1);
  auto b = parse_numeric(obj2);
  if (a && b) {
    trace.fast_path = true;
    return finish(op == ">" ? *a > *b : op == "<" ? *a < *b : *a == *b);
  }
  if (op == "==" && canonicalize_cell_key(obj1) == canonicalize_cell_key(obj2)) {
    trace.fast_path = true;
    return finish(true);
  }

  const std::map<std::string, std::string> vars = {{"obj1", obj1}, {"obj2", obj2}, {"op", op}};
  ChatRequest req;
  req.model_tag = ctx.text_model;
  req.max_output_tokens = ctx.max_output_tokens;
  req.messages.push_back({"user", ctx.templates.render("check.txt", vars), {}});
  try {
    trace.exchanges.push_back(ctx.sink.exchanges.size());
    std::string reply = traced_chat(ctx.client, ctx.sink, "check", req);
    if (auto v = parse_verdict(reply)) return finish(*v);
    req.messages.push_back({"assistant", reply, {}});
    req.messages.push_back({"user", ctx.templates.render("check_reask.txt", vars), {}});
    trace.exchanges.push_back(ctx.sink.exchanges.size());
    reply = traced_chat(ctx.client, ctx.sink, "check_reask", req);
    if (auto v = parse_verdict(reply)) return finish(*v);
    trace.error = "UnparseableVerdict: reply was '" + trim(reply) + "'";
  } catch (const std::exception& e) {
    trace.error = e.what();
  }
  trace.outcome = "error";
  ctx.sink.host_calls.push_back(trace);
  throw HostError(trace.error);
}

void bind_host_functions(interp::Env& env, HostContext& ctx, bool enable_check) {
  env.bind_host_function("extract_info", 2, [&ctx](std::span<const Value> args) -> Value {
    require_text_args("extract_info", args);
    auto r = extract_info(ctx, arg_text(args[0]), arg_text(args[1]));
    return r ? Value(*r) : Value(interp::None{});
  });
  if (enable_check) {
    env.bind_host_function("check", 3, [&ctx](std::span<const Value> args) -> Value {
      require_text_args("check", args);
      return Value(check(ctx, arg_text(args[0]), arg_text(args[1]), arg_text(args[2])));
    });
  }
}

}  // namespace hypro
