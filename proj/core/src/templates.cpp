#include "hypro/templates.hpp"

#include <fstream>
#include <iterator>

#include "hypro/errors.hpp"
#include "hypro/hash.hpp"

namespace hypro {

namespace {

// Placeholders each prompt template may reference.
const std::map<std::string, std::set<std::string>>& template_contracts() {
  static const std::map<std::string, std::set<std::string>> contracts = {
      {"codegen_system.txt", {"grammar", "declarations"}},
      {"codegen_user.txt", {"table", "question", "evidence"}},
      {"refine_user.txt", {"feedback"}},
      {"extract_text.txt", {"cell", "target", "title", "passage"}},
      {"extract_image.txt", {"cell", "target", "title"}},
      {"check.txt", {"obj1", "obj2", "op"}},
      {"check_reask.txt", {"obj1", "obj2", "op"}},
      {"simplify.txt", {"snippets", "table", "question"}},
  };
  return contracts;
}

bool is_placeholder_char(char c) { return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_'; }

// Calls `on_text` for literal runs and `on_name` for each placeholder.
template <typename Text, typename NameFn>
void scan(std::string_view s, Text&& on_text, NameFn&& on_name) {
  std::size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if ((c == '{' || c == '}') && i + 1 < s.size() && s[i + 1] == c) {
      on_text(std::string_view(&s[i], 1));
      i += 2;
      continue;
    }
    if (c == '{') {
      std::size_t j = i + 1;
      while (j < s.size() && is_placeholder_char(s[j])) ++j;
      if (j > i + 1 && j < s.size() && s[j] == '}') {
        on_name(std::string(s.substr(i + 1, j - i - 1)));
        i = j + 1;
        continue;
      }
    }
    on_text(std::string_view(&s[i], 1));
    ++i;
  }
}

}  // namespace

TemplateSet TemplateSet::embedded() {
  TemplateSet set;
  for (const auto& f : detail::embedded_files()) set.files_[f.name] = f.content;
  return set;
}

TemplateSet TemplateSet::with_overrides(const std::filesystem::path& dir) {
  TemplateSet set = embedded();
  if (!std::filesystem::is_directory(dir)) throw ConfigError("template directory not found: " + dir.string());
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::ifstream in(entry.path(), std::ios::binary);
    set.files_[entry.path().filename().string()] =
        std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  return set;
}

const std::string& TemplateSet::raw(const std::string& name) const {
  auto it = files_.find(name);
  if (it == files_.end()) throw ConfigError("template not found: " + name);
  return it->second;
}

std::set<std::string> TemplateSet::placeholders(std::string_view text) {
  std::set<std::string> names;
  scan(text, [](std::string_view) {}, [&](std::string n) { names.insert(std::move(n)); });
  return names;
}

std::string TemplateSet::render(const std::string& name, const std::map<std::string, std::string>& vars) const {
  const std::string& text = raw(name);
  std::string out;
  out.reserve(text.size() + 256);
  scan(
      text, [&](std::string_view t) { out.append(t); },
      [&](const std::string& key) {
        auto it = vars.find(key);
        if (it == vars.end()) throw ConfigError("template " + name + ": unresolved placeholder {" + key + "}");
        out += it->second;
      });
  return out;
}

void TemplateSet::validate() const {
  for (const auto& [name, allowed] : template_contracts()) {
    for (const auto& p : placeholders(raw(name))) {
      if (!allowed.count(p)) throw ConfigError("template " + name + ": unknown placeholder {" + p + "}");
    }
  }
  for (const char* required : {"grammar.ebnf", "declarations.json", "shots_hybridqa.json", "shots_multimodalqa.json"}) {
    raw(required);
  }
}

std::string TemplateSet::revision() const {
  std::string all;
  for (const auto& [name, content] : files_) {
    all += name;
    all += '\0';
    all += content;
    all += '\0';
  }
  return sha256_hex(all);
}

}  // namespace hypro
