#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace hypro {

namespace detail {
struct EmbeddedFile {
  const char* name;
  const char* content;
};
const std::vector<EmbeddedFile>& embedded_files();
}  // namespace detail

/// Prompt templates, few-shot exemplar files and the language grammar.
///
/// Templates use `{name}` placeholders; `{{` and `}}` produce literal braces.
/// Every template has a fixed set of placeholders it may use, checked by
/// `validate()` at startup, and every placeholder must be supplied at render
/// time. Both failures raise ConfigError.
class TemplateSet {
 public:
  static TemplateSet embedded();
  /// Files in `dir` replace the embedded file of the same name.
  static TemplateSet with_overrides(const std::filesystem::path& dir);

  bool contains(const std::string& name) const { return files_.count(name) != 0; }
  const std::string& raw(const std::string& name) const;
  std::string render(const std::string& name, const std::map<std::string, std::string>& vars) const;

  void validate() const;

  /// SHA-256 over every file name and content, in name order.
  std::string revision() const;

  static std::set<std::string> placeholders(std::string_view text);

 private:
  std::map<std::string, std::string> files_;
};

}  // namespace hypro
