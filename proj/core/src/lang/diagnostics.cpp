#include "hypro/lang/diagnostics.hpp"

#include <array>
#include <sstream>
#include <utility>

namespace hypro::lang {

namespace {

constexpr std::array<std::pair<ErrorClass, const char*>, 7> kNames{{
    {ErrorClass::name_error, "NameError"},
    {ErrorClass::type_error, "TypeError"},
    {ErrorClass::index_error, "IndexError"},
    {ErrorClass::key_error, "KeyError"},
    {ErrorClass::division_by_zero, "DivisionByZero"},
    {ErrorClass::step_limit_exceeded, "StepLimitExceeded"},
    {ErrorClass::host_function_error, "HostFunctionError"},
}};

std::string source_line(std::string_view src, int line) {
  int current = 1;
  std::size_t start = 0;
  while (current < line) {
    std::size_t nl = src.find('\n', start);
    if (nl == std::string_view::npos) return "";
    start = nl + 1;
    ++current;
  }
  std::size_t end = src.find('\n', start);
  std::string text(src.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start));
  if (!text.empty() && text.back() == '\r') text.pop_back();
  return text;
}

void write_location(std::ostream& os, int line, int column, const std::string& text) {
  os << "  File \"<program>\", line " << line << "\n";
  if (text.empty()) return;
  // Leading indentation is dropped, so the caret shifts with it.
  std::size_t lead = text.find_first_not_of(" \t");
  if (lead == std::string::npos) lead = text.size();
  os << "    " << text.substr(lead) << "\n";
  if (column > 0 && static_cast<std::size_t>(column - 1) >= lead) {
    os << "    " << std::string(static_cast<std::size_t>(column - 1) - lead, ' ') << "^\n";
  }
}

}  // namespace

const char* class_name(ErrorClass c) {
  for (const auto& [cls, name] : kNames) {
    if (cls == c) return name;
  }
  return "Error";
}

std::optional<ErrorClass> parse_class_name(std::string_view s) {
  for (const auto& [cls, name] : kNames) {
    if (s == name) return cls;
  }
  return std::nullopt;
}

std::string format_traceback(const RuntimeError& err, std::string_view source) {
  std::ostringstream os;
  os << "Traceback (most recent call last):\n";
  write_location(os, err.line, err.column, source_line(source, err.line));
  os << class_name(err.cls) << ": ";
  if (err.cls == ErrorClass::host_function_error && !err.function.empty()) os << "in " << err.function << ": ";
  os << err.message << "\n";
  return os.str();
}

std::string format_parse_error(const ParseError& err) {
  std::ostringstream os;
  write_location(os, err.line, err.column, err.excerpt);
  os << "SyntaxError: " << err.message << "\n";
  return os.str();
}

}  // namespace hypro::lang
