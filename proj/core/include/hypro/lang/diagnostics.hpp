#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "hypro/lang/parser.hpp"

namespace hypro::lang {

enum class ErrorClass {
  name_error,
  type_error,
  index_error,
  key_error,
  division_by_zero,
  step_limit_exceeded,
  host_function_error,
};

/// Class names as they appear in tracebacks ("NameError", "DivisionByZero", ...).
const char* class_name(ErrorClass c);
std::optional<ErrorClass> parse_class_name(std::string_view s);

struct RuntimeError {
  ErrorClass cls = ErrorClass::type_error;
  int line = 1;
  int column = 0;  // 0 when unknown
  std::string message;
  std::string function;  // host function name for host_function_error

  friend bool operator==(const RuntimeError&, const RuntimeError&) = default;
};

/// Stable multi-line traceback text. It is fed back to the model verbatim,
/// so the layout must not drift.
std::string format_traceback(const RuntimeError& err, std::string_view source);

/// Same layout for a program that failed to parse.
std::string format_parse_error(const ParseError& err);

}  // namespace hypro::lang
