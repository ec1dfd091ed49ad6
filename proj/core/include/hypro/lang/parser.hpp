#pragma once

#include <string>
#include <string_view>
#include <variant>

#include "hypro/lang/ast.hpp"

namespace hypro::lang {

struct ParseError {
  int line = 1;
  int column = 1;
  std::string message;
  std::string excerpt;  // the offending source line
};

using ParseResult = std::variant<Ast, ParseError>;

/// Parses the restricted program language. Never throws on malformed input:
/// every rejection comes back as a ParseError naming the offending construct.
ParseResult parse(std::string_view source);

inline bool ok(const ParseResult& r) { return std::holds_alternative<Ast>(r); }

}  // namespace hypro::lang
