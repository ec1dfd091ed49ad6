#include <doctest.h>

#include "hypro/lang/diagnostics.hpp"
#include "hypro/lang/parser.hpp"
#include "support/criteria.hpp"

using namespace hypro::lang;

namespace {

ParseError reject(const std::string& src) {
  auto r = parse(src);
  REQUIRE_MESSAGE(!ok(r), src);
  return std::get<ParseError>(r);
}

}  // namespace

TEST_CASE("all fixtures parse and reach a print fixpoint") {
  const auto programs = hypro::test::fixture_programs();
  CHECK(programs.size() == 50);
  auto r = hypro::test::check_parser_totality(20'000, 99);
  CHECK_MESSAGE(r.status == hypro::test::CriterionResult::pass, r.detail);
}

TEST_CASE("statement structure and positions") {
  auto r = parse("x = 1\nfor row in rows:\n    if x > 0:\n        answer = row\n    else:\n        x = 2\nreturn x\n");
  REQUIRE(ok(r));
  const Ast& ast = std::get<Ast>(r);
  REQUIRE(ast.statements.size() == 3);
  CHECK(std::holds_alternative<Assign>(ast.statements[0].node));
  const auto& loop = std::get<For>(ast.statements[1].node);
  CHECK(loop.var == "row");
  CHECK(ast.statements[1].line == 2);
  const auto& branch = std::get<If>(loop.body[0].node);
  CHECK(branch.arms.size() == 1);
  CHECK(branch.else_body.size() == 1);
  CHECK(ast.statements[2].line == 7);
}

TEST_CASE("precedence follows the grammar") {
  auto r = parse("answer = not 1 + 2 * 3 < 4 and 5 or 6\n");
  REQUIRE(ok(r));
  CHECK(print(std::get<Ast>(r)) == "answer = (((not ((1 + (2 * 3)) < 4)) and 5) or 6)\n");
  auto neg = parse("answer = -2 * 3\n");
  REQUIRE(ok(neg));
  CHECK(print(std::get<Ast>(neg)) == "answer = ((-2) * 3)\n");
}

TEST_CASE("forbidden constructs are rejected with a location") {
  CHECK(reject("import re\n").message == "import is not permitted");
  CHECK(reject("x = 1\ndef f():\n    return 1\n").line == 2);
  CHECK(reject("x += 1\n").message.find("augmented assignment") != std::string::npos);
  CHECK(reject("x = [1, 2][0:1]\n").message == "slices are not permitted");
  CHECK(reject("x = 1 < 2 < 3\n").message == "chained comparisons are not permitted");
  CHECK(reject("x = lower(\"A\", key=1)\n").message == "keyword arguments are not permitted");
  CHECK(reject("x = \"a\".lower()\n").message.find("method calls") != std::string::npos);
  CHECK(reject("x = {}\n").message == "dict and set literals are not permitted");
  CHECK(reject("x = 1 if y else 2\n").message == "conditional expressions are not permitted");
  CHECK(reject("x = [a for a in rows]\n").message == "comprehensions are not permitted");
  CHECK(reject("x = 1 in rows\n").message == "the 'in' operator is not permitted");
  CHECK(reject("while True:\n    x = 1\n").message == "while is not permitted");
  CHECK(reject("x = \"open\n").message == "unterminated string literal");
  CHECK(reject("if x:\n    y = 1\n\tz = 2\n").message.find("tabs and spaces") != std::string::npos);
  CHECK(reject("if x:\ny = 1\n").message == "expected an indented block");
}

TEST_CASE("deep nesting is an error, not a crash") {
  std::string deep = "answer = " + std::string(5000, '(') + "1" + std::string(5000, ')') + "\n";
  CHECK(reject(deep).message == "expression nesting too deep");
}

TEST_CASE("parse errors format like a traceback") {
  const ParseError e = reject("x = 1\nimport re\n");
  CHECK(format_parse_error(e) == "  File \"<program>\", line 2\n    import re\n    ^\nSyntaxError: import is not permitted\n");
}

TEST_CASE("runtime tracebacks quote the failing line") {
  RuntimeError err{ErrorClass::key_error, 2, 17, "'Year'", ""};
  CHECK(format_traceback(err, "for row in rows:\n    answer = row[\"Year\"]\n") ==
        "Traceback (most recent call last):\n  File \"<program>\", line 2\n    answer = row[\"Year\"]\n"
        "                ^\nKeyError: 'Year'\n");
  CHECK(parse_class_name("DivisionByZero") == ErrorClass::division_by_zero);
}
