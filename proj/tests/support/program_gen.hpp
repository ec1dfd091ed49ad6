#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

namespace hypro::test {

/// Reference values, independent of the interpreter's Value.
struct RVal;
using RList = std::shared_ptr<std::vector<RVal>>;
struct RNone {
  friend bool operator==(RNone, RNone) { return true; }
};
struct RVal {
  std::variant<RNone, std::string, std::int64_t, double, bool, RList> v;
};

/// Outcome of the reference evaluator: a value, or an error class name and line.
struct RefOutcome {
  std::optional<RVal> value;
  std::string error_class;  // "NameError", "TypeError", "IndexError", "DivisionByZero"
  int line = 0;
  bool inconclusive = false;  // exceeded the evaluation budget; not comparable
};

/// Resource limits the reference mirrors; they match interp::Limits defaults.
inline constexpr std::size_t kRefMaxSeqLen = 10'000;
inline constexpr std::size_t kRefMaxTextLen = 1'000'000;
inline constexpr std::size_t kRefMaxNesting = 64;
inline constexpr std::size_t kRefEvalBudget = 200'000;

struct GenExpr;
using GenExprPtr = std::shared_ptr<const GenExpr>;
struct GenStmt;

/// A random host-call-free program: source text plus the ability to
/// evaluate itself by the language rules.
class GeneratedProgram {
 public:
  std::string source() const;
  RefOutcome evaluate() const;

  std::vector<GenStmt> statements;
};

struct GenExpr {
  enum Kind { int_lit, real_lit, text_lit, bool_lit, none_lit, var, binary, unary_not, unary_neg, index, list_lit, call };
  Kind kind = none_lit;
  std::int64_t i = 0;
  double d = 0;
  std::string s;  // text literal, variable name, operator or callee
  bool b = false;
  std::vector<GenExprPtr> kids;
};

struct GenStmt {
  enum Kind { assign, for_loop, if_chain, ret, expr };
  Kind kind = expr;
  int line = 0;
  std::string name;
  GenExprPtr value;                          // assign / ret / expr / for iterable
  std::vector<GenExprPtr> conds;             // if arms
  std::vector<std::vector<GenStmt>> bodies;  // for body, or if arms then optional else
  bool has_else = false;
};

GeneratedProgram generate_program(std::mt19937_64& rng);

bool same_value(const RVal& a, const RVal& b);
std::string describe(const RVal& v);

}  // namespace hypro::test
