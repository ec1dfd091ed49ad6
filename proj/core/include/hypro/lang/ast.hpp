#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace hypro::lang {

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct NoneLit {
  friend bool operator==(NoneLit, NoneLit) { return true; }
};

struct Literal {
  std::variant<NoneLit, std::string, std::int64_t, double, bool> value;
};

struct Name {
  std::string id;
};

enum class BinOp { add, sub, mul, div, eq, ne, lt, gt, le, ge, logical_and, logical_or };
enum class UnOp { logical_not, neg };

const char* spelling(BinOp op);

struct Binary {
  BinOp op;
  ExprPtr lhs;
  ExprPtr rhs;
};

struct Unary {
  UnOp op;
  ExprPtr operand;
};

struct Index {
  ExprPtr object;
  ExprPtr key;
};

struct Attr {
  ExprPtr object;
  std::string field;
};

struct Call {
  std::string callee;
  std::vector<ExprPtr> args;
};

struct SeqLit {
  std::vector<ExprPtr> elems;
};

struct Expr {
  std::variant<Literal, Name, Binary, Unary, Index, Attr, Call, SeqLit> node;
  int line = 1;
  int column = 1;
};

struct Stmt;
using Block = std::vector<Stmt>;

struct Assign {
  std::string name;
  ExprPtr value;
};

struct For {
  std::string var;
  ExprPtr iterable;
  Block body;
};

struct IfArm {
  ExprPtr cond;
  Block body;
};

struct If {
  std::vector<IfArm> arms;
  Block else_body;
};

struct Return {
  ExprPtr value;
};

struct ExprStmt {
  ExprPtr expr;
};

struct Stmt {
  std::variant<Assign, For, If, Return, ExprStmt> node;
  int line = 1;
};

struct Ast {
  Block statements;
};

/// Canonical source form. Every binary and unary expression is fully
/// parenthesized so the output reparses to the same tree.
std::string print(const Ast& ast);
std::string print(const Expr& expr);

/// Tree equality ignoring source positions.
bool same_structure(const Ast& a, const Ast& b);
bool same_structure(const Expr& a, const Expr& b);

}  // namespace hypro::lang
