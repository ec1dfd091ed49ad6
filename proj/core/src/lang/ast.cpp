#include "hypro/lang/ast.hpp"

#include <charconv>
#include <sstream>

namespace hypro::lang {

const char* spelling(BinOp op) {
  switch (op) {
    case BinOp::add:
      return "+";
    case BinOp::sub:
      return "-";
    case BinOp::mul:
      return "*";
    case BinOp::div:
      return "/";
    case BinOp::eq:
      return "==";
    case BinOp::ne:
      return "!=";
    case BinOp::lt:
      return "<";
    case BinOp::gt:
      return ">";
    case BinOp::le:
      return "<=";
    case BinOp::ge:
      return ">=";
    case BinOp::logical_and:
      return "and";
    case BinOp::logical_or:
      return "or";
  }
  return "?";
}

namespace {

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '\n':
        out += "\\n";
        break;
      case '\t':
        out += "\\t";
        break;
      case '"':
        out += "\\\"";
        break;
      case '\\':
        out += "\\\\";
        break;
      default:
        out += c;
    }
  }
  out += '"';
  return out;
}

std::string real_literal(double d) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), d);
  std::string s(buf, end);
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

void print_expr(std::ostream& os, const Expr& e);

struct ExprPrinter {
  std::ostream& os;

  void operator()(const Literal& lit) const {
    std::visit(
        [this](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, NoneLit>) {
            os << "None";
          } else if constexpr (std::is_same_v<T, std::string>) {
            os << quote(v);
          } else if constexpr (std::is_same_v<T, bool>) {
            os << (v ? "True" : "False");
          } else if constexpr (std::is_same_v<T, double>) {
            os << real_literal(v);
          } else {
            os << v;
          }
        },
        lit.value);
  }
  void operator()(const Name& n) const { os << n.id; }
  void operator()(const Binary& b) const {
    os << '(';
    print_expr(os, *b.lhs);
    os << ' ' << spelling(b.op) << ' ';
    print_expr(os, *b.rhs);
    os << ')';
  }
  void operator()(const Unary& u) const {
    os << (u.op == UnOp::neg ? "(-" : "(not ");
    print_expr(os, *u.operand);
    os << ')';
  }
  void postfix_object(const Expr& obj) const {
    // "5.x" would lex as a real literal followed by a name
    if (const auto* lit = std::get_if<Literal>(&obj.node);
        lit && (std::holds_alternative<std::int64_t>(lit->value) || std::holds_alternative<double>(lit->value))) {
      os << '(';
      print_expr(os, obj);
      os << ')';
    } else {
      print_expr(os, obj);
    }
  }
  void operator()(const Index& ix) const {
    postfix_object(*ix.object);
    os << '[';
    print_expr(os, *ix.key);
    os << ']';
  }
  void operator()(const Attr& a) const {
    postfix_object(*a.object);
    os << '.' << a.field;
  }
  void operator()(const Call& c) const {
    os << c.callee << '(';
    for (std::size_t i = 0; i < c.args.size(); ++i) {
      if (i) os << ", ";
      print_expr(os, *c.args[i]);
    }
    os << ')';
  }
  void operator()(const SeqLit& s) const {
    os << '[';
    for (std::size_t i = 0; i < s.elems.size(); ++i) {
      if (i) os << ", ";
      print_expr(os, *s.elems[i]);
    }
    os << ']';
  }
};

void print_expr(std::ostream& os, const Expr& e) { std::visit(ExprPrinter{os}, e.node); }

void print_block(std::ostream& os, const Block& block, int depth);

void indent(std::ostream& os, int depth) {
  for (int i = 0; i < depth; ++i) os << "    ";
}

void print_stmt(std::ostream& os, const Stmt& s, int depth) {
  indent(os, depth);
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Assign>) {
          os << n.name << " = ";
          print_expr(os, *n.value);
          os << '\n';
        } else if constexpr (std::is_same_v<T, For>) {
          os << "for " << n.var << " in ";
          print_expr(os, *n.iterable);
          os << ":\n";
          print_block(os, n.body, depth + 1);
        } else if constexpr (std::is_same_v<T, If>) {
          for (std::size_t i = 0; i < n.arms.size(); ++i) {
            if (i) indent(os, depth);
            os << (i == 0 ? "if " : "elif ");
            print_expr(os, *n.arms[i].cond);
            os << ":\n";
            print_block(os, n.arms[i].body, depth + 1);
          }
          if (!n.else_body.empty()) {
            indent(os, depth);
            os << "else:\n";
            print_block(os, n.else_body, depth + 1);
          }
        } else if constexpr (std::is_same_v<T, Return>) {
          os << "return ";
          print_expr(os, *n.value);
          os << '\n';
        } else {
          print_expr(os, *n.expr);
          os << '\n';
        }
      },
      s.node);
}

void print_block(std::ostream& os, const Block& block, int depth) {
  for (const auto& s : block) print_stmt(os, s, depth);
}

bool same_block(const Block& a, const Block& b);

bool same_ptr(const ExprPtr& a, const ExprPtr& b) {
  if (!a || !b) return !a && !b;
  return same_structure(*a, *b);
}

bool same_list(const std::vector<ExprPtr>& a, const std::vector<ExprPtr>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!same_ptr(a[i], b[i])) return false;
  }
  return true;
}

bool same_stmt(const Stmt& a, const Stmt& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(b.node);
        if constexpr (std::is_same_v<T, Assign>) {
          return x.name == y.name && same_ptr(x.value, y.value);
        } else if constexpr (std::is_same_v<T, For>) {
          return x.var == y.var && same_ptr(x.iterable, y.iterable) && same_block(x.body, y.body);
        } else if constexpr (std::is_same_v<T, If>) {
          if (x.arms.size() != y.arms.size()) return false;
          for (std::size_t i = 0; i < x.arms.size(); ++i) {
            if (!same_ptr(x.arms[i].cond, y.arms[i].cond) || !same_block(x.arms[i].body, y.arms[i].body)) {
              return false;
            }
          }
          return same_block(x.else_body, y.else_body);
        } else if constexpr (std::is_same_v<T, Return>) {
          return same_ptr(x.value, y.value);
        } else {
          return same_ptr(x.expr, y.expr);
        }
      },
      a.node);
}

bool same_block(const Block& a, const Block& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!same_stmt(a[i], b[i])) return false;
  }
  return true;
}

}  // namespace

std::string print(const Expr& expr) {
  std::ostringstream os;
  print_expr(os, expr);
  return os.str();
}

std::string print(const Ast& ast) {
  std::ostringstream os;
  print_block(os, ast.statements, 0);
  return os.str();
}

bool same_structure(const Expr& a, const Expr& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(b.node);
        if constexpr (std::is_same_v<T, Literal>) {
          return x.value == y.value;
        } else if constexpr (std::is_same_v<T, Name>) {
          return x.id == y.id;
        } else if constexpr (std::is_same_v<T, Binary>) {
          return x.op == y.op && same_ptr(x.lhs, y.lhs) && same_ptr(x.rhs, y.rhs);
        } else if constexpr (std::is_same_v<T, Unary>) {
          return x.op == y.op && same_ptr(x.operand, y.operand);
        } else if constexpr (std::is_same_v<T, Index>) {
          return same_ptr(x.object, y.object) && same_ptr(x.key, y.key);
        } else if constexpr (std::is_same_v<T, Attr>) {
          return x.field == y.field && same_ptr(x.object, y.object);
        } else if constexpr (std::is_same_v<T, Call>) {
          return x.callee == y.callee && same_list(x.args, y.args);
        } else {
          return same_list(x.elems, y.elems);
        }
      },
      a.node);
}

bool same_structure(const Ast& a, const Ast& b) { return same_block(a.statements, b.statements); }

}  // namespace hypro::lang
