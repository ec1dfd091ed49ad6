#include "hypro/lang/parser.hpp"

#include <charconv>
#include <cmath>
#include <optional>
#include <set>
#include <vector>

namespace hypro::lang {

namespace {

enum class Tok { name, keyword, integer, real, string, op, newline, indent, dedent, end };

struct Token {
  Tok kind;
  std::string text;
  int line;
  int column;
  std::int64_t int_value = 0;
  double real_value = 0.0;
};

struct Failure {
  int line;
  int column;
  std::string message;
};

const std::set<std::string, std::less<>> kKeywords = {"if",  "elif", "else",  "for",  "in",  "return",
                                                      "and", "or",   "not",   "True", "False", "None"};

// Reserved words of the host scripting syntax that fall outside the subset.
const std::set<std::string, std::less<>> kForbidden = {
    "import", "from",  "def",   "class", "lambda", "while",  "with",  "try",   "except", "finally", "raise",
    "global", "nonlocal", "del", "assert", "yield", "async", "await", "pass",  "break",  "continue", "is"};

constexpr int kMaxNesting = 200;

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    while (pos_ < src_.size()) {
      if (at_line_start_) {
        if (bracket_depth_ == 0) {
          if (handle_indentation()) continue;
        } else {
          at_line_start_ = false;
        }
      }
      char c = src_[pos_];
      if (c == '\n') {
        if (bracket_depth_ == 0 && !tokens_.empty() && tokens_.back().kind != Tok::newline) {
          push(Tok::newline, "\n", line_, col());
        }
        advance_line();
        continue;
      }
      if (c == ' ' || c == '\t' || c == '\r' || c == '\f') {
        ++pos_;
        continue;
      }
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
        continue;
      }
      if (c == '\\' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '\n') {
        pos_ += 1;
        advance_line();
        at_line_start_ = false;
        continue;
      }
      if (is_ident_start(c)) {
        lex_name();
      } else if (is_digit(c) || (c == '.' && pos_ + 1 < src_.size() && is_digit(src_[pos_ + 1]))) {
        lex_number();
      } else if (c == '"' || c == '\'') {
        lex_string(c);
      } else {
        lex_operator();
      }
    }
    if (!tokens_.empty() && tokens_.back().kind != Tok::newline) push(Tok::newline, "\n", line_, col());
    while (indents_.size() > 1) {
      indents_.pop_back();
      push(Tok::dedent, "", line_, 1);
    }
    push(Tok::end, "", line_, col());
    return std::move(tokens_);
  }

 private:
  static bool is_digit(char c) { return c >= '0' && c <= '9'; }
  static bool is_ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
  static bool is_ident(char c) { return is_ident_start(c) || is_digit(c); }

  int col() const { return static_cast<int>(pos_ - line_start_) + 1; }

  void advance_line() {
    ++pos_;
    ++line_;
    line_start_ = pos_;
    at_line_start_ = true;
  }

  [[noreturn]] void fail(const std::string& msg, int column = -1) const {
    throw Failure{line_, column < 0 ? col() : column, msg};
  }

  void push(Tok kind, std::string text, int line, int column) {
    tokens_.push_back(Token{kind, std::move(text), line, column});
  }

  // Returns true when the whole line was blank or a comment and got consumed.
  bool handle_indentation() {
    std::size_t p = pos_;
    int width = 0;
    char kind = 0;
    bool mixed = false;
    while (p < src_.size() && (src_[p] == ' ' || src_[p] == '\t')) {
      if (kind == 0) kind = src_[p];
      if (src_[p] != kind) mixed = true;
      ++width;
      ++p;
    }
    while (p < src_.size() && (src_[p] == '\r' || src_[p] == '\f')) ++p;
    if (p >= src_.size() || src_[p] == '\n' || src_[p] == '#') {
      while (p < src_.size() && src_[p] != '\n') ++p;
      pos_ = p;
      if (pos_ < src_.size()) {
        advance_line();
      }
      return true;
    }
    pos_ = p;
    at_line_start_ = false;
    if (mixed || (kind != 0 && indent_char_ != 0 && kind != indent_char_)) {
      fail("inconsistent indentation: tabs and spaces are mixed", 1);
    }
    if (kind != 0) indent_char_ = kind;
    if (width > indents_.back()) {
      indents_.push_back(width);
      push(Tok::indent, "", line_, 1);
    } else {
      while (width < indents_.back()) {
        indents_.pop_back();
        push(Tok::dedent, "", line_, 1);
      }
      if (width != indents_.back()) fail("unindent does not match any outer indentation level", 1);
    }
    return false;
  }

  void lex_name() {
    int column = col();
    std::size_t start = pos_;
    while (pos_ < src_.size() && is_ident(src_[pos_])) ++pos_;
    std::string word(src_.substr(start, pos_ - start));
    if (word == "is") fail("the 'is' operator is not permitted", column);
    if (kForbidden.count(word)) fail(word + " is not permitted", column);
    const Tok kind = kKeywords.count(word) ? Tok::keyword : Tok::name;
    push(kind, std::move(word), line_, column);
  }

  void lex_number() {
    int column = col();
    std::size_t start = pos_;
    bool is_real = false;
    while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
    if (pos_ < src_.size() && src_[pos_] == '.') {
      is_real = true;
      ++pos_;
      while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t save = pos_;
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (pos_ < src_.size() && is_digit(src_[pos_])) {
        is_real = true;
        while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
      } else {
        pos_ = save;
      }
    }
    if (pos_ < src_.size() && is_ident_start(src_[pos_])) fail("invalid numeric literal", column);
    std::string text(src_.substr(start, pos_ - start));
    Token tok{is_real ? Tok::real : Tok::integer, text, line_, column};
    if (is_real) {
      std::string digits = text.front() == '.' ? "0" + text : text;
      auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), tok.real_value);
      if (ec != std::errc{} || std::isinf(tok.real_value)) fail("numeric literal out of range", column);
    } else {
      auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), tok.int_value);
      if (ec != std::errc{}) fail("numeric literal out of range", column);
    }
    tokens_.push_back(std::move(tok));
  }

  void lex_string(char quote) {
    int column = col();
    ++pos_;
    std::string value;
    while (true) {
      if (pos_ >= src_.size() || src_[pos_] == '\n') fail("unterminated string literal", column);
      char c = src_[pos_];
      if (c == quote) {
        ++pos_;
        break;
      }
      if (c == '\\') {
        if (pos_ + 1 >= src_.size()) fail("unterminated string literal", column);
        char e = src_[pos_ + 1];
        switch (e) {
          case 'n':
            value += '\n';
            break;
          case 't':
            value += '\t';
            break;
          case '"':
            value += '"';
            break;
          case '\'':
            value += '\'';
            break;
          case '\\':
            value += '\\';
            break;
          default:
            fail(std::string("unsupported escape sequence '\\") + e + "'", col());
        }
        pos_ += 2;
        continue;
      }
      value += c;
      ++pos_;
    }
    push(Tok::string, std::move(value), line_, column);
  }

  void lex_operator() {
    int column = col();
    auto starts = [&](std::string_view s) { return src_.substr(pos_, s.size()) == s; };
    for (std::string_view aug : {"+=", "-=", "*=", "/=", "%=", "//=", "**=", "|=", "&=", "^=", ">>=", "<<="}) {
      if (starts(aug)) fail("augmented assignment '" + std::string(aug) + "' is not permitted", column);
    }
    for (std::string_view two : {"==", "!=", "<=", ">=", "**", "//", "->", ":="}) {
      if (starts(two)) {
        if (two == "**" || two == "//" || two == "->" || two == ":=") {
          fail("operator '" + std::string(two) + "' is not permitted", column);
        }
        push(Tok::op, std::string(two), line_, column);
        pos_ += 2;
        return;
      }
    }
    char c = src_[pos_];
    switch (c) {
      case '(':
      case '[':
        ++bracket_depth_;
        break;
      case ')':
      case ']':
        if (bracket_depth_ > 0) --bracket_depth_;
        break;
      case '{':
        fail("dict and set literals are not permitted", column);
      case '+':
      case '-':
      case '*':
      case '/':
      case '<':
      case '>':
      case '=':
      case ',':
      case ':':
      case '.':
      case ';':
        break;
      case '%':
      case '&':
      case '|':
      case '^':
      case '~':
      case '@':
        fail(std::string("operator '") + c + "' is not permitted", column);
      default: {
        unsigned char u = static_cast<unsigned char>(c);
        std::string shown = (u >= 0x20 && u < 0x7f) ? std::string(1, c) : "\\x" + hex(u);
        fail("unexpected character '" + shown + "'", column);
      }
    }
    push(Tok::op, std::string(1, c), line_, column);
    ++pos_;
  }

  static std::string hex(unsigned char u) {
    const char* digits = "0123456789abcdef";
    return {digits[u >> 4], digits[u & 15]};
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_start_ = 0;
  int line_ = 1;
  bool at_line_start_ = true;
  int bracket_depth_ = 0;
  char indent_char_ = 0;
  std::vector<int> indents_{0};
  std::vector<Token> tokens_;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  Ast program() {
    Ast ast;
    while (!at(Tok::end)) {
      if (at(Tok::indent)) fail_here("unexpected indent");
      parse_statement(ast.statements);
    }
    return ast;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    std::size_t i = std::min(pos_ + ahead, toks_.size() - 1);
    return toks_[i];
  }
  bool at(Tok k) const { return peek().kind == k; }
  bool at_op(std::string_view s) const { return peek().kind == Tok::op && peek().text == s; }
  bool at_kw(std::string_view s) const { return peek().kind == Tok::keyword && peek().text == s; }
  const Token& next() {
    const Token& t = peek();
    if (pos_ < toks_.size() - 1) ++pos_;
    return t;
  }

  [[noreturn]] void fail_at(const Token& t, const std::string& msg) const { throw Failure{t.line, t.column, msg}; }
  [[noreturn]] void fail_here(const std::string& msg) const { fail_at(peek(), msg); }

  static std::string describe(const Token& t) {
    switch (t.kind) {
      case Tok::newline:
        return "end of line";
      case Tok::indent:
        return "indent";
      case Tok::dedent:
        return "dedent";
      case Tok::end:
        return "end of input";
      case Tok::string:
        return "string literal";
      case Tok::integer:
      case Tok::real:
        return "number '" + t.text + "'";
      default:
        return "'" + t.text + "'";
    }
  }

  void expect_op(std::string_view s) {
    if (!at_op(s)) fail_here("expected '" + std::string(s) + "' but found " + describe(peek()));
    next();
  }

  void expect_newline() {
    if (at(Tok::end)) return;
    if (!at(Tok::newline)) fail_here("unexpected " + describe(peek()));
    next();
  }

  void parse_statement(Block& out) {
    if (at_kw("if")) {
      out.push_back(parse_if());
    } else if (at_kw("for")) {
      out.push_back(parse_for());
    } else if (at_kw("elif") || at_kw("else")) {
      fail_here("'" + peek().text + "' without a matching 'if'");
    } else {
      parse_simple_line(out);
    }
  }

  void parse_simple_line(Block& out) {
    out.push_back(parse_simple());
    while (at_op(";")) {
      next();
      if (at(Tok::newline) || at(Tok::end)) break;
      out.push_back(parse_simple());
    }
    expect_newline();
  }

  Stmt parse_simple() {
    const Token& first = peek();
    if (at_kw("return")) {
      next();
      Stmt s{Return{}, first.line};
      if (at(Tok::newline) || at(Tok::end) || at_op(";")) {
        auto none = std::make_shared<Expr>(Expr{Literal{NoneLit{}}, first.line, first.column});
        std::get<Return>(s.node).value = std::move(none);
      } else {
        std::get<Return>(s.node).value = parse_expr();
        reject_tuple();
      }
      return s;
    }
    ExprPtr e = parse_expr();
    if (at_op(",")) fail_here("tuple expressions and tuple assignment are not permitted");
    if (at_op("=")) {
      const Token& eq = peek();
      if (const auto* n = std::get_if<Name>(&e->node)) {
        next();
        ExprPtr value = parse_expr();
        reject_tuple();
        if (at_op("=")) fail_here("chained assignment is not permitted");
        return Stmt{Assign{n->id, std::move(value)}, first.line};
      }
      if (std::holds_alternative<Index>(e->node)) fail_at(eq, "item assignment is not permitted");
      if (std::holds_alternative<Attr>(e->node)) fail_at(eq, "attribute assignment is not permitted");
      fail_at(eq, "assignment target must be a name");
    }
    if (at_op(":")) fail_here("annotations are not permitted");
    return Stmt{ExprStmt{std::move(e)}, first.line};
  }

  void reject_tuple() {
    if (at_op(",")) fail_here("tuple expressions are not permitted");
  }

  Block parse_suite() {
    expect_op(":");
    Block body;
    if (!at(Tok::newline)) {
      parse_simple_line(body);
      return body;
    }
    next();
    if (!at(Tok::indent)) fail_here("expected an indented block");
    next();
    if (++depth_ > kMaxNesting) fail_here("blocks nested too deeply");
    while (!at(Tok::dedent) && !at(Tok::end)) {
      if (at(Tok::indent)) fail_here("unexpected indent");
      parse_statement(body);
    }
    --depth_;
    if (at(Tok::dedent)) next();
    return body;
  }

  Stmt parse_if() {
    const Token& kw = next();
    If node;
    ExprPtr cond = parse_expr();
    node.arms.push_back(IfArm{std::move(cond), parse_suite()});
    while (at_kw("elif")) {
      next();
      ExprPtr c = parse_expr();
      node.arms.push_back(IfArm{std::move(c), parse_suite()});
    }
    if (at_kw("else")) {
      next();
      node.else_body = parse_suite();
    }
    return Stmt{std::move(node), kw.line};
  }

  Stmt parse_for() {
    const Token& kw = next();
    if (!at(Tok::name)) fail_here("expected a loop variable name after 'for'");
    std::string var = next().text;
    if (at_op(",")) fail_here("tuple unpacking in 'for' is not permitted");
    if (!at_kw("in")) fail_here("expected 'in' but found " + describe(peek()));
    next();
    ExprPtr iterable = parse_expr();
    reject_tuple();
    Block body = parse_suite();
    if (body.empty()) fail_at(kw, "'for' body must not be empty");
    return Stmt{For{std::move(var), std::move(iterable), std::move(body)}, kw.line};
  }

  ExprPtr make(const Token& at_tok, decltype(Expr::node) node) {
    return std::make_shared<Expr>(Expr{std::move(node), at_tok.line, at_tok.column});
  }

  struct DepthGuard {
    Parser& p;
    explicit DepthGuard(Parser& parser) : p(parser) {
      if (++p.depth_ > kMaxNesting) p.fail_here("expression nesting too deep");
    }
    ~DepthGuard() { --p.depth_; }
  };

  ExprPtr parse_expr() {
    DepthGuard guard(*this);
    ExprPtr e = parse_or();
    if (at_kw("if")) fail_here("conditional expressions are not permitted");
    if (at_kw("for")) fail_here("comprehensions are not permitted");
    return e;
  }

  ExprPtr parse_or() {
    ExprPtr lhs = parse_and();
    while (at_kw("or")) {
      const Token& op = next();
      ExprPtr rhs = parse_and();
      lhs = make(op, Binary{BinOp::logical_or, std::move(lhs), std::move(rhs)});
    }
    return lhs;
  }

  ExprPtr parse_and() {
    ExprPtr lhs = parse_not();
    while (at_kw("and")) {
      const Token& op = next();
      ExprPtr rhs = parse_not();
      lhs = make(op, Binary{BinOp::logical_and, std::move(lhs), std::move(rhs)});
    }
    return lhs;
  }

  ExprPtr parse_not() {
    if (at_kw("not")) {
      DepthGuard guard(*this);
      const Token& op = next();
      ExprPtr operand = parse_not();
      return make(op, Unary{UnOp::logical_not, std::move(operand)});
    }
    return parse_comparison();
  }

  std::optional<BinOp> comparison_op() const {
    if (peek().kind != Tok::op) return std::nullopt;
    const std::string& t = peek().text;
    if (t == "==") return BinOp::eq;
    if (t == "!=") return BinOp::ne;
    if (t == "<") return BinOp::lt;
    if (t == ">") return BinOp::gt;
    if (t == "<=") return BinOp::le;
    if (t == ">=") return BinOp::ge;
    return std::nullopt;
  }

  void reject_membership() {
    if (at_kw("in") || (at_kw("not") && peek(1).kind == Tok::keyword && peek(1).text == "in")) {
      fail_here("the 'in' operator is not permitted");
    }
  }

  ExprPtr parse_comparison() {
    ExprPtr lhs = parse_arith();
    reject_membership();
    if (auto op = comparison_op()) {
      const Token& tok = next();
      ExprPtr rhs = parse_arith();
      reject_membership();
      if (comparison_op()) fail_here("chained comparisons are not permitted");
      return make(tok, Binary{*op, std::move(lhs), std::move(rhs)});
    }
    return lhs;
  }

  ExprPtr parse_arith() {
    ExprPtr lhs = parse_term();
    while (at_op("+") || at_op("-")) {
      const Token& tok = next();
      ExprPtr rhs = parse_term();
      lhs = make(tok, Binary{tok.text == "+" ? BinOp::add : BinOp::sub, std::move(lhs), std::move(rhs)});
    }
    return lhs;
  }

  ExprPtr parse_term() {
    ExprPtr lhs = parse_unary();
    while (at_op("*") || at_op("/")) {
      const Token& tok = next();
      ExprPtr rhs = parse_unary();
      lhs = make(tok, Binary{tok.text == "*" ? BinOp::mul : BinOp::div, std::move(lhs), std::move(rhs)});
    }
    return lhs;
  }

  ExprPtr parse_unary() {
    if (at_op("-")) {
      DepthGuard guard(*this);
      const Token& tok = next();
      ExprPtr operand = parse_unary();
      return make(tok, Unary{UnOp::neg, std::move(operand)});
    }
    if (at_op("+")) fail_here("unary '+' is not permitted");
    return parse_postfix();
  }

  ExprPtr parse_postfix() {
    ExprPtr e = parse_atom();
    while (true) {
      if (at_op("(")) {
        const Token& paren = peek();
        const auto* callee = std::get_if<Name>(&e->node);
        if (!callee) fail_at(paren, "computed callees are not permitted; call functions by name, e.g. append(items, x)");
        next();
        std::vector<ExprPtr> args = parse_args();
        e = std::make_shared<Expr>(Expr{Call{callee->id, std::move(args)}, e->line, e->column});
      } else if (at_op("[")) {
        next();
        ExprPtr key = parse_expr();
        if (at_op(":")) fail_here("slices are not permitted");
        if (at_op(",")) fail_here("tuple indices are not permitted");
        expect_op("]");
        const int line = e->line, column = e->column;
        e = std::make_shared<Expr>(Expr{Index{std::move(e), std::move(key)}, line, column});
      } else if (at_op(".")) {
        next();
        if (!at(Tok::name)) fail_here("expected an attribute name after '.'");
        std::string field = next().text;
        if (at_op("(")) fail_here("method calls are not permitted; call functions by name, e.g. lower(x)");
        const int line = e->line, column = e->column;
        e = std::make_shared<Expr>(Expr{Attr{std::move(e), std::move(field)}, line, column});
      } else {
        return e;
      }
    }
  }

  std::vector<ExprPtr> parse_args() {
    std::vector<ExprPtr> args;
    while (!at_op(")")) {
      if (at(Tok::name) && peek(1).kind == Tok::op && peek(1).text == "=") {
        fail_here("keyword arguments are not permitted");
      }
      if (at_op("*")) fail_here("argument unpacking is not permitted");
      args.push_back(parse_expr());
      if (at_op(",")) {
        next();
        continue;
      }
      if (!at_op(")")) fail_here("expected ',' or ')' but found " + describe(peek()));
    }
    next();
    return args;
  }

  ExprPtr parse_atom() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::name:
        next();
        return make(t, Name{t.text});
      case Tok::integer:
        next();
        return make(t, Literal{t.int_value});
      case Tok::real:
        next();
        return make(t, Literal{t.real_value});
      case Tok::string: {
        next();
        if (at(Tok::string)) fail_here("implicit string concatenation is not permitted");
        return make(t, Literal{t.text});
      }
      case Tok::keyword:
        if (t.text == "True" || t.text == "False") {
          next();
          return make(t, Literal{t.text == "True"});
        }
        if (t.text == "None") {
          next();
          return make(t, Literal{NoneLit{}});
        }
        fail_here("unexpected keyword '" + t.text + "'");
      case Tok::op:
        if (t.text == "(") {
          next();
          if (at_op(")")) fail_here("tuples are not permitted");
          ExprPtr inner = parse_expr();
          if (at_op(",")) fail_here("tuples are not permitted");
          expect_op(")");
          return inner;
        }
        if (t.text == "[") {
          next();
          std::vector<ExprPtr> elems;
          while (!at_op("]")) {
            elems.push_back(parse_expr());
            if (at_op(",")) {
              next();
              continue;
            }
            if (!at_op("]")) fail_here("expected ',' or ']' but found " + describe(peek()));
          }
          next();
          return make(t, SeqLit{std::move(elems)});
        }
        fail_here("unexpected " + describe(t));
      default:
        fail_here("unexpected " + describe(t));
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  int depth_ = 0;
};

std::string line_text(std::string_view src, int line) {
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

}  // namespace

ParseResult parse(std::string_view source) {
  try {
    Lexer lexer(source);
    Parser parser(lexer.run());
    return parser.program();
  } catch (const Failure& f) {
    // Clamp the position into the source; end-of-input errors land on the last line.
    int lines = 1;
    for (char c : source) lines += c == '\n';
    if (!source.empty() && source.back() == '\n') --lines;
    int line = std::clamp(f.line, 1, std::max(lines, 1));
    std::string excerpt = line_text(source, line);
    int column = std::clamp(f.column, 1, static_cast<int>(excerpt.size()) + 1);
    return ParseError{line, column, f.message, std::move(excerpt)};
  }
}

}  // namespace hypro::lang
