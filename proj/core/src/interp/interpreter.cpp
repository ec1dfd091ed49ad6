#include "hypro/interp/interpreter.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "hypro/text.hpp"

namespace hypro::interp {

using lang::ErrorClass;

namespace {

struct Raise {
  lang::RuntimeError err;
};

const std::vector<std::string> kBuiltins = {"len", "str",  "int", "real", "lower",     "append",
                                            "max", "min",  "sum", "sorted_by", "range"};

bool is_builtin(const std::string& name) {
  return std::find(kBuiltins.begin(), kBuiltins.end(), name) != kBuiltins.end();
}

constexpr std::size_t kMaxSeqNesting = 64;

std::string quoted(const std::string& s) { return "'" + s + "'"; }

class Machine {
 public:
  Machine(Env env, const Limits& limits) : env_(std::move(env)), limits_(limits) {}

  ExecutionOutcome run(const lang::Ast& ast) {
    ExecutionOutcome out;
    try {
      std::optional<Value> ret = exec_block(ast.statements);
      if (ret) {
        out.result = std::move(*ret);
      } else if (const Value* answer = env_.get("answer")) {
        out.result = *answer;
      } else {
        out.result = Value{};
      }
    } catch (const Raise& r) {
      out.result = r.err;
    }
    out.steps = steps_;
    out.host_calls = host_calls_;
    return out;
  }

 private:
  [[noreturn]] void raise(ErrorClass cls, const lang::Expr& at, std::string msg, std::string fn = {}) {
    throw Raise{lang::RuntimeError{cls, at.line, at.column, std::move(msg), std::move(fn)}};
  }
  [[noreturn]] void raise_line(ErrorClass cls, int line, std::string msg) {
    throw Raise{lang::RuntimeError{cls, line, 0, std::move(msg), {}}};
  }

  void charge(const lang::Expr& at, std::size_t n = 1) {
    if (steps_ + n > limits_.max_steps) {
      steps_ = limits_.max_steps;
      raise(ErrorClass::step_limit_exceeded, at,
            "step limit of " + std::to_string(limits_.max_steps) + " evaluations exceeded");
    }
    steps_ += n;
  }

  void check_seq_len(const lang::Expr& at, std::size_t n) {
    if (n > limits_.max_seq_len) {
      raise(ErrorClass::step_limit_exceeded, at,
            "sequence length limit of " + std::to_string(limits_.max_seq_len) + " exceeded");
    }
  }

  // Nesting depth of `v` once stored in a sequence. Storing a sequence inside
  // itself is a TypeError, so values stay acyclic.
  std::size_t nested_depth(const Value& v, const Seq* target, const lang::Expr& at) {
    if (!v.is_seq()) return 0;
    charge(at);
    const Seq& s = *v.seq_ptr();
    if (&s == target) raise(ErrorClass::type_error, at, "a sequence cannot contain itself");
    std::size_t depth = 0;
    for (const auto& x : s) depth = std::max(depth, nested_depth(x, target, at));
    return depth + 1;
  }

  void check_nesting(const Value& item, const Seq* target, const lang::Expr& at) {
    if (nested_depth(item, target, at) + 1 > kMaxSeqNesting) {
      raise(ErrorClass::step_limit_exceeded, at,
            "sequence nesting limit of " + std::to_string(kMaxSeqNesting) + " exceeded");
    }
  }

  void check_text_len(const lang::Expr& at, std::size_t n) {
    if (n > limits_.max_text_len) {
      raise(ErrorClass::step_limit_exceeded, at,
            "text length limit of " + std::to_string(limits_.max_text_len) + " exceeded");
    }
  }

  void assign(const std::string& name, Value v, int line) {
    if (env_.host_functions().count(name) || is_builtin(name)) {
      raise_line(ErrorClass::type_error, line, "cannot assign to function name " + quoted(name));
    }
    env_.set(name, std::move(v));
  }

  std::optional<Value> exec_block(const lang::Block& block) {
    for (const auto& stmt : block) {
      if (auto ret = exec(stmt)) return ret;
    }
    return std::nullopt;
  }

  std::optional<Value> exec(const lang::Stmt& stmt) {
    return std::visit(
        [&](const auto& s) -> std::optional<Value> {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, lang::Assign>) {
            assign(s.name, eval(*s.value), stmt.line);
            return std::nullopt;
          } else if constexpr (std::is_same_v<T, lang::For>) {
            return exec_for(s, stmt.line);
          } else if constexpr (std::is_same_v<T, lang::If>) {
            for (const auto& arm : s.arms) {
              if (truthy(eval(*arm.cond))) return exec_block(arm.body);
            }
            return exec_block(s.else_body);
          } else if constexpr (std::is_same_v<T, lang::Return>) {
            return eval(*s.value);
          } else {
            eval(*s.expr);
            return std::nullopt;
          }
        },
        stmt.node);
  }

  std::optional<Value> exec_for(const lang::For& loop, int line) {
    Value iterable = eval(*loop.iterable);
    // The loop walks a snapshot, so appending to the iterated list cannot extend it.
    Seq items;
    if (iterable.is_seq()) {
      items = *iterable.seq_ptr();
    } else if (iterable.is_text()) {
      for (char c : iterable.text()) items.emplace_back(std::string(1, c));
    } else if (iterable.is_rowmap()) {
      for (const auto& [k, v] : iterable.rowmap().entries) items.emplace_back(k);
    } else {
      raise(ErrorClass::type_error, *loop.iterable,
            std::string("'") + type_name(iterable) + "' object is not iterable");
    }
    for (auto& item : items) {
      assign(loop.var, std::move(item), line);
      if (auto ret = exec_block(loop.body)) return ret;
    }
    return std::nullopt;
  }

  Value eval(const lang::Expr& e) {
    charge(e);
    return std::visit([&](const auto& n) -> Value { return eval_node(n, e); }, e.node);
  }

  Value eval_node(const lang::Literal& lit, const lang::Expr&) {
    return std::visit(
        [](const auto& v) -> Value {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, lang::NoneLit>) {
            return Value{};
          } else {
            return Value(v);
          }
        },
        lit.value);
  }

  Value eval_node(const lang::Name& n, const lang::Expr& e) {
    if (const Value* v = env_.get(n.id)) return *v;
    if (env_.host_functions().count(n.id) || is_builtin(n.id)) {
      raise(ErrorClass::type_error, e, "function " + quoted(n.id) + " must be called, not used as a value");
    }
    raise(ErrorClass::name_error, e, "name " + quoted(n.id) + " is not defined");
  }

  Value eval_node(const lang::Unary& u, const lang::Expr& e) {
    Value v = eval(*u.operand);
    if (u.op == lang::UnOp::logical_not) return Value(!truthy(v));
    if (v.is_int()) {
      if (v.integer() == std::numeric_limits<std::int64_t>::min()) {
        raise(ErrorClass::type_error, e, "integer overflow");
      }
      return Value(-v.integer());
    }
    if (v.is_real()) return Value(-v.real());
    raise(ErrorClass::type_error, e, std::string("bad operand type for unary -: '") + type_name(v) + "'");
  }

  Value eval_node(const lang::Binary& b, const lang::Expr& e) {
    using lang::BinOp;
    if (b.op == BinOp::logical_and) {
      Value lhs = eval(*b.lhs);
      return truthy(lhs) ? eval(*b.rhs) : lhs;
    }
    if (b.op == BinOp::logical_or) {
      Value lhs = eval(*b.lhs);
      return truthy(lhs) ? lhs : eval(*b.rhs);
    }
    Value lhs = eval(*b.lhs);
    Value rhs = eval(*b.rhs);
    switch (b.op) {
      case BinOp::add:
        return add(lhs, rhs, e);
      case BinOp::sub:
      case BinOp::mul:
        return arith(b.op, lhs, rhs, e);
      case BinOp::div:
        return divide(lhs, rhs, e);
      case BinOp::eq:
        return Value(equal(lhs, rhs, e));
      case BinOp::ne:
        return Value(!equal(lhs, rhs, e));
      default:
        return Value(order(b.op, lhs, rhs, e));
    }
  }

  Value add(const Value& l, const Value& r, const lang::Expr& e) {
    if (l.is_text() && r.is_text()) {
      check_text_len(e, l.text().size() + r.text().size());
      return Value(l.text() + r.text());
    }
    if (l.is_seq() && r.is_seq()) {
      const Seq& a = *l.seq_ptr();
      const Seq& c = *r.seq_ptr();
      check_seq_len(e, a.size() + c.size());
      charge(e, a.size() + c.size());
      Seq out = a;
      out.insert(out.end(), c.begin(), c.end());
      return Value::seq(std::move(out));
    }
    return arith(lang::BinOp::add, l, r, e);
  }

  Value arith(lang::BinOp op, const Value& l, const Value& r, const lang::Expr& e) {
    if (!l.is_number() || !r.is_number()) {
      raise(ErrorClass::type_error, e,
            std::string("unsupported operand types for ") + lang::spelling(op) + ": '" + type_name(l) + "' and '" +
                type_name(r) + "'");
    }
    if (l.is_int() && r.is_int()) {
      std::int64_t out = 0;
      bool overflow = false;
      switch (op) {
        case lang::BinOp::add:
          overflow = __builtin_add_overflow(l.integer(), r.integer(), &out);
          break;
        case lang::BinOp::sub:
          overflow = __builtin_sub_overflow(l.integer(), r.integer(), &out);
          break;
        default:
          overflow = __builtin_mul_overflow(l.integer(), r.integer(), &out);
      }
      if (overflow) raise(ErrorClass::type_error, e, "integer overflow");
      return Value(out);
    }
    double a = l.as_double();
    double c = r.as_double();
    switch (op) {
      case lang::BinOp::add:
        return Value(a + c);
      case lang::BinOp::sub:
        return Value(a - c);
      default:
        return Value(a * c);
    }
  }

  Value divide(const Value& l, const Value& r, const lang::Expr& e) {
    if (!l.is_number() || !r.is_number()) {
      raise(ErrorClass::type_error, e,
            std::string("unsupported operand types for /: '") + type_name(l) + "' and '" + type_name(r) + "'");
    }
    if (r.as_double() == 0.0) raise(ErrorClass::division_by_zero, e, "division by zero");
    return Value(l.as_double() / r.as_double());
  }

  bool equal(const Value& l, const Value& r, const lang::Expr& e) {
    charge(e);
    if (l.is_number() && r.is_number()) {
      if (l.is_int() && r.is_int()) return l.integer() == r.integer();
      return l.as_double() == r.as_double();
    }
    if (l.data.index() != r.data.index()) return false;
    if (l.is_none()) return true;
    if (l.is_text()) return l.text() == r.text();
    if (l.is_bool()) return l.boolean() == r.boolean();
    if (l.is_seq()) {
      const auto& a = l.seq_ptr();
      const auto& b = r.seq_ptr();
      if (a == b) return true;
      if (a->size() != b->size()) return false;
      for (std::size_t i = 0; i < a->size(); ++i) {
        if (!equal((*a)[i], (*b)[i], e)) return false;
      }
      return true;
    }
    const RowMap& a = l.rowmap();
    const RowMap& b = r.rowmap();
    if (a.entries.size() != b.entries.size()) return false;
    for (std::size_t i = 0; i < a.entries.size(); ++i) {
      if (a.entries[i].first != b.entries[i].first) return false;
      if (!equal(a.entries[i].second, b.entries[i].second, e)) return false;
    }
    return true;
  }

  // Three-way comparison for ordering operators; numbers with numbers, text with text.
  int compare(const Value& l, const Value& r, const lang::Expr& e, const char* op) {
    if (l.is_number() && r.is_number()) {
      if (l.is_int() && r.is_int()) return l.integer() < r.integer() ? -1 : (l.integer() > r.integer() ? 1 : 0);
      double a = l.as_double();
      double c = r.as_double();
      return a < c ? -1 : (a > c ? 1 : 0);
    }
    if (l.is_text() && r.is_text()) {
      int c = l.text().compare(r.text());
      return c < 0 ? -1 : (c > 0 ? 1 : 0);
    }
    raise(ErrorClass::type_error, e,
          std::string("'") + op + "' not supported between '" + type_name(l) + "' and '" + type_name(r) + "'");
  }

  bool order(lang::BinOp op, const Value& l, const Value& r, const lang::Expr& e) {
    if (l.is_real() || r.is_real()) {
      // NaN compares false under every ordering.
      if ((l.is_real() && std::isnan(l.real())) || (r.is_real() && std::isnan(r.real()))) {
        compare(l, r, e, lang::spelling(op));
        return false;
      }
    }
    int c = compare(l, r, e, lang::spelling(op));
    switch (op) {
      case lang::BinOp::lt:
        return c < 0;
      case lang::BinOp::gt:
        return c > 0;
      case lang::BinOp::le:
        return c <= 0;
      default:
        return c >= 0;
    }
  }

  Value eval_node(const lang::Index& ix, const lang::Expr& e) {
    Value obj = eval(*ix.object);
    Value key = eval(*ix.key);
    if (obj.is_seq() || obj.is_text()) {
      if (!key.is_int()) {
        raise(ErrorClass::type_error, e, std::string("indices must be Int, not '") + type_name(key) + "'");
      }
      std::int64_t n = obj.is_seq() ? static_cast<std::int64_t>(obj.seq_ptr()->size())
                                    : static_cast<std::int64_t>(obj.text().size());
      std::int64_t i = key.integer();
      if (i < 0) i += n;
      if (i < 0 || i >= n) {
        raise(ErrorClass::index_error, e, std::string(obj.is_seq() ? "sequence" : "text") + " index out of range");
      }
      if (obj.is_seq()) return (*obj.seq_ptr())[static_cast<std::size_t>(i)];
      return Value(std::string(1, obj.text()[static_cast<std::size_t>(i)]));
    }
    if (obj.is_rowmap()) {
      if (!key.is_text()) {
        raise(ErrorClass::type_error, e, std::string("row keys must be Text, not '") + type_name(key) + "'");
      }
      return field(obj.rowmap(), key.text(), e);
    }
    raise(ErrorClass::type_error, e, std::string("'") + type_name(obj) + "' object is not subscriptable");
  }

  Value field(const RowMap& map, const std::string& key, const lang::Expr& e) {
    if (const Value* v = map.find(key)) return *v;
    std::string msg = quoted(key) + " (available keys: ";
    for (std::size_t i = 0; i < map.entries.size(); ++i) {
      if (i) msg += ", ";
      msg += quoted(map.entries[i].first);
    }
    raise(ErrorClass::key_error, e, msg + ")");
  }

  Value eval_node(const lang::Attr& a, const lang::Expr& e) {
    Value obj = eval(*a.object);
    if (!obj.is_rowmap()) {
      raise(ErrorClass::type_error, e,
            std::string("'") + type_name(obj) + "' object has no attribute " + quoted(a.field));
    }
    return field(obj.rowmap(), a.field, e);
  }

  Value eval_node(const lang::SeqLit& s, const lang::Expr& e) {
    check_seq_len(e, s.elems.size());
    Seq items;
    items.reserve(s.elems.size());
    for (const auto& el : s.elems) {
      items.push_back(eval(*el));
      check_nesting(items.back(), nullptr, e);
    }
    return Value::seq(std::move(items));
  }

  Value eval_node(const lang::Call& c, const lang::Expr& e) {
    auto host = env_.host_functions().find(c.callee);
    if (host != env_.host_functions().end()) return call_host(c, host->second, e);
    if (!is_builtin(c.callee)) {
      raise(ErrorClass::name_error, e, "name " + quoted(c.callee) + " is not defined");
    }
    std::vector<Value> args;
    args.reserve(c.args.size());
    for (const auto& a : c.args) args.push_back(eval(*a));
    return call_builtin(c.callee, args, e);
  }

  Value call_host(const lang::Call& c, const HostFunction& fn, const lang::Expr& e) {
    if (c.args.size() != fn.arity) {
      raise(ErrorClass::type_error, e,
            c.callee + " expects " + std::to_string(fn.arity) + " arguments, got " + std::to_string(c.args.size()));
    }
    std::vector<Value> args;
    args.reserve(c.args.size());
    for (const auto& a : c.args) args.push_back(eval(*a));
    if (host_calls_ >= limits_.max_host_calls) {
      raise(ErrorClass::step_limit_exceeded, e,
            "host call limit of " + std::to_string(limits_.max_host_calls) + " exceeded");
    }
    ++host_calls_;
    try {
      return fn.callback(std::span<const Value>(args));
    } catch (const std::exception& ex) {
      raise(ErrorClass::host_function_error, e, ex.what(), c.callee);
    }
  }

  void arity(const std::string& name, const std::vector<Value>& args, std::size_t lo, std::size_t hi,
             const lang::Expr& e) {
    if (args.size() >= lo && args.size() <= hi) return;
    std::string expected = lo == hi ? std::to_string(lo) : std::to_string(lo) + " to " + std::to_string(hi);
    raise(ErrorClass::type_error, e,
          name + " expects " + expected + " arguments, got " + std::to_string(args.size()));
  }

  [[noreturn]] void bad_arg(const std::string& name, const Value& v, const lang::Expr& e) {
    raise(ErrorClass::type_error, e, name + "() does not accept '" + std::string(type_name(v)) + "'");
  }

  Value call_builtin(const std::string& name, std::vector<Value>& args, const lang::Expr& e) {
    if (name == "len") {
      arity(name, args, 1, 1, e);
      const Value& v = args[0];
      if (v.is_text()) return Value(static_cast<std::int64_t>(v.text().size()));
      if (v.is_seq()) return Value(static_cast<std::int64_t>(v.seq_ptr()->size()));
      if (v.is_rowmap()) return Value(static_cast<std::int64_t>(v.rowmap().entries.size()));
      bad_arg(name, v, e);
    }
    if (name == "str") {
      arity(name, args, 1, 1, e);
      std::size_t visited = 0;
      std::string s = to_display(args[0], [&] {
        charge(e);
        if (++visited > limits_.max_text_len) check_text_len(e, visited);
      });
      check_text_len(e, s.size());
      return Value(std::move(s));
    }
    if (name == "int") {
      arity(name, args, 1, 1, e);
      return to_int(args[0], e);
    }
    if (name == "real") {
      arity(name, args, 1, 1, e);
      return to_real(args[0], e);
    }
    if (name == "lower") {
      arity(name, args, 1, 1, e);
      if (!args[0].is_text()) bad_arg(name, args[0], e);
      return Value(casefold(args[0].text()));
    }
    if (name == "append") {
      arity(name, args, 2, 2, e);
      if (!args[0].is_seq()) bad_arg(name, args[0], e);
      Seq& target = *args[0].seq_ptr();
      check_nesting(args[1], &target, e);
      check_seq_len(e, target.size() + 1);
      target.push_back(args[1]);
      return Value{};
    }
    if (name == "max" || name == "min") return extremum(name, args, e);
    if (name == "sum") {
      arity(name, args, 1, 1, e);
      if (!args[0].is_seq()) bad_arg(name, args[0], e);
      Value total(std::int64_t{0});
      for (const auto& item : *args[0].seq_ptr()) {
        charge(e);
        if (!item.is_number()) {
          raise(ErrorClass::type_error, e, std::string("sum() cannot add '") + type_name(item) + "'");
        }
        total = arith(lang::BinOp::add, total, item, e);
      }
      return total;
    }
    if (name == "sorted_by") return sorted_by(args, e);
    if (name == "range") {
      arity(name, args, 1, 2, e);
      for (const auto& a : args) {
        if (!a.is_int()) bad_arg(name, a, e);
      }
      std::int64_t lo = args.size() == 2 ? args[0].integer() : 0;
      std::int64_t hi = args.size() == 2 ? args[1].integer() : args[0].integer();
      if (hi <= lo) return Value::seq();
      if (static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo) > limits_.max_seq_len) {
        check_seq_len(e, limits_.max_seq_len + 1);
      }
      charge(e, static_cast<std::size_t>(hi - lo));
      Seq out;
      for (std::int64_t i = lo; i < hi; ++i) out.emplace_back(i);
      return Value::seq(std::move(out));
    }
    raise(ErrorClass::name_error, e, "name " + quoted(name) + " is not defined");
  }

  Value to_int(const Value& v, const lang::Expr& e) {
    if (v.is_int()) return v;
    if (v.is_bool()) return Value(std::int64_t{v.boolean() ? 1 : 0});
    if (v.is_real()) {
      double t = std::trunc(v.real());
      if (!(t >= -0x1p63 && t < 0x1p63)) raise(ErrorClass::type_error, e, "cannot convert Real to Int");
      return Value(static_cast<std::int64_t>(t));
    }
    if (v.is_text()) {
      std::string s = trim(v.text());
      std::int64_t out = 0;
      const char* first = s.data();
      const char* last = s.data() + s.size();
      if (first != last && *first == '+') ++first;
      auto [p, ec] = std::from_chars(first, last, out);
      if (s.empty() || ec != std::errc{} || p != last) {
        raise(ErrorClass::type_error, e, "invalid literal for int(): " + quoted(v.text()));
      }
      return Value(out);
    }
    bad_arg("int", v, e);
  }

  Value to_real(const Value& v, const lang::Expr& e) {
    if (v.is_real()) return v;
    if (v.is_int()) return Value(static_cast<double>(v.integer()));
    if (v.is_bool()) return Value(v.boolean() ? 1.0 : 0.0);
    if (v.is_text()) {
      std::string s = trim(v.text());
      double out = 0;
      const char* first = s.data();
      const char* last = s.data() + s.size();
      if (first != last && *first == '+') ++first;
      auto [p, ec] = std::from_chars(first, last, out, std::chars_format::general);
      if (s.empty() || ec != std::errc{} || p != last || !std::isfinite(out)) {
        raise(ErrorClass::type_error, e, "invalid literal for real(): " + quoted(v.text()));
      }
      return Value(out);
    }
    bad_arg("real", v, e);
  }

  Value extremum(const std::string& name, const std::vector<Value>& args, const lang::Expr& e) {
    if (args.empty()) arity(name, args, 1, limits_.max_seq_len, e);
    const Seq* items = nullptr;
    Seq own;
    if (args.size() == 1) {
      if (!args[0].is_seq()) bad_arg(name, args[0], e);
      items = args[0].seq_ptr().get();
    } else {
      own = args;
      items = &own;
    }
    if (items->empty()) raise(ErrorClass::index_error, e, name + "() of an empty sequence");
    const bool want_max = name == "max";
    Value best = (*items)[0];
    for (std::size_t i = 1; i < items->size(); ++i) {
      charge(e);
      int c = compare((*items)[i], best, e, want_max ? ">" : "<");
      if ((want_max && c > 0) || (!want_max && c < 0)) best = (*items)[i];
    }
    return best;
  }

  Value sorted_by(const std::vector<Value>& args, const lang::Expr& e) {
    arity("sorted_by", args, 1, 3, e);
    if (!args[0].is_seq()) bad_arg("sorted_by", args[0], e);
    const Seq& items = *args[0].seq_ptr();
    std::optional<std::string> key;
    if (args.size() >= 2 && !args[1].is_none()) {
      if (!args[1].is_text()) bad_arg("sorted_by", args[1], e);
      key = args[1].text();
    }
    bool descending = false;
    if (args.size() == 3) {
      if (!args[2].is_bool()) bad_arg("sorted_by", args[2], e);
      descending = args[2].boolean();
    }
    std::vector<Value> keys;
    keys.reserve(items.size());
    for (const auto& item : items) {
      charge(e);
      if (key) {
        if (!item.is_rowmap()) {
          raise(ErrorClass::type_error, e,
                std::string("sorted_by with a key expects RowMap elements, got '") + type_name(item) + "'");
        }
        keys.push_back(field(item.rowmap(), *key, e));
      } else {
        keys.push_back(item);
      }
    }
    bool numeric = !keys.empty() && keys[0].is_number();
    for (const auto& k : keys) {
      bool ok = numeric ? k.is_number() : k.is_text();
      if (!ok || (k.is_real() && std::isnan(k.real()))) {
        raise(ErrorClass::type_error, e, "sorted_by needs all keys to be numbers or all to be Text");
      }
    }
    charge(e, items.size());
    std::vector<std::size_t> order(items.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    auto less = [&](std::size_t a, std::size_t b) {
      const Value& x = keys[descending ? b : a];
      const Value& y = keys[descending ? a : b];
      if (numeric) {
        if (x.is_int() && y.is_int()) return x.integer() < y.integer();
        return x.as_double() < y.as_double();
      }
      return x.text() < y.text();
    };
    std::stable_sort(order.begin(), order.end(), less);
    Seq out;
    out.reserve(items.size());
    for (std::size_t i : order) out.push_back(items[i]);
    return Value::seq(std::move(out));
  }

  Env env_;
  const Limits& limits_;
  std::size_t steps_ = 0;
  std::size_t host_calls_ = 0;
};

}  // namespace

const Value* Env::get(const std::string& name) const {
  auto it = bindings_.find(name);
  return it == bindings_.end() ? nullptr : &it->second;
}

Env& Env::bind_host_function(const std::string& name, std::size_t arity, HostCallback callback) {
  if (host_.count(name) || is_builtin(name)) throw DuplicateBinding(name);
  host_.emplace(name, HostFunction{arity, std::move(callback)});
  return *this;
}

Env Env::for_table(const TableContext& table) {
  Env env;
  Seq headers;
  for (const auto& h : table.headers) headers.emplace_back(h);
  auto descriptor = std::make_shared<RowMap>();
  descriptor->entries.emplace_back("title", Value(table.title));
  descriptor->entries.emplace_back("headers", Value::seq(std::move(headers)));
  env.set("table", Value(RowMapPtr(std::move(descriptor))));

  Seq rows;
  rows.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    auto map = std::make_shared<RowMap>();
    for (std::size_t c = 0; c < table.headers.size() && c < row.size(); ++c) {
      map->entries.emplace_back(table.headers[c], Value(row[c].text));
    }
    rows.emplace_back(RowMapPtr(std::move(map)));
  }
  env.set("rows", Value::seq(std::move(rows)));
  return env;
}

const std::vector<std::string>& builtin_names() { return kBuiltins; }

ExecutionOutcome execute(const lang::Ast& ast, Env env, const Limits& limits) {
  Machine m(std::move(env), limits);
  return m.run(ast);
}

}  // namespace hypro::interp
