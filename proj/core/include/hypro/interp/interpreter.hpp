#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <variant>

#include "hypro/errors.hpp"
#include "hypro/interp/value.hpp"
#include "hypro/lang/ast.hpp"
#include "hypro/lang/diagnostics.hpp"
#include "hypro/types.hpp"

namespace hypro::interp {

struct Limits {
  std::size_t max_steps = 100'000;
  std::size_t max_seq_len = 10'000;
  std::size_t max_host_calls = 32;
  std::size_t max_text_len = 1'000'000;
};

/// Thrown by host callbacks; surfaces as HostFunctionError in the outcome.
class HostError : public Error {
 public:
  using Error::Error;
};

class DuplicateBinding : public Error {
 public:
  explicit DuplicateBinding(const std::string& name) : Error("host function already bound: " + name) {}
};

using HostCallback = std::function<Value(std::span<const Value>)>;

struct HostFunction {
  std::size_t arity = 0;
  HostCallback callback;
};

class Env {
 public:
  Env() = default;

  /// Preloads `table` (title, headers) and `rows` (one RowMap per row).
  static Env for_table(const TableContext& table);

  void set(const std::string& name, Value v) { bindings_[name] = std::move(v); }
  const Value* get(const std::string& name) const;

  /// Throws DuplicateBinding when the name is already bound.
  Env& bind_host_function(const std::string& name, std::size_t arity, HostCallback callback);

  const std::map<std::string, Value>& bindings() const { return bindings_; }
  const std::map<std::string, HostFunction>& host_functions() const { return host_; }

 private:
  std::map<std::string, Value> bindings_;
  std::map<std::string, HostFunction> host_;
};

inline Env bind_host_function(Env env, const std::string& name, std::size_t arity, HostCallback callback) {
  env.bind_host_function(name, arity, std::move(callback));
  return env;
}

struct ExecutionOutcome {
  std::variant<Value, lang::RuntimeError> result;
  std::size_t steps = 0;
  std::size_t host_calls = 0;

  bool ok() const { return std::holds_alternative<Value>(result); }
  const Value& value() const { return std::get<Value>(result); }
  const lang::RuntimeError& error() const { return std::get<lang::RuntimeError>(result); }
  bool empty_result() const { return ok() && is_empty_result(value()); }
};

/// Names callable from programs without binding: len, str, int, real, lower,
/// append, max, min, sum, sorted_by, range.
const std::vector<std::string>& builtin_names();

ExecutionOutcome execute(const lang::Ast& ast, Env env, const Limits& limits = {});

}  // namespace hypro::interp
