#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "hypro/types.hpp"

namespace hypro::interp {

struct Value;
using Seq = std::vector<Value>;
using SeqPtr = std::shared_ptr<Seq>;

/// Ordered text-keyed record; a table row or the `table` descriptor.
struct RowMap {
  std::vector<std::pair<std::string, Value>> entries;

  const Value* find(const std::string& key) const;
};
using RowMapPtr = std::shared_ptr<const RowMap>;

struct None {
  friend bool operator==(None, None) { return true; }
};

/// Sequences have reference semantics: `append` mutates the list every
/// binding of it observes.
struct Value {
  std::variant<None, std::string, std::int64_t, double, bool, SeqPtr, RowMapPtr> data;

  Value() = default;
  Value(None n) : data(n) {}
  Value(std::string s) : data(std::move(s)) {}
  Value(const char* s) : data(std::string(s)) {}
  Value(std::int64_t i) : data(i) {}
  Value(int i) : data(static_cast<std::int64_t>(i)) {}
  Value(double d) : data(d) {}
  Value(bool b) : data(b) {}
  Value(SeqPtr s) : data(std::move(s)) {}
  Value(RowMapPtr r) : data(std::move(r)) {}

  static Value seq(Seq items = {}) { return Value(std::make_shared<Seq>(std::move(items))); }

  bool is_none() const { return std::holds_alternative<None>(data); }
  bool is_text() const { return std::holds_alternative<std::string>(data); }
  bool is_int() const { return std::holds_alternative<std::int64_t>(data); }
  bool is_real() const { return std::holds_alternative<double>(data); }
  bool is_number() const { return is_int() || is_real(); }
  bool is_bool() const { return std::holds_alternative<bool>(data); }
  bool is_seq() const { return std::holds_alternative<SeqPtr>(data); }
  bool is_rowmap() const { return std::holds_alternative<RowMapPtr>(data); }

  const std::string& text() const { return std::get<std::string>(data); }
  std::int64_t integer() const { return std::get<std::int64_t>(data); }
  double real() const { return std::get<double>(data); }
  double as_double() const { return is_int() ? static_cast<double>(integer()) : real(); }
  bool boolean() const { return std::get<bool>(data); }
  const SeqPtr& seq_ptr() const { return std::get<SeqPtr>(data); }
  const RowMap& rowmap() const { return *std::get<RowMapPtr>(data); }
};

/// "Text", "Int", "Real", "Bool", "Seq", "RowMap", "None".
const char* type_name(const Value& v);

bool truthy(const Value& v);

/// None, empty Seq, empty RowMap.
bool is_empty_result(const Value& v);

/// Display form used by `str()`: text as-is, reals with a fraction, containers
/// with quoted elements. `charge` is called once per visited node.
std::string to_display(const Value& v, const std::function<void()>& charge = {});

AnswerValue to_answer_value(const Value& v);

}  // namespace hypro::interp
