#include "hypro/interp/value.hpp"

#include <charconv>

namespace hypro::interp {

const Value* RowMap::find(const std::string& key) const {
  for (const auto& [k, v] : entries) {
    if (k == key) return &v;
  }
  return nullptr;
}

const char* type_name(const Value& v) {
  switch (v.data.index()) {
    case 0:
      return "None";
    case 1:
      return "Text";
    case 2:
      return "Int";
    case 3:
      return "Real";
    case 4:
      return "Bool";
    case 5:
      return "Seq";
    default:
      return "RowMap";
  }
}

bool truthy(const Value& v) {
  return std::visit(
      [](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, None>) {
          return false;
        } else if constexpr (std::is_same_v<T, std::string>) {
          return !x.empty();
        } else if constexpr (std::is_same_v<T, SeqPtr>) {
          return !x->empty();
        } else if constexpr (std::is_same_v<T, RowMapPtr>) {
          return !x->entries.empty();
        } else {
          return x != 0;
        }
      },
      v.data);
}

bool is_empty_result(const Value& v) {
  if (v.is_none()) return true;
  if (v.is_seq()) return v.seq_ptr()->empty();
  if (v.is_rowmap()) return v.rowmap().entries.empty();
  return false;
}

namespace {

std::string real_text(double d) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), d);
  std::string s(buf, end);
  if (s.find_first_of(".ein") == std::string::npos) s += ".0";
  return s;
}

void display(std::string& out, const Value& v, bool quoted, const std::function<void()>& charge) {
  if (charge) charge();
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, None>) {
          out += "None";
        } else if constexpr (std::is_same_v<T, std::string>) {
          if (quoted) {
            out += '\'';
            out += x;
            out += '\'';
          } else {
            out += x;
          }
        } else if constexpr (std::is_same_v<T, std::int64_t>) {
          out += std::to_string(x);
        } else if constexpr (std::is_same_v<T, double>) {
          out += real_text(x);
        } else if constexpr (std::is_same_v<T, bool>) {
          out += x ? "True" : "False";
        } else if constexpr (std::is_same_v<T, SeqPtr>) {
          out += '[';
          for (std::size_t i = 0; i < x->size(); ++i) {
            if (i) out += ", ";
            display(out, (*x)[i], true, charge);
          }
          out += ']';
        } else {
          out += '{';
          for (std::size_t i = 0; i < x->entries.size(); ++i) {
            if (i) out += ", ";
            out += '\'' + x->entries[i].first + "': ";
            display(out, x->entries[i].second, true, charge);
          }
          out += '}';
        }
      },
      v.data);
}

}  // namespace

std::string to_display(const Value& v, const std::function<void()>& charge) {
  std::string out;
  display(out, v, false, charge);
  return out;
}

AnswerValue to_answer_value(const Value& v) {
  return std::visit(
      [](const auto& x) -> AnswerValue {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, None>) {
          return AnswerValue::none();
        } else if constexpr (std::is_same_v<T, std::string>) {
          return AnswerValue::text(x);
        } else if constexpr (std::is_same_v<T, std::int64_t>) {
          return AnswerValue::number(static_cast<double>(x));
        } else if constexpr (std::is_same_v<T, double>) {
          return AnswerValue::number(x);
        } else if constexpr (std::is_same_v<T, bool>) {
          return AnswerValue::boolean(x);
        } else if constexpr (std::is_same_v<T, SeqPtr>) {
          AnswerValue::Sequence out;
          out.reserve(x->size());
          for (const auto& e : *x) out.push_back(to_answer_value(e));
          return AnswerValue::sequence(std::move(out));
        } else {
          AnswerValue::Sequence out;
          for (const auto& [k, e] : x->entries) out.push_back(to_answer_value(e));
          return AnswerValue::sequence(std::move(out));
        }
      },
      v.data);
}

}  // namespace hypro::interp
