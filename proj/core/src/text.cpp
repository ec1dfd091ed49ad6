#include "hypro/text.hpp"

#include <charconv>
#include <cmath>
#include <string>

namespace hypro {

namespace {

bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

}  // namespace

std::string casefold(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && is_space(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string canonicalize_cell_key(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    if (is_space(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : c);
  }
  return out;
}

std::string render_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) return "0";
  char buf[512];
  const auto fmt = std::fabs(x) < 1e15 ? std::chars_format::fixed : std::chars_format::general;
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x, fmt);
  std::string s(buf, ec == std::errc{} ? end : buf);
  if (fmt == std::chars_format::fixed && s.find('.') != std::string::npos) {
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
  }
  return s;
}

std::vector<std::string> answer_value_to_strings(const AnswerValue& v) {
  struct Visitor {
    std::vector<std::string>& out;
    void operator()(const AnswerValue::None&) const {}
    void operator()(const std::string& s) const { out.push_back(s); }
    void operator()(double d) const { out.push_back(render_number(d)); }
    void operator()(bool b) const { out.push_back(b ? "yes" : "no"); }
    void operator()(const AnswerValue::Sequence& seq) const {
      for (const auto& e : seq) std::visit(*this, e.value);
    }
  };
  std::vector<std::string> out;
  std::visit(Visitor{out}, v.value);
  return out;
}

}  // namespace hypro
