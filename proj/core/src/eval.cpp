#include "hypro/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "hypro/text.hpp"

namespace hypro {

namespace {

bool is_ascii_punct(unsigned char c) {
  return (c >= 33 && c <= 47) || (c >= 58 && c <= 64) || (c >= 91 && c <= 96) || (c >= 123 && c <= 126);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

std::vector<std::string> answer_tokens(std::string_view text) { return split_ws(normalize_answer(text)); }

double pair_f1(const std::vector<std::string>& p, const std::vector<std::string>& g) {
  if (p.empty() && g.empty()) return 1.0;
  if (p.empty() || g.empty()) return 0.0;
  std::map<std::string, int> counts;
  for (const auto& t : g) ++counts[t];
  int common = 0;
  for (const auto& t : p) {
    auto it = counts.find(t);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++common;
    }
  }
  if (common == 0) return 0.0;
  double precision = static_cast<double>(common) / static_cast<double>(p.size());
  double recall = static_cast<double>(common) / static_cast<double>(g.size());
  return 2 * precision * recall / (precision + recall);
}

double percent(double sum, std::size_t n) {
  if (n == 0) return 0.0;
  return std::round(1000.0 * sum / static_cast<double>(n)) / 10.0;
}

}  // namespace

std::string normalize_answer(std::string_view text) {
  std::string s;
  s.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    auto c = static_cast<unsigned char>(text[i]);
    // Latin-1 capitals (U+00C0..U+00DE except U+00D7) fold to lowercase.
    if (c == 0xC3 && i + 1 < text.size()) {
      auto d = static_cast<unsigned char>(text[i + 1]);
      s.push_back(static_cast<char>(c));
      s.push_back(static_cast<char>(d >= 0x80 && d <= 0x9E && d != 0x97 ? d + 0x20 : d));
      ++i;
      continue;
    }
    if (is_ascii_punct(c)) continue;
    s.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c));
  }
  std::string out;
  for (const auto& tok : split_ws(s)) {
    if (tok == "a" || tok == "an" || tok == "the") continue;
    if (!out.empty()) out += ' ';
    out += tok;
  }
  return out;
}

int exact_match(std::string_view pred, const std::vector<std::string>& golds) {
  const std::string p = normalize_answer(pred);
  for (const auto& g : golds) {
    if (normalize_answer(g) == p) return 1;
  }
  return 0;
}

double token_f1(std::string_view pred, const std::vector<std::string>& golds) {
  const auto p = answer_tokens(pred);
  double best = 0.0;
  for (const auto& g : golds) best = std::max(best, pair_f1(p, answer_tokens(g)));
  return best;
}

ListScore score_list(const std::vector<std::string>& preds, const std::vector<std::string>& golds) {
  ListScore score;
  std::vector<std::string> p = preds, g = golds;
  std::sort(p.begin(), p.end());
  std::sort(g.begin(), g.end());
  std::set<std::string> ps, gs;
  for (const auto& x : p) ps.insert(normalize_answer(x));
  for (const auto& x : g) gs.insert(normalize_answer(x));
  score.em = ps == gs ? 1 : 0;
  const std::size_t denom = std::max(p.size(), g.size());
  if (denom == 0) {
    score.f1 = 1.0;
    return score;
  }
  std::vector<std::vector<double>> f(p.size(), std::vector<double>(g.size()));
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = 0; j < g.size(); ++j) f[i][j] = pair_f1(answer_tokens(p[i]), answer_tokens(g[j]));
  }
  std::vector<bool> used_p(p.size()), used_g(g.size());
  double total = 0;
  for (std::size_t round = 0; round < std::min(p.size(), g.size()); ++round) {
    double best = -1;
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (used_p[i]) continue;
      for (std::size_t j = 0; j < g.size(); ++j) {
        if (!used_g[j] && f[i][j] > best) {
          best = f[i][j];
          bi = i;
          bj = j;
        }
      }
    }
    used_p[bi] = used_g[bj] = true;
    total += best;
  }
  score.f1 = total / static_cast<double>(denom);
  return score;
}

std::string to_string(ErrorType t) {
  switch (t) {
    case ErrorType::correct:
      return "correct";
    case ErrorType::em_not_match:
      return "em_not_match";
    case ErrorType::execution_error:
      return "execution_error";
    case ErrorType::failed_information_seeking:
      return "failed_information_seeking";
    case ErrorType::wrong_answer:
      return "wrong_answer";
  }
  return "wrong_answer";
}

ErrorType classify_error(const PredictionRecord& record, int em, double f1, double threshold) {
  if (em == 1) return ErrorType::correct;
  if (f1 >= threshold) return ErrorType::em_not_match;
  if (record.attempts.empty() || record.attempts.back().failed()) return ErrorType::execution_error;
  for (const auto& call : record.host_calls) {
    if (call.function == "extract_info" && call.outcome == "none") return ErrorType::failed_information_seeking;
  }
  return ErrorType::wrong_answer;
}

EvalReport evaluate_run(const std::vector<PredictionRecord>& records, const std::vector<QAInstance>& instances,
                        double threshold) {
  EvalReport report;
  std::map<std::string, const PredictionRecord*> by_id;
  for (const auto& r : records) by_id.emplace(r.question_id, &r);
  std::set<std::string> known;
  for (const auto& inst : instances) known.insert(inst.question_id);
  for (const auto& r : records) {
    if (!known.count(r.question_id)) report.unknown_predictions.push_back(r.question_id);
  }

  for (const char* name : {"correct", "em_not_match", "execution_error", "failed_information_seeking", "wrong_answer"}) {
    report.error_histogram[name] = 0;
  }
  std::map<AnswerSource, std::pair<double, double>> cat_sums;
  std::map<AnswerSource, std::size_t> cat_counts;
  double em_sum = 0, f1_sum = 0;
  for (const auto& inst : instances) {
    RecordScore s;
    s.question_id = inst.question_id;
    s.category = inst.answer_source;
    auto it = by_id.find(inst.question_id);
    if (it == by_id.end()) {
      s.missing = true;
      report.missing_predictions.push_back(inst.question_id);
    } else {
      const PredictionRecord& r = *it->second;
      if (inst.gold_answers.size() > 1) {
        ListScore ls = score_list(r.answer, inst.gold_answers);
        s.em = ls.em;
        s.f1 = ls.f1;
      } else {
        std::string pred;
        for (std::size_t i = 0; i < r.answer.size(); ++i) pred += (i ? ", " : "") + r.answer[i];
        s.em = exact_match(pred, inst.gold_answers);
        s.f1 = std::max(token_f1(pred, inst.gold_answers), static_cast<double>(s.em));
      }
      s.error_type = classify_error(r, s.em, s.f1, threshold);
      ++report.error_histogram[to_string(*s.error_type)];
    }
    em_sum += s.em;
    f1_sum += s.f1;
    if (s.category) {
      cat_sums[*s.category].first += s.em;
      cat_sums[*s.category].second += s.f1;
      ++cat_counts[*s.category];
    }
    report.records.push_back(std::move(s));
  }
  report.total = instances.size();
  report.em = percent(em_sum, instances.size());
  report.f1 = percent(f1_sum, instances.size());
  for (auto cat : {AnswerSource::table, AnswerSource::passage, AnswerSource::computed}) {
    auto c = cat_counts.find(cat);
    if (c == cat_counts.end()) continue;
    report.categories.push_back(
        {to_string(cat), c->second, percent(cat_sums[cat].first, c->second), percent(cat_sums[cat].second, c->second)});
  }
  return report;
}

nlohmann::json to_json(const EvalReport& r) {
  using nlohmann::json;
  json cats = json::array();
  for (const auto& c : r.categories) cats.push_back({{"name", c.name}, {"count", c.count}, {"em", c.em}, {"f1", c.f1}});
  json recs = json::array();
  for (const auto& s : r.records) {
    recs.push_back({{"question_id", s.question_id},
                    {"em", s.em},
                    {"f1", s.f1},
                    {"category", s.category ? json(to_string(*s.category)) : json(nullptr)},
                    {"error_type", s.error_type ? json(to_string(*s.error_type)) : json(nullptr)},
                    {"missing", s.missing}});
  }
  return {{"total", r.total},
          {"em", r.em},
          {"f1", r.f1},
          {"categories", std::move(cats)},
          {"error_histogram", r.error_histogram},
          {"missing_predictions", r.missing_predictions},
          {"unknown_predictions", r.unknown_predictions},
          {"records", std::move(recs)}};
}

std::string render_report_table(const EvalReport& r) {
  std::ostringstream os;
  char line[128];
  std::snprintf(line, sizeof(line), "%-10s %7s %7s %7s\n", "Source", "Count", "EM", "F1");
  os << line;
  for (const auto& c : r.categories) {
    std::string name = c.name;
    name[0] = static_cast<char>(name[0] - 'a' + 'A');
    std::snprintf(line, sizeof(line), "%-10s %7zu %7.1f %7.1f\n", name.c_str(), c.count, c.em, c.f1);
    os << line;
  }
  std::snprintf(line, sizeof(line), "%-10s %7zu %7.1f %7.1f\n", "Total", r.total, r.em, r.f1);
  os << line;
  return os.str();
}

std::string render_error_histogram_csv(const EvalReport& r) {
  std::string out = "error_type,count\n";
  for (const char* name : {"correct", "em_not_match", "execution_error", "failed_information_seeking", "wrong_answer"}) {
    out += std::string(name) + "," + std::to_string(r.error_histogram.at(name)) + "\n";
  }
  return out;
}

}  // namespace hypro
