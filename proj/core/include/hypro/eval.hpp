#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hypro/pipeline.hpp"
#include "hypro/types.hpp"

namespace hypro {

/// Lowercase, drop punctuation, drop the articles a/an/the, collapse spaces.
std::string normalize_answer(std::string_view text);

/// 1 when the normalized prediction equals some normalized gold.
int exact_match(std::string_view pred, const std::vector<std::string>& golds);

/// Best bag-of-tokens F1 over the golds. Two empty token lists score 1.
double token_f1(std::string_view pred, const std::vector<std::string>& golds);

/// EM is normalized set equality; F1 pairs items greedily by best token F1
/// and averages over the longer list.
struct ListScore {
  int em = 0;
  double f1 = 0;
};
ListScore score_list(const std::vector<std::string>& preds, const std::vector<std::string>& golds);

enum class ErrorType { correct, em_not_match, execution_error, failed_information_seeking, wrong_answer };

std::string to_string(ErrorType t);

inline constexpr double kEmNotMatchThreshold = 0.5;

ErrorType classify_error(const PredictionRecord& record, int em, double f1,
                         double em_not_match_threshold = kEmNotMatchThreshold);

struct RecordScore {
  std::string question_id;
  int em = 0;
  double f1 = 0;
  std::optional<AnswerSource> category;
  std::optional<ErrorType> error_type;  // unset for missing predictions
  bool missing = false;
};

struct CategoryScore {
  std::string name;
  std::size_t count = 0;
  double em = 0;  // percent, one decimal
  double f1 = 0;
};

struct EvalReport {
  std::size_t total = 0;
  double em = 0;  // percent, one decimal
  double f1 = 0;
  std::vector<CategoryScore> categories;  // table, passage, computed when annotated
  std::vector<RecordScore> records;       // instance order
  std::map<std::string, std::size_t> error_histogram;
  std::vector<std::string> missing_predictions;
  std::vector<std::string> unknown_predictions;  // records matching no instance
};

/// Scores every instance; instances without a record score 0 and are listed
/// in missing_predictions.
EvalReport evaluate_run(const std::vector<PredictionRecord>& records, const std::vector<QAInstance>& instances,
                        double em_not_match_threshold = kEmNotMatchThreshold);

nlohmann::json to_json(const EvalReport& r);
/// Aligned text table with one row per category and a total row.
std::string render_report_table(const EvalReport& r);
/// error_type,count
std::string render_error_histogram_csv(const EvalReport& r);

}  // namespace hypro
