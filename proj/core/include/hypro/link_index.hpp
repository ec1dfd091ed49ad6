#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "hypro/dataset.hpp"
#include "hypro/types.hpp"

namespace hypro {

/// Cell text to linked documents.
struct LinkIndex {
  using CellPos = std::tuple<std::string, std::size_t, std::size_t>;  // (table_id, row, col)

  /// Canonical cell key to the merged DocRefs of every cell with that key,
  /// doc_id ascending. Duplicates are kept: one entry per linking cell.
  std::map<std::string, std::vector<DocRef>> exact;
  std::map<CellPos, std::vector<DocRef>> by_cell;
  /// Per-table view of `exact`, used to keep lookups inside one table.
  std::map<std::string, std::map<std::string, std::vector<DocRef>>> by_table;

  static constexpr double kFuzzyThreshold = 0.8;

  /// Exact key within `table_id`, then exact key anywhere, then the key of
  /// `table_id` with the best LCS ratio when that ratio is at least 0.8. An
  /// empty `table_id` searches every table. Result is deduplicated.
  std::vector<DocRef> resolve(const std::string& cell_text, const std::string& table_id = {}) const;

  nlohmann::json to_json() const;
};

LinkIndex build_link_index(const Corpus& corpus);

/// lcs_length / max(|a|, |b|) over canonical keys; 1 for two empty keys.
double lcs_ratio(const std::string& a, const std::string& b);

}  // namespace hypro
