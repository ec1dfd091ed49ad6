#include "hypro/link_index.hpp"

#include <algorithm>

#include "hypro/retriever.hpp"
#include "hypro/text.hpp"

namespace hypro {

namespace {

bool by_id(const DocRef& a, const DocRef& b) {
  if (a.doc_id != b.doc_id) return a.doc_id < b.doc_id;
  return a.kind < b.kind;
}

std::vector<DocRef> deduplicated(std::vector<DocRef> refs) {
  std::sort(refs.begin(), refs.end(), by_id);
  refs.erase(std::unique(refs.begin(), refs.end()), refs.end());
  return refs;
}

}  // namespace

double lcs_ratio(const std::string& a, const std::string& b) {
  const std::size_t longest = std::max(a.size(), b.size());
  if (longest == 0) return 1.0;
  return static_cast<double>(longest_common_substring(a, b).length) / static_cast<double>(longest);
}

LinkIndex build_link_index(const Corpus& corpus) {
  LinkIndex index;
  for (const auto& [table_id, table] : corpus.tables) {
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      for (std::size_t c = 0; c < table.rows[r].size(); ++c) {
        const Cell& cell = table.rows[r][c];
        if (cell.links.empty()) continue;
        std::vector<DocRef> refs = cell.links;
        std::sort(refs.begin(), refs.end(), by_id);
        const std::string key = canonicalize_cell_key(cell.text);
        auto append = [&](std::vector<DocRef>& dst) { dst.insert(dst.end(), refs.begin(), refs.end()); };
        append(index.exact[key]);
        append(index.by_table[table_id][key]);
        index.by_cell[{table_id, r, c}] = refs;
      }
    }
  }
  for (auto& [key, refs] : index.exact) std::stable_sort(refs.begin(), refs.end(), by_id);
  for (auto& [tid, keys] : index.by_table) {
    for (auto& [key, refs] : keys) std::stable_sort(refs.begin(), refs.end(), by_id);
  }
  return index;
}

std::vector<DocRef> LinkIndex::resolve(const std::string& cell_text, const std::string& table_id) const {
  const std::string key = canonicalize_cell_key(cell_text);
  const std::map<std::string, std::vector<DocRef>>* scoped = nullptr;
  if (!table_id.empty()) {
    auto t = by_table.find(table_id);
    if (t != by_table.end()) {
      scoped = &t->second;
      auto it = scoped->find(key);
      if (it != scoped->end()) return deduplicated(it->second);
    }
  }
  if (auto it = exact.find(key); it != exact.end()) return deduplicated(it->second);

  if (!table_id.empty() && !scoped) return {};
  const auto& pool = scoped ? *scoped : exact;
  double best = -1;
  const std::vector<DocRef>* winner = nullptr;
  for (const auto& [candidate, refs] : pool) {
    double ratio = lcs_ratio(key, candidate);
    if (ratio > best) {  // map order: first key wins ties
      best = ratio;
      winner = &refs;
    }
  }
  if (winner && best >= kFuzzyThreshold) return deduplicated(*winner);
  return {};
}

nlohmann::json LinkIndex::to_json() const {
  auto refs_json = [](const std::vector<DocRef>& refs) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& r : refs) out.push_back({r.doc_id, to_string(r.kind)});
    return out;
  };
  nlohmann::json j;
  j["exact"] = nlohmann::json::object();
  for (const auto& [key, refs] : exact) j["exact"][key] = refs_json(refs);
  j["by_cell"] = nlohmann::json::array();
  for (const auto& [pos, refs] : by_cell) {
    j["by_cell"].push_back(
        {{"table_id", std::get<0>(pos)}, {"row", std::get<1>(pos)}, {"col", std::get<2>(pos)}, {"docs", refs_json(refs)}});
  }
  return j;
}

}  // namespace hypro
