#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hypro/types.hpp"

namespace hypro {

enum class Split { train, dev, test };

std::string to_string(Split s);
std::optional<Split> parse_split(const std::string& s);

/// One loaded dataset split in the canonical schema.
struct Corpus {
  SourceSplit source = SourceSplit::hybridqa;
  Split split = Split::dev;
  bool oracle = false;
  std::map<std::string, TableContext> tables;
  std::map<std::string, Document> documents;
  std::vector<QAInstance> instances;

  const TableContext& table(const std::string& id) const;
  const Document* find_document(const std::string& id) const;
  const QAInstance* find_instance(const std::string& question_id) const;
};

/// HybridQA release layout:
///   released_data/<split>.json
///   WikiTables-WithLinks/tables_tok/<table_id>.json
///   WikiTables-WithLinks/request_tok/<table_id>.json   (link URL -> passage text)
/// Throws MissingFile or SchemaMismatch.
Corpus load_hybridqa(const std::filesystem::path& root, Split split);

/// MultiModalQA release layout (files may also sit under `root/dataset`):
///   MMQA_<split>.jsonl, MMQA_tables.jsonl, MMQA_texts.jsonl, MMQA_images.jsonl,
///   final_dataset_images/<path>
/// Throws MissingFile, SchemaMismatch or ImageDecodeError.
Corpus load_multimodalqa(const std::filesystem::path& root, Split split, bool oracle_mode);

/// Documents available to retrieval for one instance. In the oracle setting
/// this is exactly the annotated gold set.
std::vector<DocRef> retrievable_documents(const Corpus& corpus, const QAInstance& instance);

/// Documents linked from any cell of the table, deduplicated, id order.
std::vector<DocRef> linked_documents(const TableContext& table);

/// "Table: <title>", the header row, then "<i>: c0 | c1 | ..." per row. Cells
/// longer than `cell_char_limit` characters are cut and end in "…".
std::string render_table_prompt(const TableContext& table, std::size_t cell_char_limit = 64);

/// Canonical corpus cache (schema_version 1).
nlohmann::json corpus_to_json(const Corpus& corpus);
Corpus corpus_from_json(const nlohmann::json& j);
void save_corpus_cache(const Corpus& corpus, const std::filesystem::path& file);
Corpus load_corpus_cache(const std::filesystem::path& file);

/// SHA-256 of the canonical serialization.
std::string corpus_hash(const Corpus& corpus);

nlohmann::json to_json(const TableContext& t);
TableContext table_from_json(const nlohmann::json& j);

}  // namespace hypro
