#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace hypro {

enum class SourceSplit { hybridqa, multimodalqa };
enum class DocKind { passage, image };
enum class AnswerSource { table, passage, computed };

std::string to_string(SourceSplit s);
std::string to_string(DocKind k);
std::string to_string(AnswerSource s);
std::optional<SourceSplit> parse_source_split(const std::string& s);
std::optional<DocKind> parse_doc_kind(const std::string& s);
std::optional<AnswerSource> parse_answer_source(const std::string& s);

struct DocRef {
  std::string doc_id;
  DocKind kind = DocKind::passage;

  friend bool operator==(const DocRef&, const DocRef&) = default;
  friend auto operator<=>(const DocRef&, const DocRef&) = default;
};

struct Cell {
  std::string text;
  std::vector<DocRef> links;

  friend bool operator==(const Cell&, const Cell&) = default;
};

struct TableContext {
  std::string table_id;
  std::string title;
  std::vector<std::string> headers;
  std::vector<std::vector<Cell>> rows;
  SourceSplit source_split = SourceSplit::hybridqa;

  /// Throws SchemaMismatch when a row is ragged or a header is empty.
  void validate() const;
  std::size_t column_of(const std::string& header) const;  // npos when absent

  friend bool operator==(const TableContext&, const TableContext&) = default;
};

/// A passage carries its text in `text`. An image carries its file location
/// and media type; the bytes are read on demand with `read_image_payload`.
struct Document {
  std::string doc_id;
  DocKind kind = DocKind::passage;
  std::string title;
  std::string text;
  std::string image_path;
  std::string media_type;

  friend bool operator==(const Document&, const Document&) = default;
};

std::string read_image_payload(const Document& doc);

struct QAInstance {
  std::string question_id;
  std::string question;
  std::string table_id;
  std::vector<std::string> gold_answers;  // empty only for blind splits
  std::optional<AnswerSource> answer_source;
  std::vector<DocRef> gold_docs;       // annotated supporting documents (oracle setting)
  std::vector<DocRef> candidate_docs;  // documents the question may draw on outside the oracle setting

  friend bool operator==(const QAInstance&, const QAInstance&) = default;
};

struct AnswerValue {
  struct None {
    friend bool operator==(None, None) { return true; }
  };
  using Sequence = std::vector<AnswerValue>;
  std::variant<None, std::string, double, bool, Sequence> value;

  static AnswerValue text(std::string s) { return {std::move(s)}; }
  static AnswerValue number(double d) { return {d}; }
  static AnswerValue boolean(bool b) { return {b}; }
  static AnswerValue sequence(Sequence s) { return {std::move(s)}; }
  static AnswerValue none() { return {None{}}; }

  bool is_none() const { return std::holds_alternative<None>(value); }

  friend bool operator==(const AnswerValue&, const AnswerValue&) = default;
};

}  // namespace hypro
