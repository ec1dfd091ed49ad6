#include "hypro/types.hpp"

#include <fstream>
#include <iterator>
#include <sstream>

#include "hypro/errors.hpp"

namespace hypro {

std::string to_string(SourceSplit s) {
  return s == SourceSplit::hybridqa ? "hybridqa" : "multimodalqa";
}

std::string to_string(DocKind k) { return k == DocKind::passage ? "passage" : "image"; }

std::string to_string(AnswerSource s) {
  switch (s) {
    case AnswerSource::table:
      return "table";
    case AnswerSource::passage:
      return "passage";
    case AnswerSource::computed:
      return "computed";
  }
  return "computed";
}

std::optional<SourceSplit> parse_source_split(const std::string& s) {
  if (s == "hybridqa") return SourceSplit::hybridqa;
  if (s == "multimodalqa") return SourceSplit::multimodalqa;
  return std::nullopt;
}

std::optional<DocKind> parse_doc_kind(const std::string& s) {
  if (s == "passage") return DocKind::passage;
  if (s == "image") return DocKind::image;
  return std::nullopt;
}

std::optional<AnswerSource> parse_answer_source(const std::string& s) {
  if (s == "table") return AnswerSource::table;
  if (s == "passage") return AnswerSource::passage;
  if (s == "computed") return AnswerSource::computed;
  return std::nullopt;
}

void TableContext::validate() const {
  for (std::size_t c = 0; c < headers.size(); ++c) {
    if (headers[c].empty()) {
      throw SchemaMismatch("table " + table_id + ": header " + std::to_string(c) + " is empty");
    }
  }
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != headers.size()) {
      std::ostringstream os;
      os << "table " << table_id << ": row " << r << " has " << rows[r].size() << " cells, expected "
         << headers.size();
      throw SchemaMismatch(os.str());
    }
  }
}

std::size_t TableContext::column_of(const std::string& header) const {
  for (std::size_t c = 0; c < headers.size(); ++c) {
    if (headers[c] == header) return c;
  }
  return std::string::npos;
}

std::string read_image_payload(const Document& doc) {
  std::ifstream in(doc.image_path, std::ios::binary);
  if (!in) throw MissingFile(doc.image_path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace hypro
