#include "hypro/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "hypro/errors.hpp"
#include "hypro/hash.hpp"
#include "hypro/text.hpp"

namespace hypro {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(Split s) {
  switch (s) {
    case Split::train:
      return "train";
    case Split::dev:
      return "dev";
    case Split::test:
      return "test";
  }
  return "dev";
}

std::optional<Split> parse_split(const std::string& s) {
  if (s == "train") return Split::train;
  if (s == "dev" || s == "validation") return Split::dev;
  if (s == "test") return Split::test;
  return std::nullopt;
}

const TableContext& Corpus::table(const std::string& id) const {
  auto it = tables.find(id);
  if (it == tables.end()) throw SchemaMismatch("unknown table id: " + id);
  return it->second;
}

const Document* Corpus::find_document(const std::string& id) const {
  auto it = documents.find(id);
  return it == documents.end() ? nullptr : &it->second;
}

const QAInstance* Corpus::find_instance(const std::string& question_id) const {
  for (const auto& inst : instances) {
    if (inst.question_id == question_id) return &inst;
  }
  return nullptr;
}

namespace {

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingFile(path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaMismatch(path.string() + ": not valid JSON: " + e.what());
  }
}

template <typename Fn>
void for_each_jsonl(const fs::path& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw MissingFile(path.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw SchemaMismatch(path.filename().string() + " line " + std::to_string(lineno) + ": " + e.what());
    }
    fn(j, lineno);
  }
}

const json& field(const json& obj, const char* name, const std::string& where) {
  if (!obj.is_object() || !obj.contains(name)) {
    throw SchemaMismatch(where + ": field '" + name + "' is missing");
  }
  return obj.at(name);
}

std::string text_field(const json& obj, const char* name, const std::string& where) {
  const json& v = field(obj, name, where);
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw SchemaMismatch(where + ": field '" + name + "' is not text");
}

std::string json_scalar_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) return render_number(v.get<double>());
  if (v.is_boolean()) return v.get<bool>() ? "yes" : "no";
  return v.dump();
}

void sort_unique(std::vector<DocRef>& refs) {
  std::sort(refs.begin(), refs.end(), [](const DocRef& a, const DocRef& b) { return a.doc_id < b.doc_id; });
  refs.erase(std::unique(refs.begin(), refs.end()), refs.end());
}

// ---- HybridQA ------------------------------------------------------------

std::string title_from_wiki_url(const std::string& url) {
  std::string t = url;
  const std::string prefix = "/wiki/";
  if (t.rfind(prefix, 0) == 0) t = t.substr(prefix.size());
  std::replace(t.begin(), t.end(), '_', ' ');
  return t;
}

// A cell or header entry is either "text" or ["text", [links...]].
std::pair<std::string, std::vector<std::string>> hybrid_cell(const json& c, const std::string& where) {
  if (c.is_string()) return {c.get<std::string>(), {}};
  if (!c.is_array() || c.empty() || !c[0].is_string()) throw SchemaMismatch(where + ": cell is ill-typed");
  std::vector<std::string> links;
  if (c.size() > 1 && c[1].is_array()) {
    for (const auto& l : c[1]) {
      if (l.is_string()) links.push_back(l.get<std::string>());
    }
  }
  return {c[0].get<std::string>(), std::move(links)};
}

void load_hybrid_table(const fs::path& wiki_root, const std::string& table_id, Corpus& corpus) {
  const fs::path table_file = wiki_root / "tables_tok" / (table_id + ".json");
  const fs::path passage_file = wiki_root / "request_tok" / (table_id + ".json");
  json tj = read_json_file(table_file);
  json pj = fs::exists(passage_file) ? read_json_file(passage_file) : json::object();
  const std::string where = table_file.filename().string();

  TableContext table;
  table.table_id = table_id;
  table.source_split = SourceSplit::hybridqa;
  table.title = tj.contains("title") && tj["title"].is_string() ? tj["title"].get<std::string>() : "";
  const json& header = field(tj, "header", where);
  if (!header.is_array()) throw SchemaMismatch(where + ": field 'header' is not a list");
  for (const auto& h : header) table.headers.push_back(hybrid_cell(h, where).first);

  const json& data = field(tj, "data", where);
  if (!data.is_array()) throw SchemaMismatch(where + ": field 'data' is not a list");
  for (std::size_t r = 0; r < data.size(); ++r) {
    const std::string row_where = where + " row " + std::to_string(r);
    if (!data[r].is_array()) throw SchemaMismatch(row_where + ": row is not a list");
    std::vector<Cell> row;
    for (const auto& c : data[r]) {
      auto [text, urls] = hybrid_cell(c, row_where);
      Cell cell{std::move(text), {}};
      for (const auto& url : urls) {
        auto it = pj.find(url);
        if (it == pj.end() || !it->is_string()) continue;  // dangling link: no passage shipped
        if (!corpus.documents.count(url)) {
          corpus.documents.emplace(
              url, Document{url, DocKind::passage, title_from_wiki_url(url), it->get<std::string>(), "", ""});
        }
        cell.links.push_back(DocRef{url, DocKind::passage});
      }
      sort_unique(cell.links);
      row.push_back(std::move(cell));
    }
    table.rows.push_back(std::move(row));
  }
  table.validate();
  corpus.tables.emplace(table_id, std::move(table));
}

std::optional<AnswerSource> hybrid_answer_source(const json& q) {
  if (q.contains("answer-node") && q["answer-node"].is_array() && q["answer-node"].empty()) {
    return AnswerSource::computed;
  }
  if (q.contains("where_from") && q["where_from"].is_string()) {
    return parse_answer_source(q["where_from"].get<std::string>());
  }
  if (q.contains("answer-node") && q["answer-node"].is_array()) {
    const json& node = q["answer-node"][0];
    if (node.is_array() && node.size() >= 4 && node[3].is_string()) {
      return parse_answer_source(node[3].get<std::string>());
    }
  }
  return std::nullopt;
}

// ---- MultiModalQA ----------------------------------------------------------

fs::path mmqa_dir(const fs::path& root) {
  if (fs::exists(root / "MMQA_tables.jsonl")) return root;
  if (fs::exists(root / "dataset" / "MMQA_tables.jsonl")) return root / "dataset";
  return root;
}

std::string media_type_for(const fs::path& p) {
  std::string ext = casefold(p.extension().string());
  if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
  if (ext == ".png") return "image/png";
  return "";
}

void check_image_header(const fs::path& path, const std::string& media_type) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFile(path.string());
  unsigned char head[8] = {};
  in.read(reinterpret_cast<char*>(head), sizeof(head));
  const auto got = in.gcount();
  const bool jpeg = got >= 3 && head[0] == 0xFF && head[1] == 0xD8 && head[2] == 0xFF;
  const bool png = got >= 8 && head[0] == 0x89 && head[1] == 'P' && head[2] == 'N' && head[3] == 'G' &&
                   head[4] == 0x0D && head[5] == 0x0A && head[6] == 0x1A && head[7] == 0x0A;
  if ((media_type == "image/jpeg" && !jpeg) || (media_type == "image/png" && !png)) {
    throw ImageDecodeError(path.string() + ": content does not decode as " + media_type);
  }
}

}  // namespace

Corpus load_hybridqa(const fs::path& root, Split split) {
  Corpus corpus;
  corpus.source = SourceSplit::hybridqa;
  corpus.split = split;

  const fs::path data_dir = root / "released_data";
  fs::path qfile = data_dir / (to_string(split) + ".json");
  if (split == Split::test && !fs::exists(qfile) && fs::exists(data_dir / "test.blind.json")) {
    qfile = data_dir / "test.blind.json";
  }
  json questions = read_json_file(qfile);
  if (!questions.is_array()) throw SchemaMismatch(qfile.filename().string() + ": expected a list of questions");

  const fs::path wiki_root = root / "WikiTables-WithLinks";
  for (std::size_t i = 0; i < questions.size(); ++i) {
    const json& q = questions[i];
    std::string where = qfile.filename().string() + "[" + std::to_string(i) + "]";
    if (q.is_object() && q.contains("question_id") && q["question_id"].is_string()) {
      where += " (question_id=" + q["question_id"].get<std::string>() + ")";
    }
    QAInstance inst;
    inst.question_id = text_field(q, "question_id", where);
    inst.question = text_field(q, "question", where);
    inst.table_id = text_field(q, "table_id", where);
    if (q.contains("answer-text")) {
      if (!q["answer-text"].is_string()) throw SchemaMismatch(where + ": field 'answer-text' is not text");
      inst.gold_answers.push_back(q["answer-text"].get<std::string>());
    }
    inst.answer_source = hybrid_answer_source(q);
    if (!corpus.tables.count(inst.table_id)) load_hybrid_table(wiki_root, inst.table_id, corpus);
    inst.candidate_docs = linked_documents(corpus.tables.at(inst.table_id));
    corpus.instances.push_back(std::move(inst));
  }
  return corpus;
}

Corpus load_multimodalqa(const fs::path& root, Split split, bool oracle_mode) {
  Corpus corpus;
  corpus.source = SourceSplit::multimodalqa;
  corpus.split = split;
  corpus.oracle = oracle_mode;

  const fs::path dir = mmqa_dir(root);
  const fs::path qfile = dir / ("MMQA_" + to_string(split) + ".jsonl");
  const fs::path tables_file = dir / "MMQA_tables.jsonl";
  const fs::path texts_file = dir / "MMQA_texts.jsonl";
  const fs::path images_file = dir / "MMQA_images.jsonl";
  fs::path image_dir = dir / "final_dataset_images";
  if (!fs::exists(image_dir) && fs::exists(root / "final_dataset_images")) image_dir = root / "final_dataset_images";
  for (const auto& f : {qfile, tables_file, texts_file, images_file}) {
    if (!fs::exists(f)) throw MissingFile(f.string());
  }

  struct PendingDoc {
    std::string doc_id;
    std::string part;
  };
  std::vector<std::pair<QAInstance, std::vector<PendingDoc>>> pending;
  std::set<std::string> wanted_tables;
  std::set<std::string> wanted_docs;

  for_each_jsonl(qfile, [&](const json& q, std::size_t lineno) {
    std::string where = qfile.filename().string() + " line " + std::to_string(lineno);
    QAInstance inst;
    inst.question_id = text_field(q, "qid", where);
    where += " (qid=" + inst.question_id + ")";
    inst.question = text_field(q, "question", where);
    const json& meta = field(q, "metadata", where);
    inst.table_id = text_field(meta, "table_id", where + " metadata");
    if (q.contains("answers")) {
      const json& answers = q["answers"];
      if (!answers.is_array()) throw SchemaMismatch(where + ": field 'answers' is not a list");
      for (const auto& a : answers) inst.gold_answers.push_back(json_scalar_text(field(a, "answer", where)));
    }
    std::vector<PendingDoc> docs;
    for (const char* key : {"text_doc_ids", "image_doc_ids"}) {
      if (meta.contains(key) && meta[key].is_array()) {
        for (const auto& id : meta[key]) {
          if (!id.is_string()) continue;
          docs.push_back({id.get<std::string>(), key[0] == 't' ? "text" : "image"});
          wanted_docs.insert(id.get<std::string>());
        }
      }
    }
    if (q.contains("supporting_context") && q["supporting_context"].is_array()) {
      for (const auto& ctx : q["supporting_context"]) {
        std::string part = text_field(ctx, "doc_part", where + " supporting_context");
        if (part != "text" && part != "image") continue;
        std::string id = text_field(ctx, "doc_id", where + " supporting_context");
        docs.push_back({id, "gold_" + part});
        wanted_docs.insert(id);
      }
    }
    wanted_tables.insert(inst.table_id);
    pending.emplace_back(std::move(inst), std::move(docs));
  });

  // Tables and the titles their cells link to.
  std::map<std::string, std::set<std::string>> cell_link_titles;  // table_id -> titles
  std::map<std::string, std::vector<std::vector<std::vector<std::string>>>> link_titles_by_cell;
  for_each_jsonl(tables_file, [&](const json& t, std::size_t lineno) {
    const std::string where = "MMQA_tables.jsonl line " + std::to_string(lineno);
    std::string id = text_field(t, "id", where);
    if (!wanted_tables.count(id)) return;
    TableContext table;
    table.table_id = id;
    table.source_split = SourceSplit::multimodalqa;
    table.title = t.contains("title") && t["title"].is_string() ? t["title"].get<std::string>() : "";
    const json& body = field(t, "table", where);
    for (const auto& h : field(body, "header", where)) {
      table.headers.push_back(h.is_string() ? h.get<std::string>() : text_field(h, "column_name", where));
    }
    auto& titles = link_titles_by_cell[id];
    for (const auto& row_json : field(body, "table_rows", where)) {
      std::vector<Cell> row;
      std::vector<std::vector<std::string>> row_titles;
      for (const auto& c : row_json) {
        Cell cell;
        cell.text = c.is_string() ? c.get<std::string>() : text_field(c, "text", where);
        std::vector<std::string> ts;
        if (c.is_object() && c.contains("links") && c["links"].is_array()) {
          for (const auto& l : c["links"]) {
            if (l.is_object() && l.contains("wiki_title") && l["wiki_title"].is_string()) {
              ts.push_back(l["wiki_title"].get<std::string>());
              cell_link_titles[id].insert(ts.back());
            }
          }
        }
        row.push_back(std::move(cell));
        row_titles.push_back(std::move(ts));
      }
      table.rows.push_back(std::move(row));
      titles.push_back(std::move(row_titles));
    }
    table.validate();
    corpus.tables.emplace(id, std::move(table));
  });
  for (const auto& id : wanted_tables) {
    if (!corpus.tables.count(id)) throw SchemaMismatch("MMQA_tables.jsonl: table " + id + " is missing");
  }

  std::set<std::string> wanted_titles;
  for (const auto& [id, ts] : cell_link_titles) wanted_titles.insert(ts.begin(), ts.end());
  std::map<std::string, std::vector<DocRef>> by_title;

  for_each_jsonl(texts_file, [&](const json& t, std::size_t lineno) {
    const std::string where = "MMQA_texts.jsonl line " + std::to_string(lineno);
    std::string id = text_field(t, "id", where);
    std::string title = t.contains("title") && t["title"].is_string() ? t["title"].get<std::string>() : "";
    if (!wanted_docs.count(id) && !wanted_titles.count(title)) return;
    std::string body = text_field(t, "text", where);
    corpus.documents[id] = Document{id, DocKind::passage, title, std::move(body), "", ""};
    by_title[title].push_back(DocRef{id, DocKind::passage});
  });

  for_each_jsonl(images_file, [&](const json& t, std::size_t lineno) {
    const std::string where = "MMQA_images.jsonl line " + std::to_string(lineno);
    std::string id = text_field(t, "id", where);
    std::string title = t.contains("title") && t["title"].is_string() ? t["title"].get<std::string>() : "";
    if (!wanted_docs.count(id) && !wanted_titles.count(title)) return;
    fs::path path = image_dir / text_field(t, "path", where);
    std::string media = media_type_for(path);
    if (media.empty()) throw ImageDecodeError(path.string() + ": unsupported image type");
    check_image_header(path, media);
    corpus.documents[id] = Document{id, DocKind::image, title, "", path.string(), media};
    by_title[title].push_back(DocRef{id, DocKind::image});
  });

  for (auto& [id, table] : corpus.tables) {
    const auto& titles = link_titles_by_cell[id];
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      for (std::size_t c = 0; c < table.rows[r].size(); ++c) {
        auto& links = table.rows[r][c].links;
        for (const auto& title : titles[r][c]) {
          auto it = by_title.find(title);
          if (it != by_title.end()) links.insert(links.end(), it->second.begin(), it->second.end());
        }
        sort_unique(links);
      }
    }
  }

  for (auto& [inst, docs] : pending) {
    for (const auto& d : docs) {
      const Document* doc = corpus.find_document(d.doc_id);
      if (!doc) continue;  // not shipped in the release files
      DocRef ref{doc->doc_id, doc->kind};
      if (d.part.rfind("gold_", 0) == 0) {
        inst.gold_docs.push_back(ref);
      } else {
        inst.candidate_docs.push_back(ref);
      }
    }
    sort_unique(inst.gold_docs);
    std::vector<DocRef> linked = linked_documents(corpus.tables.at(inst.table_id));
    inst.candidate_docs.insert(inst.candidate_docs.end(), linked.begin(), linked.end());
    sort_unique(inst.candidate_docs);
    corpus.instances.push_back(std::move(inst));
  }
  return corpus;
}

std::vector<DocRef> linked_documents(const TableContext& table) {
  std::vector<DocRef> out;
  for (const auto& row : table.rows) {
    for (const auto& cell : row) out.insert(out.end(), cell.links.begin(), cell.links.end());
  }
  sort_unique(out);
  return out;
}

std::vector<DocRef> retrievable_documents(const Corpus& corpus, const QAInstance& instance) {
  if (corpus.oracle) return instance.gold_docs;
  if (!instance.candidate_docs.empty()) return instance.candidate_docs;
  return linked_documents(corpus.table(instance.table_id));
}

namespace {

// Cuts to `limit` code points.
std::string truncate_cell(const std::string& s, std::size_t limit) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if ((static_cast<unsigned char>(s[i]) & 0xC0) == 0x80) continue;
    if (count == limit) return s.substr(0, i) + "…";
    ++count;
  }
  return s;
}

std::string one_line(const std::string& s) {
  std::string out = s;
  std::replace(out.begin(), out.end(), '\n', ' ');
  return out;
}

}  // namespace

std::string render_table_prompt(const TableContext& table, std::size_t cell_char_limit) {
  std::ostringstream os;
  os << "Table: " << one_line(table.title) << "\n";
  for (std::size_t c = 0; c < table.headers.size(); ++c) {
    if (c) os << " | ";
    os << one_line(table.headers[c]);
  }
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    os << "\n" << r << ": ";
    for (std::size_t c = 0; c < table.rows[r].size(); ++c) {
      if (c) os << " | ";
      os << truncate_cell(one_line(table.rows[r][c].text), cell_char_limit);
    }
  }
  return os.str();
}

// ---- canonical cache --------------------------------------------------------

namespace {

json refs_to_json(const std::vector<DocRef>& refs) {
  json out = json::array();
  for (const auto& r : refs) out.push_back({{"doc_id", r.doc_id}, {"kind", to_string(r.kind)}});
  return out;
}

std::vector<DocRef> refs_from_json(const json& j) {
  std::vector<DocRef> out;
  for (const auto& r : j) {
    auto kind = parse_doc_kind(r.at("kind").get<std::string>());
    if (!kind) throw SchemaMismatch("corpus cache: bad document kind");
    out.push_back(DocRef{r.at("doc_id").get<std::string>(), *kind});
  }
  return out;
}

}  // namespace

json to_json(const TableContext& t) {
  json rows = json::array();
  for (const auto& row : t.rows) {
    json cells = json::array();
    for (const auto& c : row) cells.push_back({{"text", c.text}, {"links", refs_to_json(c.links)}});
    rows.push_back(std::move(cells));
  }
  return {{"table_id", t.table_id},
          {"title", t.title},
          {"headers", t.headers},
          {"rows", std::move(rows)},
          {"source_split", to_string(t.source_split)}};
}

TableContext table_from_json(const json& j) {
  TableContext t;
  t.table_id = j.at("table_id").get<std::string>();
  t.title = j.at("title").get<std::string>();
  t.headers = j.at("headers").get<std::vector<std::string>>();
  for (const auto& row : j.at("rows")) {
    std::vector<Cell> cells;
    for (const auto& c : row) cells.push_back(Cell{c.at("text").get<std::string>(), refs_from_json(c.at("links"))});
    t.rows.push_back(std::move(cells));
  }
  auto split = parse_source_split(j.value("source_split", "hybridqa"));
  t.source_split = split.value_or(SourceSplit::hybridqa);
  t.validate();
  return t;
}

json corpus_to_json(const Corpus& corpus) {
  json tables = json::array();
  for (const auto& [id, t] : corpus.tables) tables.push_back(to_json(t));
  json docs = json::array();
  for (const auto& [id, d] : corpus.documents) {
    docs.push_back({{"doc_id", d.doc_id},
                    {"kind", to_string(d.kind)},
                    {"title", d.title},
                    {"text", d.text},
                    {"image_path", d.image_path},
                    {"media_type", d.media_type}});
  }
  json instances = json::array();
  for (const auto& q : corpus.instances) {
    json jq = {{"question_id", q.question_id},
               {"question", q.question},
               {"table_id", q.table_id},
               {"gold_answers", q.gold_answers},
               {"gold_docs", refs_to_json(q.gold_docs)},
               {"candidate_docs", refs_to_json(q.candidate_docs)}};
    jq["answer_source"] = q.answer_source ? json(to_string(*q.answer_source)) : json(nullptr);
    instances.push_back(std::move(jq));
  }
  return {{"schema_version", 1},
          {"source", to_string(corpus.source)},
          {"split", to_string(corpus.split)},
          {"oracle", corpus.oracle},
          {"tables", std::move(tables)},
          {"documents", std::move(docs)},
          {"instances", std::move(instances)}};
}

Corpus corpus_from_json(const json& j) {
  if (j.value("schema_version", 0) != 1) throw SchemaMismatch("corpus cache: unsupported schema_version");
  try {
    Corpus c;
    auto source = parse_source_split(j.at("source").get<std::string>());
    auto split = parse_split(j.at("split").get<std::string>());
    if (!source || !split) throw SchemaMismatch("corpus cache: bad source or split");
    c.source = *source;
    c.split = *split;
    c.oracle = j.value("oracle", false);
    for (const auto& t : j.at("tables")) {
      TableContext table = table_from_json(t);
      std::string id = table.table_id;
      c.tables.emplace(std::move(id), std::move(table));
    }
    for (const auto& d : j.at("documents")) {
      auto kind = parse_doc_kind(d.at("kind").get<std::string>());
      if (!kind) throw SchemaMismatch("corpus cache: bad document kind");
      Document doc{d.at("doc_id").get<std::string>(), *kind, d.value("title", ""), d.value("text", ""),
                   d.value("image_path", ""), d.value("media_type", "")};
      std::string id = doc.doc_id;
      c.documents.emplace(std::move(id), std::move(doc));
    }
    for (const auto& q : j.at("instances")) {
      QAInstance inst;
      inst.question_id = q.at("question_id").get<std::string>();
      inst.question = q.at("question").get<std::string>();
      inst.table_id = q.at("table_id").get<std::string>();
      inst.gold_answers = q.at("gold_answers").get<std::vector<std::string>>();
      if (q.contains("answer_source") && q["answer_source"].is_string()) {
        inst.answer_source = parse_answer_source(q["answer_source"].get<std::string>());
      }
      inst.gold_docs = refs_from_json(q.value("gold_docs", json::array()));
      inst.candidate_docs = refs_from_json(q.value("candidate_docs", json::array()));
      c.instances.push_back(std::move(inst));
    }
    return c;
  } catch (const json::exception& e) {
    throw SchemaMismatch(std::string("corpus cache: ") + e.what());
  }
}

void save_corpus_cache(const Corpus& corpus, const fs::path& file) {
  std::ofstream out(file);
  if (!out) throw MissingFile(file.string());
  out << corpus_to_json(corpus).dump() << "\n";
}

Corpus load_corpus_cache(const fs::path& file) { return corpus_from_json(read_json_file(file)); }

std::string corpus_hash(const Corpus& corpus) { return sha256_hex(corpus_to_json(corpus).dump()); }

}  // namespace hypro
