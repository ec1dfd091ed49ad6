#include <doctest.h>

#include <fstream>

#include "hypro/dataset.hpp"
#include "hypro/errors.hpp"
#include "hypro/link_index.hpp"
#include "support/criteria.hpp"

using namespace hypro;
namespace fs = std::filesystem;

namespace {

Corpus mini() { return load_hybridqa(test::fixtures_dir() / "mini_hybridqa", Split::dev); }

void write(const fs::path& file, const std::string& content) {
  fs::create_directories(file.parent_path());
  std::ofstream(file, std::ios::binary) << content;
}

// A two-question MultiModalQA release with one passage and one image.
fs::path mmqa_release(const std::string& tag, bool good_png = true) {
  fs::path root = test::scratch_dir(tag);
  write(root / "MMQA_dev.jsonl",
        R"j({"qid":"m1","question":"Which film was released first?","answers":[{"answer":"Arrow"}],)j"
        R"j("metadata":{"table_id":"T1","text_doc_ids":["p1"],"image_doc_ids":["i1"]},)j"
        R"j("supporting_context":[{"doc_id":"p1","doc_part":"text"},{"doc_id":"T1","doc_part":"table"}]})j"
        "\n"
        R"j({"qid":"m2","question":"How many films?","answers":[{"answer":2}],"metadata":{"table_id":"T1"}})j"
        "\n");
  write(root / "MMQA_tables.jsonl",
        R"j({"id":"T1","title":"Films","table":{"header":[{"column_name":"Title"},{"column_name":"Year"}],)j"
        R"j("table_rows":[[{"text":"Arrow","links":[{"wiki_title":"Arrow (film)"}]},{"text":"1990"}],)j"
        R"j([{"text":"Bow","links":[{"wiki_title":"Bow poster"}]},{"text":"1995"}]]}})j"
        "\n"
        R"j({"id":"T2","title":"Unused","table":{"header":["A"],"table_rows":[["x"]]}})j"
        "\n");
  write(root / "MMQA_texts.jsonl", R"j({"id":"p1","title":"Arrow (film)","text":"Arrow is a 1990 film."})j"
                                   "\n"
                                   R"j({"id":"p9","title":"Elsewhere","text":"Unrelated."})j"
                                   "\n");
  write(root / "MMQA_images.jsonl", R"j({"id":"i1","title":"Bow poster","path":"bow.png"})j"
                                    "\n");
  const std::string png = good_png ? std::string("\x89PNG\r\n\x1a\n....", 12) : std::string("GIF89a....");
  write(root / "final_dataset_images" / "bow.png", png);
  return root;
}

}  // namespace

TEST_CASE("mini HybridQA corpus loads in the canonical schema") {
  Corpus c = mini();
  CHECK(c.source == SourceSplit::hybridqa);
  CHECK(c.split == Split::dev);
  REQUIRE(c.instances.size() == 12);
  CHECK(c.tables.size() == 3);
  CHECK(c.instances.front().question_id == "q01");
  CHECK(c.instances.front().gold_answers == std::vector<std::string>{"Nickelodeon"});

  const QAInstance* q02 = c.find_instance("q02");
  REQUIRE(q02);
  CHECK(q02->answer_source == AnswerSource::passage);
  CHECK(c.find_instance("q01")->answer_source == AnswerSource::table);
  CHECK(c.find_instance("q10")->answer_source == AnswerSource::computed);
  CHECK(c.find_instance("nope") == nullptr);

  const TableContext& t = c.table("Air_Force_bases_0");
  CHECK(t.headers == std::vector<std::string>{"Base", "State", "Opened", "Personnel"});
  CHECK(t.column_of("State") == 1);
  CHECK(t.column_of("Missing") == std::string::npos);
  CHECK_THROWS_AS(c.table("nope"), SchemaMismatch);
}

TEST_CASE("dangling links are dropped and passage titles come from the URL") {
  Corpus c = mini();
  const TableContext& t = c.table("Florida_college_athletics_0");
  const Cell& miami = t.rows.at(2).at(1);
  CHECK(miami.text == "Miami Hurricanes");
  REQUIRE(miami.links.size() == 1);
  CHECK(miami.links[0].doc_id == "/wiki/Miami_Hurricanes");
  CHECK(c.find_document("/wiki/Missing_Page") == nullptr);
  const Document* d = c.find_document("/wiki/Miami_Hurricanes");
  REQUIRE(d);
  CHECK(d->title == "Miami Hurricanes");
  CHECK(d->kind == DocKind::passage);
  CHECK(d->text.find("University of Miami") != std::string::npos);
}

TEST_CASE("retrievable documents are the table's linked passages") {
  Corpus c = mini();
  const QAInstance& q = *c.find_instance("q07");
  auto docs = retrievable_documents(c, q);
  CHECK(docs.size() == 3);
  CHECK(std::is_sorted(docs.begin(), docs.end(), [](auto& a, auto& b) { return a.doc_id < b.doc_id; }));
  CHECK(docs == linked_documents(c.table(q.table_id)));
}

TEST_CASE("render_table_prompt numbers rows and cuts long cells") {
  TableContext t;
  t.title = "Two\nlines";
  t.headers = {"A", "B"};
  t.rows = {{{"x", {}}, {std::string(70, 'y'), {}}}, {{"z", {}}, {"\xC3\xA9\xC3\xA9\xC3\xA9", {}}}};
  CHECK(render_table_prompt(t, 64) ==
        "Table: Two lines\nA | B\n0: x | " + std::string(64, 'y') + "…\n1: z | \xC3\xA9\xC3\xA9\xC3\xA9");
  CHECK(render_table_prompt(t, 2).find("1: z | \xC3\xA9\xC3\xA9…") != std::string::npos);
}

TEST_CASE("table validation rejects ragged rows and empty headers") {
  TableContext t;
  t.headers = {"A", "B"};
  t.rows = {{{"1", {}}}};
  CHECK_THROWS_AS(t.validate(), SchemaMismatch);
  t.rows = {{{"1", {}}, {"2", {}}}};
  CHECK_NOTHROW(t.validate());
  t.headers = {"A", ""};
  CHECK_THROWS_AS(t.validate(), SchemaMismatch);
}

TEST_CASE("link index resolves exact, scoped and fuzzy cell text") {
  Corpus c = mini();
  LinkIndex idx = build_link_index(c);
  auto hit = idx.resolve("  miami   HURRICANES ", "Florida_college_athletics_0");
  REQUIRE(hit.size() == 1);
  CHECK(hit[0].doc_id == "/wiki/Miami_Hurricanes");
  CHECK(idx.resolve("Miami Hurricanes").size() == 1);
  CHECK(idx.resolve("Miami Hurricane", "Florida_college_athletics_0").size() == 1);
  CHECK(idx.resolve("Something else entirely", "Florida_college_athletics_0").empty());
  CHECK(idx.resolve("Miami Hurricanes", "no_such_table").size() == 1);
  CHECK(idx.by_cell.count({"Florida_college_athletics_0", 2, 1}) == 1);
  CHECK(lcs_ratio("", "") == 1.0);
  CHECK(lcs_ratio("abcd", "abxx") == doctest::Approx(0.5));
}

TEST_CASE("canonical cache round-trips and hashes stably") {
  Corpus c = mini();
  fs::path file = test::scratch_dir("corpus_cache") / "corpus.json";
  save_corpus_cache(c, file);
  Corpus back = load_corpus_cache(file);
  CHECK(corpus_to_json(back) == corpus_to_json(c));
  CHECK(corpus_hash(back) == corpus_hash(c));
  CHECK(corpus_hash(c).size() == 64);

  auto j = corpus_to_json(c);
  j["schema_version"] = 2;
  CHECK_THROWS_AS(corpus_from_json(j), SchemaMismatch);

  TableContext t = c.table("Disney_XD_series_0");
  CHECK(table_from_json(to_json(t)) == t);
}

TEST_CASE("loader errors name the missing or malformed input") {
  fs::path empty = test::scratch_dir("empty_release");
  CHECK_THROWS_AS(load_hybridqa(empty, Split::dev), MissingFile);
  CHECK_THROWS_AS(load_multimodalqa(empty, Split::dev, false), MissingFile);

  fs::path bad = test::scratch_dir("bad_release");
  write(bad / "released_data" / "dev.json", R"j([{"question_id":"x","question":"q"}])j");
  try {
    load_hybridqa(bad, Split::dev);
    FAIL("expected SchemaMismatch");
  } catch (const SchemaMismatch& e) {
    CHECK(std::string(e.what()).find("table_id") != std::string::npos);
  }
  write(bad / "released_data" / "dev.json", "{not json");
  CHECK_THROWS_AS(load_hybridqa(bad, Split::dev), SchemaMismatch);
  CHECK_THROWS_AS(load_corpus_cache(bad / "absent.json"), MissingFile);
}

TEST_CASE("MultiModalQA release loads passages, images and gold documents") {
  fs::path root = mmqa_release("mmqa_ok");
  Corpus c = load_multimodalqa(root, Split::dev, false);
  CHECK(c.source == SourceSplit::multimodalqa);
  REQUIRE(c.instances.size() == 2);
  CHECK(c.tables.size() == 1);
  CHECK(c.find_document("p9") == nullptr);

  const QAInstance& m1 = c.instances[0];
  CHECK(m1.gold_answers == std::vector<std::string>{"Arrow"});
  CHECK(m1.gold_docs == std::vector<DocRef>{{"p1", DocKind::passage}});
  CHECK(m1.candidate_docs == std::vector<DocRef>{{"i1", DocKind::image}, {"p1", DocKind::passage}});
  CHECK(c.instances[1].gold_answers == std::vector<std::string>{"2"});

  const Document* img = c.find_document("i1");
  REQUIRE(img);
  CHECK(img->kind == DocKind::image);
  CHECK(img->media_type == "image/png");
  CHECK(read_image_payload(*img).size() == 12);

  const TableContext& t = c.table("T1");
  CHECK(t.rows[0][0].links == std::vector<DocRef>{{"p1", DocKind::passage}});
  CHECK(t.rows[1][0].links == std::vector<DocRef>{{"i1", DocKind::image}});

  Corpus oracle = load_multimodalqa(root, Split::dev, true);
  CHECK(retrievable_documents(oracle, oracle.instances[0]) == oracle.instances[0].gold_docs);
  CHECK(retrievable_documents(c, c.instances[0]) == c.instances[0].candidate_docs);
}

TEST_CASE("MultiModalQA image that does not decode is rejected") {
  fs::path root = mmqa_release("mmqa_bad_png", false);
  CHECK_THROWS_AS(load_multimodalqa(root, Split::dev, false), ImageDecodeError);
}
