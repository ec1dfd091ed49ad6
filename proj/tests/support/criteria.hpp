#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace hypro::test {

struct CriterionResult {
  enum Status { pass, fail, skip };
  Status status = fail;
  std::string detail;

  static CriterionResult ok(std::string d) { return {pass, std::move(d)}; }
  static CriterionResult bad(std::string d) { return {fail, std::move(d)}; }
  static CriterionResult skipped(std::string d) { return {skip, std::move(d)}; }
};

std::filesystem::path fixtures_dir();

/// The valid programs in fixtures/programs.txt.
std::vector<std::string> fixture_programs();

/// Random bytes, token soup and mutated fixtures.
std::string fuzz_input(std::uint64_t seed);

CriterionResult check_replay();
CriterionResult check_differential(std::size_t programs, std::uint64_t seed);
CriterionResult check_parser_totality(std::size_t inputs, std::uint64_t seed);
CriterionResult check_metric_fixtures();
CriterionResult check_retrieval_oracles();
CriterionResult check_refinement_law();
CriterionResult check_ablations();
CriterionResult check_fast_path(std::size_t pairs, std::uint64_t seed);
CriterionResult check_dataset_counts();
CriterionResult check_live();

/// Twenty short passages as (doc_id, text).
std::vector<std::pair<std::string, std::string>> retrieval_fixture();

/// Fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& tag);

}  // namespace hypro::test
