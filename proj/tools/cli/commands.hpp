#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "hypro/llm_client.hpp"

namespace hypro::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitProblems = 1;
inline constexpr int kExitUsage = 2;

struct DatasetArgs {
  std::string dataset = "hybridqa";
  std::string split = "dev";
  std::filesystem::path data_root;
  bool oracle = false;
};

struct RunArgs {
  DatasetArgs data;
  std::optional<std::string> mode;
  std::filesystem::path cache;
  std::optional<std::size_t> limit;
  std::optional<int> shots;
  bool no_check = false;
  bool no_simplify = false;
  bool no_refine = false;
  std::optional<std::size_t> workers;
  std::filesystem::path config;
  std::filesystem::path templates;
  std::filesystem::path out = "hypro_out";
  bool quiet = false;
  bool no_timing = false;
};

struct EvalArgs {
  DatasetArgs data;
  std::filesystem::path predictions;
  std::filesystem::path out;  // report directory; defaults to the predictions directory
  std::optional<std::size_t> limit;
};

struct TraceArgs {
  std::filesystem::path predictions;
  std::string question_id;
};

/// `transport` replaces the HTTP client, for tests.
int cmd_run(const RunArgs& args, std::ostream& out, std::ostream& err,
            std::shared_ptr<HttpTransport> transport = nullptr, std::size_t* network_calls = nullptr);
int cmd_eval(const EvalArgs& args, std::ostream& out, std::ostream& err);
int cmd_trace(const TraceArgs& args, std::ostream& out, std::ostream& err);
int cmd_cache_verify(const std::filesystem::path& cache, std::ostream& out, std::ostream& err);

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hypro::cli
