// Copyright 2026 The lexsum Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// The offline end-to-end pipeline over tests/data/e2e, shared by the CLI
// tests and the acceptance binary.

#ifndef LEXSUM_TESTS_E2E_H_
#define LEXSUM_TESTS_E2E_H_

#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <system_error>
#include <vector>

#include "cli.h"
#include "test_util.h"

namespace lexsum::testing {

/// Inputs copied into the working directory before the run.
inline const std::vector<std::string>& e2e_inputs() {
  static const std::vector<std::string> kInputs = {"input.jsonl", "scorer_a.json",
                                                   "scorer_b.json"};
  return kInputs;
}

/// Every file the pipeline writes; each has a golden copy.
inline const std::vector<std::string>& e2e_outputs() {
  static const std::vector<std::string> kOutputs = {
      "corpus.jsonl",   "rejects.jsonl", "stats.json",       "stats.csv",
      "selected.jsonl", "comparison.json", "report.json",    "report.csv",
      "correlation.json", "correlation.csv"};
  return kOutputs;
}

/// ingest, stats, select (auto), evaluate with two scripted scorers, then
/// correlate. Paths are relative so the outputs do not depend on where the
/// run happens.
inline std::vector<std::vector<std::string>> e2e_commands(const std::string& jobs) {
  return {
      {"lexsum", "-j", jobs, "ingest", "--in", "input.jsonl", "--out", "corpus.jsonl",
       "--rejects", "rejects.jsonl", "--min-doc-words", "100", "--min-sum-words", "10"},
      {"lexsum", "-j", jobs, "stats", "--in", "corpus.jsonl", "--out", "stats.json", "--csv",
       "stats.csv"},
      {"lexsum", "-j", jobs, "select", "--in", "corpus.jsonl", "--out", "selected.jsonl",
       "--method", "auto", "--train", "corpus.jsonl", "--budget", "60", "--comparison-out",
       "comparison.json"},
      {"lexsum", "-j", jobs, "evaluate", "--in", "selected.jsonl", "--candidate-field",
       "document", "--reference-field", "summary", "--model", "e2e", "--out", "report.json",
       "--csv", "report.csv", "--scorer", "scripted:scorer_a.json", "--scorer",
       "scripted:scorer_b.json", "--weights", "0.6", "0.4", "--glossary", "glossary.txt",
       "--idf-corpus", "corpus.jsonl"},
      {"lexsum", "-j", jobs, "correlate", "--in", "report.json", "--out", "correlation.json",
       "--csv", "correlation.csv"},
  };
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Switches the working directory for the lifetime of the object.
class ScopedCwd {
 public:
  explicit ScopedCwd(const std::filesystem::path& dir)
      : saved_(std::filesystem::current_path()) {
    std::filesystem::current_path(dir);
  }
  ~ScopedCwd() {
    std::error_code ec;
    std::filesystem::current_path(saved_, ec);
  }
  ScopedCwd(const ScopedCwd&) = delete;
  ScopedCwd& operator=(const ScopedCwd&) = delete;

 private:
  std::filesystem::path saved_;
};

/// A fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("lexsum-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// Copies the fixture into `dir` and runs the pipeline there. Returns the
/// exit code of each command, stopping at the first non-zero one.
inline std::vector<int> run_e2e(const std::filesystem::path& dir, const std::string& jobs) {
  namespace fs = std::filesystem;
  for (const auto& name : e2e_inputs()) {
    fs::copy_file(data_path("e2e/" + name), dir / name, fs::copy_options::overwrite_existing);
  }
  fs::copy_file(core_data_path("glossary.txt"), dir / "glossary.txt",
                fs::copy_options::overwrite_existing);
  ScopedCwd cwd(dir);
  std::vector<int> codes;
  for (const auto& cmd : e2e_commands(jobs)) {
    codes.push_back(cli::run(cmd));
    if (codes.back() != cli::kExitOk) break;
  }
  return codes;
}

}  // namespace lexsum::testing

#endif  // LEXSUM_TESTS_E2E_H_
