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

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <gmock/gmock.h>
#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "cli.h"
#include "e2e.h"
#include "lexsum/version.h"
#include "test_util.h"

namespace lexsum::testing {
namespace {

namespace fs = std::filesystem;
using ::testing::HasSubstr;
using nlohmann::json;

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

// A loopback port with nothing listening on it.
int closed_port() {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = 0;
  ::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr));
  socklen_t len = sizeof(addr);
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  ::close(fd);
  return ntohs(addr.sin_port);
}

// Output content with the run metadata removed, for comparing runs whose
// configuration differs on purpose.
std::string strip_meta(const std::string& name, const std::string& content) {
  const auto ext = fs::path(name).extension();
  if (ext == ".jsonl" || ext == ".csv") return content.substr(content.find('\n') + 1);
  json j = json::parse(content);
  j.erase("meta");
  if (j.contains("metadata")) j["metadata"].erase("run");
  return j.dump(2);
}

class CliTest : public ::testing::Test {
 protected:
  CliTest() : dir_("cli"), cwd_(dir_.path()) { ::unsetenv("CLSUM_SCORER_URL"); }

  // Runs with stderr captured into err_.
  int run(std::vector<std::string> args) {
    args.insert(args.begin(), "lexsum");
    ::testing::internal::CaptureStderr();
    ::testing::internal::CaptureStdout();
    const int code = cli::run(args);
    out_ = ::testing::internal::GetCapturedStdout();
    err_ = ::testing::internal::GetCapturedStderr();
    return code;
  }

  void write_pairs() {
    write_file("pairs.jsonl",
               R"({"id":"a","prediction":"The appeal is allowed.","summary":"The appeal is allowed with costs."})"
               "\n");
  }

  TempDir dir_;
  ScopedCwd cwd_;
  std::string out_, err_;
};

TEST_F(CliTest, UnknownFlagIsAUsageError) {
  write_file("c.jsonl", "");
  EXPECT_EQ(run({"stats", "--in", "c.jsonl", "--out", "r.json", "--bogus"}), cli::kExitUsage);
  EXPECT_THAT(err_, HasSubstr("--bogus"));
  EXPECT_THAT(err_, HasSubstr("Usage:"));
  EXPECT_FALSE(fs::exists("r.json"));
}

TEST_F(CliTest, MissingSubcommandIsAUsageError) {
  EXPECT_EQ(run({}), cli::kExitUsage);
  EXPECT_EQ(run({"summarize"}), cli::kExitUsage);
}

TEST_F(CliTest, HelpAndVersionSucceed) {
  EXPECT_EQ(run({"--help"}), cli::kExitOk);
  EXPECT_THAT(out_, HasSubstr("evaluate"));
  EXPECT_EQ(run({"--version"}), cli::kExitOk);
  EXPECT_THAT(out_, HasSubstr(std::string(kVersion)));
}

TEST_F(CliTest, MissingInputIsAUsageError) {
  EXPECT_EQ(run({"stats", "--in", "absent.jsonl", "--out", "r.json"}), cli::kExitUsage);
  EXPECT_FALSE(fs::exists("r.json"));
}

TEST_F(CliTest, UnreadableCorpusIsADataError) {
  write_file("bad.jsonl", "{not json\n");
  EXPECT_EQ(run({"stats", "--in", "bad.jsonl", "--out", "r.json"}), cli::kExitData);
  EXPECT_FALSE(fs::exists("r.json"));
}

TEST_F(CliTest, FullyRejectedCorpusStillWritesRejects) {
  write_file("tiny.jsonl", R"({"id":"x","document":"The appeal is allowed.","summary":"Allowed."})"
                           "\n");
  EXPECT_EQ(run({"ingest", "--in", "tiny.jsonl", "--out", "c.jsonl", "--rejects", "r.jsonl"}),
            cli::kExitData);
  EXPECT_FALSE(fs::exists("c.jsonl"));
  EXPECT_THAT(read_file("r.jsonl"), HasSubstr("\"id\":\"x\""));
}

TEST_F(CliTest, UnreachableScorerIsATransportError) {
  write_pairs();
  const std::string url = "http://127.0.0.1:" + std::to_string(closed_port());
  EXPECT_EQ(run({"evaluate", "--in", "pairs.jsonl", "--out", "r.json", "--scorer", url,
                 "--retries", "0", "--timeout", "2"}),
            cli::kExitTransport);
  EXPECT_THAT(err_, HasSubstr("a:"));
}

TEST_F(CliTest, EvaluateNeedsAScorerUnlessLogProbsAreOff) {
  write_pairs();
  EXPECT_EQ(run({"evaluate", "--in", "pairs.jsonl", "--out", "r.json"}), cli::kExitUsage);
  EXPECT_THAT(err_, HasSubstr("CLSUM_SCORER_URL"));
  EXPECT_EQ(run({"evaluate", "--in", "pairs.jsonl", "--out", "r.json", "--no-ltscore"}),
            cli::kExitOk);
  const json report = json::parse(read_file("r.json"));
  EXPECT_NEAR(report["samples"][0]["values"]["R1"].get<double>(), 100.0 * 2 * 4 / 10, 1e-9);
}

TEST_F(CliTest, ScorerEndpointFromEnvironment) {
  write_pairs();
  write_file("s.json", R"({"logprobs_default":{"mode":"constant","value":-2.0}})");
  ::setenv("CLSUM_SCORER_URL", "scripted:s.json", 1);
  EXPECT_EQ(run({"evaluate", "--in", "pairs.jsonl", "--out", "r.json"}), cli::kExitOk);
  ::unsetenv("CLSUM_SCORER_URL");
  const json report = json::parse(read_file("r.json"));
  EXPECT_DOUBLE_EQ(report["samples"][0]["values"]["LTScore_F1"].get<double>(), -2.0);
}

TEST_F(CliTest, InvalidWeightsAreAUsageError) {
  write_pairs();
  write_file("s.json", "{}");
  EXPECT_EQ(run({"evaluate", "--in", "pairs.jsonl", "--out", "r.json", "--scorer",
                 "scripted:s.json", "--scorer", "scripted:s.json", "--weights", "0.5", "0.6"}),
            cli::kExitUsage);
  EXPECT_EQ(run({"evaluate", "--in", "pairs.jsonl", "--out", "r.json", "--scorer",
                 "scripted:s.json", "--weights", "0.5", "0.5"}),
            cli::kExitUsage);
  EXPECT_FALSE(fs::exists("r.json"));
}

TEST_F(CliTest, KappaPrintsToStdoutWithoutOut) {
  write_file("ratings.csv", "yes,yes,yes\nno,no,no\nyes,yes,yes\n");
  EXPECT_EQ(run({"kappa", "--in", "ratings.csv"}), cli::kExitOk);
  EXPECT_DOUBLE_EQ(json::parse(out_)["kappa"].get<double>(), 1.0);
}

TEST_F(CliTest, ConfigFileFeedsTheSubcommandAndFlagsWin) {
  ASSERT_EQ(run_e2e(fs::current_path(), "1").size(), e2e_commands("1").size());
  write_file("select.ini",
             "[select]\nin=corpus.jsonl\nout=cfg.jsonl\nmethod=lead\nbudget=30\n");
  ASSERT_EQ(run({"--config", "select.ini", "select"}), cli::kExitOk) << err_;
  ASSERT_EQ(run({"--config", "select.ini", "select", "--budget", "60", "--out", "flag.jsonl"}),
            cli::kExitOk)
      << err_;
  ASSERT_EQ(run({"select", "--in", "corpus.jsonl", "--out", "plain.jsonl", "--method", "lead",
                 "--budget", "30"}),
            cli::kExitOk);
  const std::string cfg = read_file("cfg.jsonl");
  EXPECT_EQ(strip_meta("cfg.jsonl", cfg), strip_meta("plain.jsonl", read_file("plain.jsonl")));
  EXPECT_THAT(cfg.substr(0, cfg.find('\n')), HasSubstr(R"("budget":"30")"));
  const std::string flag = read_file("flag.jsonl");
  EXPECT_THAT(flag.substr(0, flag.find('\n')), HasSubstr(R"("budget":"60")"));
  // Budget 60 under lead is what the end-to-end run selected for lead subsets.
  EXPECT_EQ(strip_meta("flag.jsonl", flag),
            strip_meta("selected.jsonl", read_file("selected.jsonl")));
}

class EndToEndTest : public ::testing::Test {
 protected:
  TempDir first_{"e2e"};
};

TEST_F(EndToEndTest, ReproducesGoldenReports) {
  const auto start = std::chrono::steady_clock::now();
  const std::vector<int> codes = run_e2e(first_.path(), "2");
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  ASSERT_EQ(codes, std::vector<int>(e2e_commands("2").size(), cli::kExitOk));
  EXPECT_LT(seconds, 120.0);

  const fs::path golden_dir = data_path("e2e/golden");
  const bool update = std::getenv("LEXSUM_UPDATE_GOLDEN") != nullptr;
  if (update) fs::create_directories(golden_dir);
  for (const auto& name : e2e_outputs()) {
    const std::string actual = read_file(first_.path() / name);
    ASSERT_FALSE(actual.empty()) << name;
    if (update) {
      write_file(golden_dir / name, actual);
      continue;
    }
    ASSERT_TRUE(fs::exists(golden_dir / name)) << name;
    EXPECT_EQ(actual, read_file(golden_dir / name)) << name << " differs from its golden copy";
  }
}

TEST_F(EndToEndTest, RerunIsByteIdentical) {
  TempDir second("e2e");
  ASSERT_EQ(run_e2e(first_.path(), "3").back(), cli::kExitOk);
  ASSERT_EQ(run_e2e(second.path(), "3").back(), cli::kExitOk);
  for (const auto& name : e2e_outputs()) {
    EXPECT_EQ(read_file(first_.path() / name), read_file(second.path() / name)) << name;
  }
}

TEST_F(EndToEndTest, ThreadCountChangesOnlyTheMetadata) {
  TempDir second("e2e");
  ASSERT_EQ(run_e2e(first_.path(), "1").back(), cli::kExitOk);
  ASSERT_EQ(run_e2e(second.path(), "4").back(), cli::kExitOk);
  for (const auto& name : e2e_outputs()) {
    const std::string a = read_file(first_.path() / name);
    const std::string b = read_file(second.path() / name);
    EXPECT_NE(a, b) << name << " should record the thread count";
    EXPECT_EQ(strip_meta(name, a), strip_meta(name, b)) << name;
  }
}

TEST_F(EndToEndTest, EveryOutputEmbedsItsConfiguration) {
  ASSERT_EQ(run_e2e(first_.path(), "1").back(), cli::kExitOk);
  for (const auto& name : e2e_outputs()) {
    const std::string content = read_file(first_.path() / name);
    json meta;
    if (fs::path(name).extension() == ".json") {
      meta = json::parse(content).at("meta");
    } else if (fs::path(name).extension() == ".jsonl") {
      meta = json::parse(content.substr(0, content.find('\n'))).at("meta");
    } else {
      ASSERT_EQ(content.rfind("# ", 0), 0u) << name;
      meta = json::parse(content.substr(2, content.find('\n') - 2));
    }
    EXPECT_EQ(meta.at("tool"), "lexsum") << name;
    EXPECT_EQ(meta.at("version"), std::string(kVersion)) << name;
    EXPECT_EQ(meta.at("config").at("jobs"), "1") << name;
    EXPECT_TRUE(meta.at("config").contains("in")) << name;
  }
  for (const auto& entry : fs::directory_iterator(first_.path())) {
    EXPECT_EQ(entry.path().string().find(".tmp."), std::string::npos) << entry.path();
  }
}

TEST_F(EndToEndTest, IngestRejectsTheDuplicateAndTheEmptyRecord) {
  ASSERT_EQ(run_e2e(first_.path(), "1").back(), cli::kExitOk);
  const std::string corpus = read_file(first_.path() / "corpus.jsonl");
  EXPECT_EQ(std::count(corpus.begin(), corpus.end(), '\n'), 21);  // meta + 20 samples
  const std::string rejects = read_file(first_.path() / "rejects.jsonl");
  EXPECT_THAT(rejects, HasSubstr(R"(duplicate id \"e2e-03\")"));
  EXPECT_THAT(rejects, HasSubstr("input.jsonl:22"));
}

}  // namespace
}  // namespace lexsum::testing
