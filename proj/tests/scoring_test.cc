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


#include "lexsum/scoring.h"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <thread>

#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include "httplib.h"
#include "lexsum/error.h"
#include "lexsum/parallel.h"
#include "test_util.h"

namespace lexsum {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using ::testing::ElementsAre;
using ::testing::HasSubstr;

ScorerHandle handle(const std::string& endpoint, std::size_t retries = 0) {
  ScorerHandle h;
  h.endpoint = endpoint;
  h.model_id = "m";
  h.timeout_seconds = 5.0;
  h.max_retries = retries;
  h.initial_backoff_seconds = 0.0;
  return h;
}

// ---------------------------------------------------------------------------
// Wire format

TEST(WireFormatTest, RequestBodies) {
  EXPECT_EQ(logprobs_request("led", "t", "c"),
            json({{"model_id", "led"}, {"target", "t"}, {"conditioning", "c"}}));
  EXPECT_EQ(generate_request("v", "p", 12),
            json({{"model_id", "v"}, {"prompt", "p"}, {"max_new_tokens", 12}}));
}

TEST(WireFormatTest, CodePointOffsetsBecomeByteSpans) {
  // "Café law": é is two bytes, so code point 4 is byte 5.
  const std::string target = "Caf\xC3\xA9 law";
  const json body = {{"tokens", {"Caf", "\xC3\xA9", " law"}},
                     {"logprobs", {-0.1, -0.2, -0.3}},
                     {"offsets", {{0, 3}, {3, 4}, {4, 8}}}};
  const RawLogProbs r = parse_logprobs_response(body, target);
  ASSERT_EQ(r.offsets.size(), 3u);
  EXPECT_EQ(r.offsets[1].begin, 3u);
  EXPECT_EQ(r.offsets[1].end, 5u);
  EXPECT_EQ(r.offsets[2].begin, 5u);
  EXPECT_EQ(r.offsets[2].end, 9u);
  EXPECT_THAT(r.logprobs, ElementsAre(-0.1, -0.2, -0.3));
}

TEST(WireFormatTest, MalformedLogprobResponses) {
  const std::string target = "a b";
  const auto bad = [&](json body) {
    EXPECT_THROW(parse_logprobs_response(body, target), ProtocolError) << body.dump();
  };
  bad(json::array());
  bad({{"tokens", {"a"}}, {"logprobs", {-1.0}}});
  bad({{"tokens", {"a", "b"}}, {"logprobs", {-1.0}}, {"offsets", {{0, 1}, {2, 3}}}});
  bad({{"tokens", {"a"}}, {"logprobs", {"x"}}, {"offsets", {{0, 1}}}});
  bad({{"tokens", {"a"}}, {"logprobs", {std::numeric_limits<double>::quiet_NaN()}},
       {"offsets", {{0, 1}}}});
  bad({{"tokens", {"a"}}, {"logprobs", {-1.0}}, {"offsets", {{0, 4}}}});       // past the end
  bad({{"tokens", {"a"}}, {"logprobs", {-1.0}}, {"offsets", {{1, 0}}}});       // reversed
  bad({{"tokens", {"a"}}, {"logprobs", {-1.0}}, {"offsets", {{-1, 1}}}});      // negative
  bad({{"tokens", {"a", "b"}}, {"logprobs", {-1.0, -1.0}}, {"offsets", {{0, 2}, {1, 3}}}});
  EXPECT_THROW(parse_generate_response({{"txt", "x"}}), ProtocolError);
  EXPECT_THROW(parse_health_response(json::object()), ProtocolError);
  EXPECT_EQ(parse_generate_response({{"text", "ok"}}), "ok");
  const HealthStatus h = parse_health_response({{"status", "ok"}, {"model_id", "led"}});
  EXPECT_EQ(h.status, "ok");
  EXPECT_EQ(h.model_id, "led");
}

// ---------------------------------------------------------------------------
// Alignment

TEST(AlignOffsetsTest, SubwordsWhitespaceAndTrailingPieces) {
  const TokenizedText w = tokenize("Estoppel applies.");
  // Words: estoppel [0,8), applies [9,16), . [16,17)
  const std::vector<CharSpan> pieces = {{0, 5}, {5, 8}, {8, 9}, {9, 16}, {16, 17}};
  EXPECT_THAT(align_offsets(w, pieces), ElementsAre(0u, 0u, 1u, 1u, 2u));
  const std::vector<CharSpan> trailing = {{0, 17}, {17, 17}};
  EXPECT_THAT(align_offsets(w, trailing), ElementsAre(0u, 2u));
}

TEST(AlignOffsetsTest, RejectsBackwardsAndOutOfRange) {
  const TokenizedText w = tokenize("a b c");
  const std::vector<CharSpan> back = {{2, 3}, {0, 1}};
  EXPECT_THROW(align_offsets(w, back), AlignmentError);
  const std::vector<CharSpan> far = {{0, 9}};
  EXPECT_THROW(align_offsets(w, far), AlignmentError);
  const std::vector<CharSpan> one = {{0, 1}};
  EXPECT_THROW(align_offsets(tokenize("   "), one), AlignmentError);
}

TEST(AlignOffsetsTest, TotalAndMonotoneOnRandomPartitions) {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<std::size_t> cut(1, 6);
  for (int t = 0; t < 500; ++t) {
    const TokenizedText w = tokenize(testing::random_prose(rng, 5 + t % 60));
    if (w.token_count() == 0) continue;
    std::vector<CharSpan> pieces;
    for (std::size_t b = 0; b < w.raw.size();) {
      const std::size_t e = std::min(w.raw.size(), b + cut(rng));
      pieces.push_back({b, e});
      b = e;
    }
    const auto a = align_offsets(w, pieces);
    ASSERT_EQ(a.size(), pieces.size());
    EXPECT_TRUE(std::is_sorted(a.begin(), a.end()));
    for (std::size_t k = 0; k < a.size(); ++k) {
      ASSERT_LT(a[k], w.token_count());
      // A piece starting inside a word maps to that word.
      const auto& o = w.offsets[a[k]];
      if (pieces[k].begin >= o.begin && pieces[k].begin < o.end) continue;
      EXPECT_TRUE(pieces[k].begin < o.begin || a[k] + 1 == w.token_count()) << k;
    }
  }
}

// ---------------------------------------------------------------------------
// Scripted backend

TEST(ScriptedBackendTest, FixtureIsReturnedExactly) {
  const json fixture = {
      {"model_id", "fixture-led"},
      {"logprobs",
       {{{"target", "The lease is void."},
         {"conditioning", "ref"},
         {"tokens", {"The", " lease", " is", " void", "."}},
         {"logprobs", {-0.25, -1.5, -0.75, -2.0, -0.125}},
         {"offsets", {{0, 3}, {3, 9}, {9, 12}, {12, 17}, {17, 18}}}}}}};
  ScorerClient c(handle("scripted:inline"), ScriptedBackend::from_json(fixture));
  const LogProbResponse r = c.token_logprobs("The lease is void.", "ref");
  EXPECT_THAT(r.tokens, ElementsAre("The", " lease", " is", " void", "."));
  EXPECT_THAT(r.logprobs, ElementsAre(-0.25, -1.5, -0.75, -2.0, -0.125));
  EXPECT_THAT(r.alignment, ElementsAre(0u, 1u, 2u, 3u, 4u));
  EXPECT_EQ(c.health().model_id, "fixture-led");
  // Other pairs fall through to the default rule.
  const LogProbResponse d = c.token_logprobs("The lease is void.", "other");
  EXPECT_THAT(d.logprobs, ElementsAre(-1.0, -1.0, -1.0, -1.0, -1.0));
}

TEST(ScriptedBackendTest, FixtureFileAndEndpointScheme) {
  const fs::path p = fs::temp_directory_path() / "lexsum-scoring-fixture.json";
  {
    std::ofstream out(p);
    out << json({{"logprobs_default", {{"mode", "overlap"}, {"hit", -0.1}, {"miss", -9.0}}},
                 {"generate_default", {{"mode", "echo_suffix"}, {"marker", "Sentence:"}}},
                 {"generate", {{{"prompt", "twice"}, {"responses", {"first", "second"}}},
                               {{"prompt", "down"}, {"fail", true}}}}})
               .dump();
  }
  const ScorerClient c = make_scorer(handle("scripted:" + p.string()));
  EXPECT_THAT(c.token_logprobs("a z", "a b").logprobs, ElementsAre(-0.1, -9.0));
  EXPECT_EQ(c.generate("Translate.\nSentence:  Hello there. ", 8), "Hello there.");
  EXPECT_EQ(c.generate("no marker here", 8), "no marker here");
  EXPECT_EQ(c.generate("twice", 8), "first");
  EXPECT_EQ(c.generate("twice", 8), "second");
  EXPECT_EQ(c.generate("twice", 8), "second");
  EXPECT_THROW(c.generate("down", 8), TransportError);
  fs::remove(p);
  EXPECT_THROW(make_scorer(handle("scripted:/nonexistent.json")), IoError);
  EXPECT_THROW(ScriptedBackend::from_json({{"logprobs_default", {{"mode", "bogus"}}}}),
               InvalidParameterError);
}

TEST(ScriptedBackendTest, EchoAndInvalidGenerateArguments) {
  ScorerClient c(handle("scripted:inline"), std::make_shared<ScriptedBackend>());
  EXPECT_EQ(c.generate("say this", 4), "say this");
  EXPECT_THROW(c.generate("", 4), InvalidParameterError);
  EXPECT_THROW(c.generate("x", 0), InvalidParameterError);
}

TEST(ScriptedBackendTest, ConcurrentCallsAreCounted) {
  auto backend = std::make_shared<ScriptedBackend>();
  ScorerClient c(handle("scripted:inline"), backend);
  const auto out = parallel_map<double>(200, 8, [&](std::size_t i) {
    return c.token_logprobs("word " + std::to_string(i), "ctx").logprobs.front();
  });
  EXPECT_EQ(out.size(), 200u);
  EXPECT_EQ(backend->logprob_calls(), 200u);
}

// ---------------------------------------------------------------------------
// Retries

class FlakyBackend : public ScorerBackend {
 public:
  explicit FlakyBackend(std::size_t failures, bool protocol = false)
      : failures_(failures), protocol_(protocol) {}
  RawLogProbs logprobs(const std::string&, const std::string& target, const std::string&,
                       double) override {
    fail();
    return {{target}, {-1.0}, {{0, target.size()}}};
  }
  std::string generate(const std::string&, const std::string& prompt, std::size_t,
                       double) override {
    fail();
    return prompt;
  }
  HealthStatus health(double) override {
    fail();
    return {"ok", "flaky"};
  }
  std::size_t calls() const { return calls_; }

 private:
  void fail() {
    if (calls_++ < failures_) {
      if (protocol_) throw ProtocolError("garbled");
      throw TransportError("connection reset", 1);
    }
  }
  std::size_t failures_;
  bool protocol_;
  std::atomic<std::size_t> calls_{0};
};

TEST(RetryTest, RecoversWithinBudget) {
  auto b = std::make_shared<FlakyBackend>(2);
  ScorerClient c(handle("scripted:x", 2), b);
  EXPECT_EQ(c.generate("p", 1), "p");
  EXPECT_EQ(b->calls(), 3u);
}

TEST(RetryTest, GivesUpAfterOnePlusMaxRetries) {
  for (std::size_t retries : {0u, 1u, 3u}) {
    auto b = std::make_shared<FlakyBackend>(100);
    ScorerClient c(handle("scripted:x", retries), b);
    try {
      c.token_logprobs("a", "b");
      FAIL();
    } catch (const TransportError& e) {
      EXPECT_EQ(e.attempts(), retries + 1);
      EXPECT_THAT(e.what(), HasSubstr("after " + std::to_string(retries + 1) + " attempt"));
    }
    EXPECT_EQ(b->calls(), retries + 1);
  }
}

TEST(RetryTest, ProtocolErrorsAreNotRetried) {
  auto b = std::make_shared<FlakyBackend>(100, true);
  ScorerClient c(handle("scripted:x", 3), b);
  EXPECT_THROW(c.health(), ProtocolError);
  EXPECT_EQ(b->calls(), 1u);
}

TEST(RetryTest, BackoffDoubles) {
  auto b = std::make_shared<FlakyBackend>(100);
  ScorerHandle h = handle("scripted:x", 2);
  h.initial_backoff_seconds = 0.05;  // waits 0.05 then 0.1
  ScorerClient c(h, b);
  const auto t0 = std::chrono::steady_clock::now();
  EXPECT_THROW(c.generate("p", 1), TransportError);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_GE(secs, 0.15);
  EXPECT_LT(secs, 2.0);
}

TEST(HandleTest, Validation) {
  ScorerHandle h = handle("scripted:x");
  h.timeout_seconds = 0;
  EXPECT_THROW(h.validate(), InvalidParameterError);
  EXPECT_THROW(make_scorer(handle("")), InvalidParameterError);
  EXPECT_THROW(make_scorer(handle("ftp://x")), InvalidParameterError);
  EXPECT_THROW(make_scorer(handle("exec:")), InvalidParameterError);
  EXPECT_THROW(ScorerClient(handle("scripted:x"), nullptr), InvalidParameterError);
}

// ---------------------------------------------------------------------------
// HTTP transport against an in-process server

class WireServer {
 public:
  WireServer() {
    for (const std::string prefix : {"", "/scorer"}) {
      server_.Post(prefix + "/v1/logprobs", [this](const httplib::Request& req,
                                                   httplib::Response& res) {
        ++logprob_requests_;
        last_request_ = json::parse(req.body);
        if (fail_next_ > 0) {
          --fail_next_;
          res.status = fail_status_;
          res.set_content(R"({"error":"busy"})", "application/json");
          return;
        }
        if (delay_ms_ > 0) std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms_));
        res.set_content(logprobs_for(last_request_.at("target").get<std::string>()).dump(),
                        "application/json");
      });
      server_.Post(prefix + "/v1/generate", [this](const httplib::Request& req,
                                                   httplib::Response& res) {
        const json r = json::parse(req.body);
        res.set_content(json({{"text", "echo: " + r.at("prompt").get<std::string>()}}).dump(),
                        "application/json");
      });
      server_.Get(prefix + "/v1/health", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"status":"ok","model_id":"wire-model"})", "application/json");
      });
    }
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~WireServer() {
    server_.stop();
    thread_.join();
  }

  std::string url(const std::string& prefix = "") const {
    return "http://127.0.0.1:" + std::to_string(port_) + prefix;
  }

  // Whitespace-split tokens with code point offsets, each token carrying its
  // leading space, log-prob -(k + 1) / 10.
  static json logprobs_for(const std::string& target) {
    json tokens = json::array(), lps = json::array(), offsets = json::array();
    std::size_t cp = 0, start = 0;
    std::string piece;
    const auto flush = [&] {
      if (piece.empty()) return;
      tokens.push_back(piece);
      lps.push_back(-0.1 * static_cast<double>(tokens.size()));
      offsets.push_back({start, cp});
      piece.clear();
    };
    for (std::size_t i = 0; i < target.size(); ++i) {
      const unsigned char ch = static_cast<unsigned char>(target[i]);
      const bool lead = (ch & 0xC0) != 0x80;
      if (lead && ch == ' ' && !piece.empty() && piece.back() != ' ') {
        flush();
        start = cp;
      }
      piece += target[i];
      if (lead) ++cp;
      // Count a completed code point once its continuation bytes are in.
    }
    flush();
    return {{"tokens", tokens}, {"logprobs", lps}, {"offsets", offsets}};
  }

  std::atomic<int> fail_next_{0};
  int fail_status_ = 503;
  int delay_ms_ = 0;
  std::atomic<int> logprob_requests_{0};
  json last_request_;

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

TEST(HttpBackendTest, LogprobsGenerateHealth) {
  WireServer s;
  for (const std::string prefix : {"", "/scorer"}) {
    const ScorerClient c = make_scorer(handle(s.url(prefix)));
    const std::string target = "Caf\xC3\xA9 law applies";
    const LogProbResponse r = c.token_logprobs(target, "cond");
    EXPECT_EQ(s.last_request_, json({{"model_id", "m"}, {"target", target},
                                     {"conditioning", "cond"}}));
    EXPECT_THAT(r.tokens, ElementsAre("Caf\xC3\xA9", " law", " applies"));
    EXPECT_THAT(r.logprobs, ElementsAre(-0.1, -0.2, -0.30000000000000004));
    EXPECT_EQ(r.offsets[0].end, 5u);  // bytes, after the client conversion
    EXPECT_EQ(r.offsets[1].begin, 5u);
    EXPECT_THAT(r.alignment, ElementsAre(0u, 1u, 2u));
    EXPECT_EQ(c.generate("hi", 4), "echo: hi");
    const HealthStatus h = c.health();
    EXPECT_EQ(h.status, "ok");
    EXPECT_EQ(h.model_id, "wire-model");
  }
}

TEST(HttpBackendTest, ServerErrorsAreRetriedClientErrorsAreNot) {
  WireServer s;
  s.fail_next_ = 2;
  const ScorerClient c = make_scorer(handle(s.url(), 2));
  EXPECT_NO_THROW(c.token_logprobs("a b", "c"));
  EXPECT_EQ(s.logprob_requests_, 3);

  s.fail_next_ = 1;
  s.fail_status_ = 400;
  s.logprob_requests_ = 0;
  EXPECT_THROW(c.token_logprobs("a b", "c"), ProtocolError);
  EXPECT_EQ(s.logprob_requests_, 1);

  s.fail_next_ = 10;
  s.fail_status_ = 429;
  s.logprob_requests_ = 0;
  try {
    c.token_logprobs("a b", "c");
    FAIL();
  } catch (const TransportError& e) {
    EXPECT_EQ(e.attempts(), 3u);
  }
  EXPECT_EQ(s.logprob_requests_, 3);
}

TEST(HttpBackendTest, SlowServerTimesOut) {
  WireServer s;
  s.delay_ms_ = 600;
  ScorerHandle h = handle(s.url(), 0);
  h.timeout_seconds = 0.2;
  EXPECT_THROW(make_scorer(h).token_logprobs("a", "b"), TransportError);
}

TEST(HttpBackendTest, UnreachableEndpointFailsAfterAllAttempts) {
  // Bind a port without listening, then release it.
  int port = 0;
  {
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    ASSERT_GE(fd, 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    ASSERT_EQ(::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr), 0);
    socklen_t len = sizeof addr;
    ASSERT_EQ(::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len), 0);
    port = ntohs(addr.sin_port);
    ::close(fd);
  }
  const ScorerClient c = make_scorer(handle("http://127.0.0.1:" + std::to_string(port), 2));
  try {
    c.token_logprobs("a", "b");
    FAIL();
  } catch (const TransportError& e) {
    EXPECT_EQ(e.attempts(), 3u);
  }
}

// ---------------------------------------------------------------------------
// Exec transport

class ScriptFile {
 public:
  explicit ScriptFile(const std::string& body) {
    path_ = fs::temp_directory_path() /
            ("lexsum-exec-" + std::to_string(counter_++) + "-" + std::to_string(::getpid()) + ".sh");
    std::ofstream(path_) << "#!/bin/sh\n" << body << "\n";
    fs::permissions(path_, fs::perms::owner_all);
  }
  ~ScriptFile() { fs::remove(path_); }
  std::string endpoint() const { return "exec:" + path_.string(); }

 private:
  static inline int counter_ = 0;
  fs::path path_;
};

TEST(ExecBackendTest, RequestOnStdinAnswerOnStdout) {
  const fs::path seen = fs::temp_directory_path() / "lexsum-exec-request.json";
  ScriptFile script("cat > " + seen.string() + R"(; echo '{"text":"done"}')");
  const ScorerClient c = make_scorer(handle(script.endpoint()));
  EXPECT_EQ(c.generate("hello", 3), "done");
  std::ifstream in(seen);
  const json sent = json::parse(in);
  EXPECT_EQ(sent, json({{"op", "generate"}, {"model_id", "m"}, {"prompt", "hello"},
                        {"max_new_tokens", 3}}));
  fs::remove(seen);
}

TEST(ExecBackendTest, LogprobsWithFixedAnswer) {
  ScriptFile script(
      R"(cat >/dev/null; echo '{"tokens":["a"," b"],"logprobs":[-1,-2],"offsets":[[0,1],[1,3]]}')");
  const LogProbResponse r = make_scorer(handle(script.endpoint())).token_logprobs("a b", "x");
  EXPECT_THAT(r.logprobs, ElementsAre(-1.0, -2.0));
  EXPECT_THAT(r.alignment, ElementsAre(0u, 1u));
}

TEST(ExecBackendTest, FailuresMapToErrorKinds) {
  ScriptFile crash("cat >/dev/null; exit 3");
  EXPECT_THROW(make_scorer(handle(crash.endpoint(), 1)).health(), TransportError);
  ScriptFile error(R"(cat >/dev/null; echo '{"error":"context overflow: 4096 tokens"}')");
  try {
    make_scorer(handle(error.endpoint())).health();
    FAIL();
  } catch (const ProtocolError& e) {
    EXPECT_THAT(e.what(), HasSubstr("context overflow"));
  }
  ScriptFile garbage("cat >/dev/null; echo not json");
  EXPECT_THROW(make_scorer(handle(garbage.endpoint())).health(), ProtocolError);
  ScriptFile slow("sleep 5");
  ScorerHandle h = handle(slow.endpoint());
  h.timeout_seconds = 1;
  EXPECT_THROW(make_scorer(h).health(), TransportError);
}

}  // namespace
}  // namespace lexsum
