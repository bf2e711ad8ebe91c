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

// Client side of the scorer wire protocol.
//
//   POST /v1/logprobs {model_id, target, conditioning}
//        -> {tokens[], logprobs[], offsets[[begin, end], ...]}
//   POST /v1/generate {model_id, prompt, max_new_tokens} -> {text}
//   GET  /v1/health -> {status, model_id}
//
// Offsets on the wire are code point spans into the request's target text;
// the client converts them to byte spans. Endpoints are
// "http://host:port[/prefix]", "exec:<command>" (one request per process,
// JSON on stdin, JSON on stdout) or "scripted:<fixture.json>".

#ifndef LEXSUM_SCORING_H_
#define LEXSUM_SCORING_H_

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lexsum/text.h"

namespace lexsum {

/// Where a scorer lives and how patiently to talk to it.
struct ScorerHandle {
  std::string endpoint;
  std::string model_id;
  double timeout_seconds = 60.0;
  std::size_t max_retries = 3;
  /// First retry delay; doubles on every further retry.
  double initial_backoff_seconds = 0.5;

  /// Throws InvalidParameterError unless timeout > 0 and endpoint is set.
  void validate() const;
};

/// Wire-level log-prob answer before alignment.
struct RawLogProbs {
  std::vector<std::string> tokens;
  std::vector<double> logprobs;
  std::vector<CharSpan> offsets;
};

/// Per-token conditional log-probabilities of a target text.
struct LogProbResponse {
  std::vector<std::string> tokens;
  std::vector<double> logprobs;
  std::vector<CharSpan> offsets;
  /// alignment[k] = index of the word token (tokenize(target)) covering
  /// scorer token k. Total and non-decreasing.
  std::vector<std::size_t> alignment;
  /// Word-token view of the target used for the alignment.
  TokenizedText target_words;
};

struct HealthStatus {
  std::string status;
  std::string model_id;
};

/// One transport attempt. Implementations throw TransportError for failures
/// worth retrying and ProtocolError for malformed answers.
class ScorerBackend {
 public:
  virtual ~ScorerBackend() = default;
  virtual RawLogProbs logprobs(const std::string& model_id, const std::string& target,
                               const std::string& conditioning, double timeout_seconds) = 0;
  virtual std::string generate(const std::string& model_id, const std::string& prompt,
                               std::size_t max_new_tokens, double timeout_seconds) = 0;
  virtual HealthStatus health(double timeout_seconds) = 0;
};

/// Retrying client bound to a handle. Safe to share across threads as long
/// as the backend is.
class ScorerClient {
 public:
  ScorerClient(ScorerHandle handle, std::shared_ptr<ScorerBackend> backend);

  const ScorerHandle& handle() const { return handle_; }
  const std::string& model_id() const { return handle_.model_id; }

  /// Log-probs of `target` given `conditioning`, aligned to word tokens.
  LogProbResponse token_logprobs(const std::string& target,
                                 const std::string& conditioning) const;

  /// Provider completion. Throws InvalidParameterError for an empty prompt or
  /// max_new_tokens == 0.
  std::string generate(const std::string& prompt, std::size_t max_new_tokens) const;

  HealthStatus health() const;

 private:
  template <typename Fn>
  auto with_retries(const char* what, Fn&& fn) const;

  ScorerHandle handle_;
  std::shared_ptr<ScorerBackend> backend_;
};

/// Picks the backend from the endpoint scheme. Validates the handle.
ScorerClient make_scorer(const ScorerHandle& handle);

/// Maps scorer tokens onto the word tokens of `words` by byte offsets. Each
/// scorer token goes to the first word token that ends after its start
/// (whitespace-only pieces attach to the following word, trailing ones to the
/// last word). Throws AlignmentError on out-of-range or out-of-order offsets.
std::vector<std::size_t> align_offsets(const TokenizedText& words,
                                       std::span<const CharSpan> offsets);

// Wire format helpers, shared by every backend and by conformance tests.
nlohmann::json logprobs_request(const std::string& model_id, const std::string& target,
                                const std::string& conditioning);
nlohmann::json generate_request(const std::string& model_id, const std::string& prompt,
                                std::size_t max_new_tokens);
/// Throws ProtocolError unless arrays have equal length, log-probs are finite
/// and offsets are ordered code point spans within `target`. Returned offsets
/// are byte spans.
RawLogProbs parse_logprobs_response(const nlohmann::json& body, const std::string& target);
std::string parse_generate_response(const nlohmann::json& body);
HealthStatus parse_health_response(const nlohmann::json& body);

/// Deterministic in-process scorer for tests and offline runs.
///
/// Exact fixtures are consulted first; otherwise the target is tokenized with
/// text-core and every token gets a value from the default rule. Generation
/// likewise checks scripted prompts (a response list, consumed one call at a
/// time with the last one repeating) before the default rule.
class ScriptedBackend : public ScorerBackend {
 public:
  enum class LogProbMode { kConstant, kOverlap, kFail };
  enum class GenerateMode { kEcho, kEchoSuffix, kFail };

  struct Rules {
    LogProbMode logprob_mode = LogProbMode::kConstant;
    double constant = -1.0;
    double hit = -0.5;   // overlap: token also in the conditioning text
    double miss = -3.0;  // overlap: token absent from it
    GenerateMode generate_mode = GenerateMode::kEcho;
    std::string suffix_marker = "Sentence:";
    std::string model_id = "scripted";
  };

  using LogProbFn = std::function<RawLogProbs(const std::string& target,
                                              const std::string& conditioning)>;
  /// `call` counts earlier calls with the same prompt. Throw TransportError
  /// to simulate a provider failure.
  using GenerateFn = std::function<std::string(const std::string& prompt, std::size_t call)>;

  ScriptedBackend() = default;
  explicit ScriptedBackend(Rules rules) : rules_(std::move(rules)) {}

  /// Fixture file (see README for the schema).
  static std::shared_ptr<ScriptedBackend> from_file(const std::string& path);
  static std::shared_ptr<ScriptedBackend> from_json(const nlohmann::json& fixture);

  void add_logprobs(const std::string& target, const std::string& conditioning,
                    RawLogProbs response);
  /// Responses returned on successive calls; an empty string is returned as
  /// is (callers decide whether that is an error).
  void add_generation(const std::string& prompt, std::vector<std::string> responses);
  /// Every call with this prompt fails with a TransportError.
  void add_generation_failure(const std::string& prompt);
  void set_logprob_fn(LogProbFn fn);
  void set_generate_fn(GenerateFn fn);

  RawLogProbs logprobs(const std::string& model_id, const std::string& target,
                       const std::string& conditioning, double timeout_seconds) override;
  std::string generate(const std::string& model_id, const std::string& prompt,
                       std::size_t max_new_tokens, double timeout_seconds) override;
  HealthStatus health(double timeout_seconds) override;

  std::size_t logprob_calls() const;
  std::size_t generate_calls() const;

 private:
  struct Script {
    std::vector<std::string> responses;
    bool fail = false;
    std::size_t calls = 0;
  };

  Rules rules_;
  mutable std::mutex mu_;
  std::map<std::pair<std::string, std::string>, RawLogProbs> logprob_fixtures_;
  std::map<std::string, Script> generations_;
  std::map<std::string, std::size_t> fn_calls_;
  LogProbFn logprob_fn_;
  GenerateFn generate_fn_;
  std::size_t logprob_calls_ = 0;
  std::size_t generate_calls_ = 0;
};

/// Backend speaking the wire protocol over HTTP.
std::shared_ptr<ScorerBackend> make_http_backend(const std::string& endpoint);
/// Backend running `command` once per request with the JSON request on stdin:
/// {"op": "logprobs"|"generate"|"health", ...request fields}.
std::shared_ptr<ScorerBackend> make_exec_backend(const std::string& command);

}  // namespace lexsum

#endif  // LEXSUM_SCORING_H_
