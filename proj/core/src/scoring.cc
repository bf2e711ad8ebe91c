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

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>
#include <unordered_set>

#include <sys/wait.h>
#include <unistd.h>

#include "httplib.h"
#include "lexsum/error.h"

using nlohmann::json;

namespace lexsum {
namespace {

json parse_body(const std::string& body, const char* what) {
  try {
    return json::parse(body);
  } catch (const json::parse_error& e) {
    throw ProtocolError(std::string(what) + ": response is not JSON: " + e.what());
  }
}

class HttpBackend : public ScorerBackend {
 public:
  explicit HttpBackend(const std::string& endpoint) {
    const auto scheme_end = endpoint.find("://");
    const auto path_start = endpoint.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
      base_ = endpoint;
    } else {
      base_ = endpoint.substr(0, path_start);
      prefix_ = endpoint.substr(path_start);
      while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
    }
  }

  RawLogProbs logprobs(const std::string& model_id, const std::string& target,
                       const std::string& conditioning, double timeout) override {
    const json body = post("/v1/logprobs", logprobs_request(model_id, target, conditioning),
                           timeout);
    return parse_logprobs_response(body, target);
  }

  std::string generate(const std::string& model_id, const std::string& prompt,
                       std::size_t max_new_tokens, double timeout) override {
    return parse_generate_response(
        post("/v1/generate", generate_request(model_id, prompt, max_new_tokens), timeout));
  }

  HealthStatus health(double timeout) override {
    httplib::Client cli(base_);
    configure(cli, timeout);
    auto res = cli.Get(prefix_ + "/v1/health");
    if (!res) {
      throw TransportError("GET " + base_ + prefix_ + "/v1/health: " +
                               httplib::to_string(res.error()),
                           1);
    }
    return parse_health_response(parse_body(res->body, "health"));
  }

 private:
  static void configure(httplib::Client& cli, double timeout) {
    const auto secs = static_cast<time_t>(timeout);
    const auto usecs = static_cast<time_t>((timeout - static_cast<double>(secs)) * 1e6);
    cli.set_connection_timeout(secs, usecs);
    cli.set_read_timeout(secs, usecs);
    cli.set_write_timeout(secs, usecs);
  }

  json post(const std::string& path, const json& request, double timeout) {
    httplib::Client cli(base_);
    configure(cli, timeout);
    auto res = cli.Post(prefix_ + path, request.dump(), "application/json");
    if (!res) {
      throw TransportError(
          "POST " + base_ + prefix_ + path + ": " + httplib::to_string(res.error()), 1);
    }
    if (res->status >= 500 || res->status == 408 || res->status == 429) {
      throw TransportError("POST " + path + ": HTTP " + std::to_string(res->status) +
                               " " + res->body,
                           1);
    }
    if (res->status != 200) {
      throw ProtocolError("POST " + path + ": HTTP " + std::to_string(res->status) + " " +
                          res->body);
    }
    return parse_body(res->body, path.c_str());
  }

  std::string base_;
  std::string prefix_;
};

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  out += '\'';
  return out;
}

class ExecBackend : public ScorerBackend {
 public:
  explicit ExecBackend(std::string command) : command_(std::move(command)) {}

  RawLogProbs logprobs(const std::string& model_id, const std::string& target,
                       const std::string& conditioning, double timeout) override {
    json req = logprobs_request(model_id, target, conditioning);
    req["op"] = "logprobs";
    return parse_logprobs_response(run(req, timeout), target);
  }

  std::string generate(const std::string& model_id, const std::string& prompt,
                       std::size_t max_new_tokens, double timeout) override {
    json req = generate_request(model_id, prompt, max_new_tokens);
    req["op"] = "generate";
    return parse_generate_response(run(req, timeout));
  }

  HealthStatus health(double timeout) override {
    return parse_health_response(run(json{{"op", "health"}}, timeout));
  }

 private:
  json run(const json& request, double timeout) {
    char path[] = "/tmp/lexsum-req-XXXXXX";
    const int fd = mkstemp(path);
    if (fd < 0) throw TransportError("exec: cannot create request file", 1);
    const std::string payload = request.dump();
    const bool wrote =
        ::write(fd, payload.data(), payload.size()) == static_cast<ssize_t>(payload.size());
    ::close(fd);
    if (!wrote) {
      ::unlink(path);
      throw TransportError("exec: cannot write request file", 1);
    }
    std::ostringstream cmd;
    cmd << "timeout " << std::max(1L, std::lround(std::ceil(timeout))) << " sh -c "
        << shell_quote(command_) << " < " << path;
    FILE* pipe = ::popen(cmd.str().c_str(), "r");
    if (!pipe) {
      ::unlink(path);
      throw TransportError("exec: cannot start " + command_, 1);
    }
    std::string out;
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
    const int status = ::pclose(pipe);
    ::unlink(path);
    const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    if (code == 124) throw TransportError("exec: timed out: " + command_, 1);
    if (code != 0) {
      throw TransportError("exec: exit status " + std::to_string(code) + ": " + command_, 1);
    }
    json body = parse_body(out, "exec");
    if (body.is_object() && body.contains("error")) {
      throw ProtocolError("exec: " + body["error"].dump());
    }
    return body;
  }

  std::string command_;
};

RawLogProbs tokenized_logprobs(const std::string& target, const std::string& conditioning,
                               const ScriptedBackend::Rules& rules) {
  const TokenizedText t = tokenize(target);
  RawLogProbs out;
  out.tokens.reserve(t.token_count());
  std::unordered_set<std::string> context;
  if (rules.logprob_mode == ScriptedBackend::LogProbMode::kOverlap) {
    const TokenizedText c = tokenize(conditioning);
    context.insert(c.tokens.begin(), c.tokens.end());
  }
  for (std::size_t i = 0; i < t.token_count(); ++i) {
    out.tokens.push_back(t.raw.substr(t.offsets[i].begin,
                                      t.offsets[i].end - t.offsets[i].begin));
    out.offsets.push_back(t.offsets[i]);
    double lp = rules.constant;
    if (rules.logprob_mode == ScriptedBackend::LogProbMode::kOverlap) {
      lp = context.contains(t.tokens[i]) ? rules.hit : rules.miss;
    }
    out.logprobs.push_back(lp);
  }
  return out;
}

}  // namespace

void ScorerHandle::validate() const {
  if (endpoint.empty()) throw InvalidParameterError("scorer endpoint is empty");
  if (!(timeout_seconds > 0)) throw InvalidParameterError("scorer timeout must be > 0");
  if (initial_backoff_seconds < 0) {
    throw InvalidParameterError("scorer backoff must be >= 0");
  }
}

ScorerClient::ScorerClient(ScorerHandle handle, std::shared_ptr<ScorerBackend> backend)
    : handle_(std::move(handle)), backend_(std::move(backend)) {
  handle_.validate();
  if (!backend_) throw InvalidParameterError("scorer backend is null");
}

template <typename Fn>
auto ScorerClient::with_retries(const char* what, Fn&& fn) const {
  const std::size_t attempts = handle_.max_retries + 1;
  double backoff = handle_.initial_backoff_seconds;
  for (std::size_t attempt = 1;; ++attempt) {
    try {
      return fn();
    } catch (const TransportError& e) {
      if (attempt >= attempts) {
        throw TransportError(std::string(what) + " failed after " + std::to_string(attempt) +
                                 " attempt(s) [" + handle_.endpoint + "]: " + e.what(),
                             attempt);
      }
    }
    if (backoff > 0) {
      std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
    }
    backoff *= 2.0;
  }
}

LogProbResponse ScorerClient::token_logprobs(const std::string& target,
                                             const std::string& conditioning) const {
  RawLogProbs raw = with_retries("logprobs", [&] {
    return backend_->logprobs(handle_.model_id, target, conditioning,
                              handle_.timeout_seconds);
  });
  LogProbResponse out;
  out.target_words = tokenize(target);
  out.alignment = align_offsets(out.target_words, raw.offsets);
  out.tokens = std::move(raw.tokens);
  out.logprobs = std::move(raw.logprobs);
  out.offsets = std::move(raw.offsets);
  return out;
}

std::string ScorerClient::generate(const std::string& prompt,
                                   std::size_t max_new_tokens) const {
  if (prompt.empty()) throw InvalidParameterError("generate: empty prompt");
  if (max_new_tokens == 0) throw InvalidParameterError("generate: max_new_tokens must be >= 1");
  return with_retries("generate", [&] {
    return backend_->generate(handle_.model_id, prompt, max_new_tokens,
                              handle_.timeout_seconds);
  });
}

HealthStatus ScorerClient::health() const {
  return with_retries("health", [&] { return backend_->health(handle_.timeout_seconds); });
}

ScorerClient make_scorer(const ScorerHandle& handle) {
  handle.validate();
  const std::string& ep = handle.endpoint;
  if (ep.rfind("http://", 0) == 0) return ScorerClient(handle, make_http_backend(ep));
  if (ep.rfind("exec:", 0) == 0) return ScorerClient(handle, make_exec_backend(ep.substr(5)));
  if (ep.rfind("scripted:", 0) == 0) {
    return ScorerClient(handle, ScriptedBackend::from_file(ep.substr(9)));
  }
  throw InvalidParameterError("unsupported scorer endpoint: " + ep);
}

std::vector<std::size_t> align_offsets(const TokenizedText& words,
                                       std::span<const CharSpan> offsets) {
  std::vector<std::size_t> out;
  out.reserve(offsets.size());
  if (!offsets.empty() && words.token_count() == 0) {
    throw AlignmentError("scorer returned tokens for a target without words");
  }
  std::size_t p = 0;
  std::size_t prev_begin = 0;
  for (std::size_t k = 0; k < offsets.size(); ++k) {
    const CharSpan o = offsets[k];
    if (o.end < o.begin || o.end > words.raw.size()) {
      throw AlignmentError("scorer token " + std::to_string(k) +
                           " has offsets outside the target text");
    }
    if (o.begin < prev_begin) {
      throw AlignmentError("scorer token " + std::to_string(k) + " offsets go backwards");
    }
    prev_begin = o.begin;
    while (p < words.token_count() && words.offsets[p].end <= o.begin) ++p;
    out.push_back(std::min(p, words.token_count() - 1));
  }
  return out;
}

json logprobs_request(const std::string& model_id, const std::string& target,
                      const std::string& conditioning) {
  return json{{"model_id", model_id}, {"target", target}, {"conditioning", conditioning}};
}

json generate_request(const std::string& model_id, const std::string& prompt,
                      std::size_t max_new_tokens) {
  return json{{"model_id", model_id}, {"prompt", prompt}, {"max_new_tokens", max_new_tokens}};
}

RawLogProbs parse_logprobs_response(const json& body, const std::string& target) {
  // byte_at[c] is the byte offset of code point c; the last entry is the end.
  std::vector<std::size_t> byte_at;
  byte_at.reserve(target.size() + 1);
  for (std::size_t i = 0; i < target.size(); ++i) {
    if ((static_cast<unsigned char>(target[i]) & 0xC0) != 0x80) byte_at.push_back(i);
  }
  byte_at.push_back(target.size());
  const std::size_t target_size = byte_at.size() - 1;
  if (!body.is_object()) throw ProtocolError("logprobs: response is not an object");
  for (const char* key : {"tokens", "logprobs", "offsets"}) {
    if (!body.contains(key) || !body[key].is_array()) {
      throw ProtocolError(std::string("logprobs: missing array \"") + key + "\"");
    }
  }
  const auto& toks = body["tokens"];
  const auto& lps = body["logprobs"];
  const auto& offs = body["offsets"];
  if (toks.size() != lps.size() || toks.size() != offs.size()) {
    throw ProtocolError("logprobs: tokens, logprobs and offsets differ in length");
  }
  RawLogProbs out;
  std::size_t prev_end = 0;
  for (std::size_t k = 0; k < toks.size(); ++k) {
    if (!toks[k].is_string()) throw ProtocolError("logprobs: token is not a string");
    if (!lps[k].is_number()) throw ProtocolError("logprobs: log-prob is not a number");
    const double lp = lps[k].get<double>();
    if (!std::isfinite(lp)) throw ProtocolError("logprobs: non-finite log-prob");
    const auto& o = offs[k];
    const auto index = [](const json& v) {
      return v.is_number_integer() && v.get<std::int64_t>() >= 0;
    };
    if (!o.is_array() || o.size() != 2 || !index(o[0]) || !index(o[1])) {
      throw ProtocolError("logprobs: offset is not a [begin, end] pair");
    }
    const auto b = static_cast<std::size_t>(o[0].get<std::int64_t>());
    const auto e = static_cast<std::size_t>(o[1].get<std::int64_t>());
    if (e < b || e > target_size || b < prev_end) {
      throw ProtocolError("logprobs: offsets are not ordered spans within the target");
    }
    prev_end = e;
    const CharSpan span{byte_at[b], byte_at[e]};
    out.tokens.push_back(toks[k].get<std::string>());
    out.logprobs.push_back(lp);
    out.offsets.push_back(span);
  }
  return out;
}

std::string parse_generate_response(const json& body) {
  if (!body.is_object() || !body.contains("text") || !body["text"].is_string()) {
    throw ProtocolError("generate: response lacks a \"text\" string");
  }
  return body["text"].get<std::string>();
}

HealthStatus parse_health_response(const json& body) {
  if (!body.is_object() || !body.contains("status") || !body["status"].is_string()) {
    throw ProtocolError("health: response lacks a \"status\" string");
  }
  return {body["status"].get<std::string>(), body.value("model_id", std::string())};
}

std::shared_ptr<ScriptedBackend> ScriptedBackend::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read scorer fixture: " + path);
  json fixture;
  try {
    fixture = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidParameterError("scorer fixture " + path + " is not JSON: " + e.what());
  }
  return from_json(fixture);
}

std::shared_ptr<ScriptedBackend> ScriptedBackend::from_json(const json& fixture) {
  Rules rules;
  rules.model_id = fixture.value("model_id", rules.model_id);
  if (fixture.contains("logprobs_default")) {
    const auto& d = fixture["logprobs_default"];
    const std::string mode = d.value("mode", std::string("constant"));
    if (mode == "constant") {
      rules.logprob_mode = LogProbMode::kConstant;
      rules.constant = d.value("value", rules.constant);
    } else if (mode == "overlap") {
      rules.logprob_mode = LogProbMode::kOverlap;
      rules.hit = d.value("hit", rules.hit);
      rules.miss = d.value("miss", rules.miss);
    } else if (mode == "fail") {
      rules.logprob_mode = LogProbMode::kFail;
    } else {
      throw InvalidParameterError("unknown logprobs_default mode: " + mode);
    }
  }
  if (fixture.contains("generate_default")) {
    const auto& d = fixture["generate_default"];
    const std::string mode = d.value("mode", std::string("echo"));
    if (mode == "echo") {
      rules.generate_mode = GenerateMode::kEcho;
    } else if (mode == "echo_suffix") {
      rules.generate_mode = GenerateMode::kEchoSuffix;
      rules.suffix_marker = d.value("marker", rules.suffix_marker);
    } else if (mode == "fail") {
      rules.generate_mode = GenerateMode::kFail;
    } else {
      throw InvalidParameterError("unknown generate_default mode: " + mode);
    }
  }
  auto backend = std::make_shared<ScriptedBackend>(rules);
  for (const auto& entry : fixture.value("logprobs", json::array())) {
    const std::string target = entry.at("target").get<std::string>();
    json body = {{"tokens", entry.at("tokens")},
                 {"logprobs", entry.at("logprobs")},
                 {"offsets", entry.at("offsets")}};
    backend->add_logprobs(target, entry.value("conditioning", std::string()),
                          parse_logprobs_response(body, target));
  }
  for (const auto& entry : fixture.value("generate", json::array())) {
    const std::string prompt = entry.at("prompt").get<std::string>();
    if (entry.value("fail", false)) {
      backend->add_generation_failure(prompt);
    } else {
      backend->add_generation(prompt, entry.at("responses").get<std::vector<std::string>>());
    }
  }
  return backend;
}

void ScriptedBackend::add_logprobs(const std::string& target, const std::string& conditioning,
                                   RawLogProbs response) {
  std::lock_guard<std::mutex> lock(mu_);
  logprob_fixtures_[{target, conditioning}] = std::move(response);
}

void ScriptedBackend::add_generation(const std::string& prompt,
                                     std::vector<std::string> responses) {
  if (responses.empty()) throw InvalidParameterError("scripted generation needs a response");
  std::lock_guard<std::mutex> lock(mu_);
  generations_[prompt] = Script{std::move(responses), false, 0};
}

void ScriptedBackend::add_generation_failure(const std::string& prompt) {
  std::lock_guard<std::mutex> lock(mu_);
  generations_[prompt] = Script{{}, true, 0};
}

void ScriptedBackend::set_logprob_fn(LogProbFn fn) {
  std::lock_guard<std::mutex> lock(mu_);
  logprob_fn_ = std::move(fn);
}

void ScriptedBackend::set_generate_fn(GenerateFn fn) {
  std::lock_guard<std::mutex> lock(mu_);
  generate_fn_ = std::move(fn);
}

RawLogProbs ScriptedBackend::logprobs(const std::string& /*model_id*/,
                                      const std::string& target,
                                      const std::string& conditioning,
                                      double /*timeout_seconds*/) {
  LogProbFn fn;
  {
    std::lock_guard<std::mutex> lock(mu_);
    ++logprob_calls_;
    const auto it = logprob_fixtures_.find({target, conditioning});
    if (it != logprob_fixtures_.end()) return it->second;
    fn = logprob_fn_;
  }
  if (fn) return fn(target, conditioning);
  if (rules_.logprob_mode == LogProbMode::kFail) {
    throw TransportError("scripted scorer: logprobs unavailable", 1);
  }
  return tokenized_logprobs(target, conditioning, rules_);
}

std::string ScriptedBackend::generate(const std::string& /*model_id*/,
                                      const std::string& prompt,
                                      std::size_t /*max_new_tokens*/,
                                      double /*timeout_seconds*/) {
  GenerateFn fn;
  std::size_t call = 0;
  {
    std::lock_guard<std::mutex> lock(mu_);
    ++generate_calls_;
    const auto it = generations_.find(prompt);
    if (it != generations_.end()) {
      Script& s = it->second;
      if (s.fail) throw TransportError("scripted provider: scripted failure", 1);
      const std::size_t k = std::min(s.calls, s.responses.size() - 1);
      ++s.calls;
      return s.responses[k];
    }
    fn = generate_fn_;
    if (fn) call = fn_calls_[prompt]++;
  }
  if (fn) return fn(prompt, call);
  switch (rules_.generate_mode) {
    case GenerateMode::kEcho:
      return prompt;
    case GenerateMode::kEchoSuffix: {
      const auto pos = prompt.rfind(rules_.suffix_marker);
      if (pos == std::string::npos) return prompt;
      std::string rest = prompt.substr(pos + rules_.suffix_marker.size());
      const auto b = rest.find_first_not_of(" \t\r\n");
      const auto e = rest.find_last_not_of(" \t\r\n");
      return b == std::string::npos ? std::string() : rest.substr(b, e - b + 1);
    }
    case GenerateMode::kFail:
      throw TransportError("scripted provider: generation unavailable", 1);
  }
  return prompt;
}

HealthStatus ScriptedBackend::health(double /*timeout_seconds*/) {
  return {"ok", rules_.model_id};
}

std::size_t ScriptedBackend::logprob_calls() const {
  std::lock_guard<std::mutex> lock(mu_);
  return logprob_calls_;
}

std::size_t ScriptedBackend::generate_calls() const {
  std::lock_guard<std::mutex> lock(mu_);
  return generate_calls_;
}

std::shared_ptr<ScorerBackend> make_http_backend(const std::string& endpoint) {
  return std::make_shared<HttpBackend>(endpoint);
}

std::shared_ptr<ScorerBackend> make_exec_backend(const std::string& command) {
  if (command.empty()) throw InvalidParameterError("exec endpoint without a command");
  return std::make_shared<ExecBackend>(command);
}

}  // namespace lexsum
