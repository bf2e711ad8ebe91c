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

#include "lexsum/corpus.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <regex>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "lexsum/error.h"
#include "lexsum/text.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace lexsum {
namespace {

const std::set<std::string>& known_jurisdictions() {
  static const std::set<std::string> tags = {"CA", "HK", "UK", "AUS"};
  return tags;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool is_blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isspace(c) != 0;
  });
}

void load_jsonl_file(const fs::path& path, const LoadOptions& options,
                     LoadResult& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (is_blank(line)) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      out.rejects.push_back({where, std::string("invalid JSON: ") + e.what()});
      continue;
    }
    if (!record.is_object()) {
      out.rejects.push_back({where, "record is not an object"});
      continue;
    }
    if (record.size() == 1 && record.contains("meta")) continue;
    std::string missing;
    for (const char* field : {"id", "document", "summary"}) {
      if (!record.contains(field) || !record[field].is_string()) {
        missing = field;
        break;
      }
    }
    if (!missing.empty()) {
      out.rejects.push_back({where, "missing or non-string field \"" + missing + "\""});
      continue;
    }
    CorpusSample sample;
    sample.id = record["id"].get<std::string>();
    sample.document = record["document"].get<std::string>();
    sample.summary = record["summary"].get<std::string>();
    sample.jurisdiction = record.contains("jurisdiction") &&
                                  record["jurisdiction"].is_string()
                              ? record["jurisdiction"].get<std::string>()
                              : options.default_jurisdiction;
    sample.source_path = where;
    out.samples.push_back(std::move(sample));
  }
}

void load_paired_text(const fs::path& root, const LoadOptions& options,
                      LoadResult& out) {
  struct Pair {
    fs::path doc, sum;
  };
  std::map<std::string, Pair> pairs;  // keyed by path without the suffix
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& file : files) {
    const std::string name = file.filename().string();
    const auto ends_with = [&](const std::string& suffix) {
      return name.size() > suffix.size() &&
             name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0;
    };
    if (ends_with(".doc.txt")) {
      const std::string key =
          (file.parent_path() / name.substr(0, name.size() - 8)).string();
      pairs[key].doc = file;
    } else if (ends_with(".sum.txt")) {
      const std::string key =
          (file.parent_path() / name.substr(0, name.size() - 8)).string();
      pairs[key].sum = file;
    }
  }
  for (const auto& [key, pair] : pairs) {
    if (pair.doc.empty() || pair.sum.empty()) {
      out.rejects.push_back(
          {pair.doc.empty() ? pair.sum.string() : pair.doc.string(),
           pair.doc.empty() ? "summary without document" : "document without summary"});
      continue;
    }
    CorpusSample sample;
    sample.id = fs::path(key).filename().string();
    const std::string parent = pair.doc.parent_path().filename().string();
    sample.jurisdiction = known_jurisdictions().contains(parent)
                              ? parent
                              : options.default_jurisdiction;
    sample.document = read_file(pair.doc);
    sample.summary = read_file(pair.sum);
    sample.source_path = pair.doc.string();
    out.samples.push_back(std::move(sample));
  }
}

std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  // Uniform in [0, bound) by rejection; independent of the standard library's
  // distribution implementations.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

}  // namespace

CorpusFormat parse_corpus_format(const std::string& name) {
  if (name == "jsonl") return CorpusFormat::kJsonl;
  if (name == "paired-text") return CorpusFormat::kPairedText;
  throw InvalidParameterError("unknown corpus format: " + name);
}

LoadResult load_corpus(const fs::path& root, CorpusFormat format,
                       const LoadOptions& options) {
  std::error_code ec;
  if (!fs::exists(root, ec)) throw IoError("corpus root does not exist: " + root.string());
  LoadResult result;
  try {
    if (format == CorpusFormat::kJsonl) {
      if (fs::is_directory(root)) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(root)) {
          if (entry.is_regular_file() && entry.path().extension() == ".jsonl") {
            files.push_back(entry.path());
          }
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files) load_jsonl_file(f, options, result);
      } else {
        load_jsonl_file(root, options, result);
      }
    } else {
      if (!fs::is_directory(root)) {
        throw IoError("paired-text corpus root is not a directory: " + root.string());
      }
      load_paired_text(root, options, result);
    }
  } catch (const fs::filesystem_error& e) {
    throw IoError(e.what());
  }

  // Ids must be unique; later duplicates are rejected.
  std::unordered_set<std::string> seen;
  std::vector<CorpusSample> unique;
  unique.reserve(result.samples.size());
  for (auto& s : result.samples) {
    if (s.id.empty()) {
      result.rejects.push_back({s.source_path, "empty id"});
    } else if (is_blank(s.document) || is_blank(s.summary)) {
      result.rejects.push_back({s.source_path, "empty document or summary"});
    } else if (!seen.insert(s.id).second) {
      result.rejects.push_back({s.source_path, "duplicate id \"" + s.id + "\""});
    } else {
      unique.push_back(std::move(s));
    }
  }
  result.samples = std::move(unique);
  if (result.samples.empty()) {
    throw EmptyCorpusError("no valid samples under " + root.string() + " (" +
                           std::to_string(result.rejects.size()) + " rejected)");
  }
  return result;
}

std::vector<std::string> CleanOptions::default_noise_patterns() {
  return {R"(^\s*Page\s+\d+(\s+of\s+\d+)?\s*$)", R"(^\s*-\s*\d+\s*-\s*$)",
          R"(^\s*\d+\s*$)",
          R"(^\s*(Back to top|Print this page|Download PDF)\s*$)"};
}

std::string to_string(RejectReason reason) {
  switch (reason) {
    case RejectReason::kDuplicate:
      return "duplicate";
    case RejectReason::kDocumentTooShort:
      return "document-too-short";
    case RejectReason::kSummaryTooShort:
      return "summary-too-short";
  }
  return "unknown";
}

std::string strip_noise_lines(const std::string& text,
                              const std::vector<std::string>& patterns) {
  if (patterns.empty()) return text;
  std::vector<std::regex> compiled;
  compiled.reserve(patterns.size());
  for (const auto& p : patterns) {
    try {
      compiled.emplace_back(p, std::regex::ECMAScript);
    } catch (const std::regex_error& e) {
      throw InvalidParameterError("bad noise pattern \"" + p + "\": " + e.what());
    }
  }
  std::string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    const bool last = nl == std::string::npos;
    if (last) nl = text.size();
    std::string line = text.substr(pos, nl - pos);
    std::string probe = line;
    if (!probe.empty() && probe.back() == '\r') probe.pop_back();
    const bool noise = std::any_of(compiled.begin(), compiled.end(),
                                   [&](const std::regex& re) {
                                     return std::regex_match(probe, re);
                                   });
    if (!noise) {
      out += line;
      if (!last) out += '\n';
    }
    if (last) break;
    pos = nl + 1;
  }
  return out;
}

CleanResult clean_corpus(const std::vector<CorpusSample>& samples,
                         const CleanOptions& options) {
  if (options.min_doc_words < 1 || options.min_sum_words < 1) {
    throw InvalidParameterError("word thresholds must be >= 1");
  }
  CleanResult result;
  std::unordered_map<std::string, std::string> first_by_doc;
  for (const auto& original : samples) {
    CorpusSample s = original;
    s.document = strip_noise_lines(s.document, options.noise_patterns);
    s.summary = strip_noise_lines(s.summary, options.noise_patterns);
    const TokenizedText doc = tokenize(s.document);
    const TokenizedText sum = tokenize(s.summary);
    if (word_count(doc) < options.min_doc_words) {
      result.rejected.push_back({std::move(s), RejectReason::kDocumentTooShort, {}});
      continue;
    }
    if (word_count(sum) < options.min_sum_words) {
      result.rejected.push_back({std::move(s), RejectReason::kSummaryTooShort, {}});
      continue;
    }
    std::string key;
    for (const auto& t : doc.tokens) {
      key += t;
      key += '\x1f';
    }
    const auto [it, inserted] = first_by_doc.emplace(std::move(key), s.id);
    if (!inserted) {
      result.rejected.push_back({std::move(s), RejectReason::kDuplicate, it->second});
      continue;
    }
    result.kept.push_back(std::move(s));
  }
  return result;
}

SplitSizes split_sizes(std::size_t total, const SplitRatios& ratios) {
  constexpr double kEps = 1e-9;
  const auto part = [&](double r) {
    return static_cast<std::size_t>(std::floor(static_cast<double>(total) * r + kEps));
  };
  SplitSizes sizes{};
  sizes.validation = part(ratios.validation);
  sizes.test = part(ratios.test);
  sizes.train = total - sizes.validation - sizes.test;
  return sizes;
}

std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(bounded(rng, i));
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

CorpusSplit split_corpus(const std::vector<CorpusSample>& samples,
                         const SplitRatios& ratios, std::uint64_t seed) {
  if (!(ratios.train > 0 && ratios.validation > 0 && ratios.test > 0)) {
    throw InvalidParameterError("split ratios must be positive");
  }
  if (std::abs(ratios.train + ratios.validation + ratios.test - 1.0) > 1e-9) {
    throw InvalidParameterError("split ratios must sum to 1");
  }
  CorpusSplit split;
  split.seed = seed;
  split.ratios = ratios;
  const SplitSizes sizes = split_sizes(samples.size(), ratios);
  const auto order = seeded_permutation(samples.size(), seed);
  for (std::size_t k = 0; k < order.size(); ++k) {
    const CorpusSample& s = samples[order[k]];
    if (k < sizes.train) {
      split.train.push_back(s);
    } else if (k < sizes.train + sizes.validation) {
      split.validation.push_back(s);
    } else {
      split.test.push_back(s);
    }
  }
  return split;
}

json to_json(const CorpusSample& sample) {
  return json{{"id", sample.id},
              {"jurisdiction", sample.jurisdiction},
              {"document", sample.document},
              {"summary", sample.summary},
              {"source_path", sample.source_path}};
}

CorpusSample sample_from_json(const json& j) {
  CorpusSample s;
  s.id = j.at("id").get<std::string>();
  s.jurisdiction = j.value("jurisdiction", std::string("custom"));
  s.document = j.at("document").get<std::string>();
  s.summary = j.at("summary").get<std::string>();
  s.source_path = j.value("source_path", std::string());
  return s;
}

json split_manifest(const CorpusSplit& split) {
  const auto ids = [](const std::vector<CorpusSample>& v) {
    json arr = json::array();
    for (const auto& s : v) arr.push_back(s.id);
    return arr;
  };
  json j;
  j["schema"] = 1;
  j["seed"] = split.seed;
  j["ratios"] = {{"train", split.ratios.train},
                 {"validation", split.ratios.validation},
                 {"test", split.ratios.test}};
  j["rounding"] = "floor-validation-test-remainder-to-train";
  j["train"] = ids(split.train);
  j["validation"] = ids(split.validation);
  j["test"] = ids(split.test);
  return j;
}

CorpusSplit apply_manifest(const json& manifest,
                           const std::vector<CorpusSample>& samples) {
  std::unordered_map<std::string, const CorpusSample*> by_id;
  for (const auto& s : samples) by_id[s.id] = &s;
  CorpusSplit split;
  split.seed = manifest.at("seed").get<std::uint64_t>();
  const auto& r = manifest.at("ratios");
  split.ratios = {r.at("train").get<double>(), r.at("validation").get<double>(),
                  r.at("test").get<double>()};
  const auto fill = [&](const char* key, std::vector<CorpusSample>& dst) {
    for (const auto& id : manifest.at(key)) {
      const auto it = by_id.find(id.get<std::string>());
      if (it == by_id.end()) {
        throw InvalidParameterError("manifest id not in corpus: " + id.get<std::string>());
      }
      dst.push_back(*it->second);
    }
  };
  fill("train", split.train);
  fill("validation", split.validation);
  fill("test", split.test);
  return split;
}

std::vector<std::pair<std::string, std::vector<CorpusSample>>> by_jurisdiction(
    const std::vector<CorpusSample>& samples) {
  std::map<std::string, std::vector<CorpusSample>> groups;
  for (const auto& s : samples) groups[s.jurisdiction].push_back(s);
  return {groups.begin(), groups.end()};
}

}  // namespace lexsum
