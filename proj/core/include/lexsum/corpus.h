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

// Loading, cleaning and splitting of judgment/summary corpora.

#ifndef LEXSUM_CORPUS_H_
#define LEXSUM_CORPUS_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace lexsum {

/// One judgment paired with its target summary.
struct CorpusSample {
  std::string id;
  /// CA, HK, UK, AUS or a custom tag.
  std::string jurisdiction;
  std::string document;
  std::string summary;
  std::string source_path;

  friend bool operator==(const CorpusSample&, const CorpusSample&) = default;
};

enum class CorpusFormat { kJsonl, kPairedText };

CorpusFormat parse_corpus_format(const std::string& name);

/// A record or file that could not become a sample.
struct LoadReject {
  std::string source;  // file path, with ":<line>" for jsonl
  std::string reason;
};

struct LoadResult {
  std::vector<CorpusSample> samples;
  std::vector<LoadReject> rejects;
};

struct LoadOptions {
  /// Jurisdiction for paired-text samples whose parent directory is not one of
  /// CA, HK, UK, AUS, and for jsonl records without the field.
  std::string default_jurisdiction = "custom";
};

/// Reads a corpus from `root`.
///
/// jsonl: `root` is a .jsonl file or a directory whose *.jsonl files are read
/// in name order; one object per line with id, jurisdiction, document,
/// summary. Lines holding only a "meta" object are skipped.
/// paired-text: `root` is scanned recursively for `<id>.doc.txt` and
/// `<id>.sum.txt`.
///
/// Malformed records, orphans and duplicate ids land in `rejects`. Throws
/// IoError if `root` cannot be read and EmptyCorpusError if nothing valid was
/// found.
LoadResult load_corpus(const std::filesystem::path& root, CorpusFormat format,
                       const LoadOptions& options = {});

struct CleanOptions {
  std::size_t min_doc_words = 300;
  std::size_t min_sum_words = 50;
  /// Whole-line ECMAScript patterns; matching lines are stripped first.
  std::vector<std::string> noise_patterns;

  /// Patterns shipped in data/noise_patterns.txt.
  static std::vector<std::string> default_noise_patterns();
};

enum class RejectReason { kDuplicate, kDocumentTooShort, kSummaryTooShort };

std::string to_string(RejectReason reason);

struct CleanReject {
  CorpusSample sample;
  RejectReason reason;
  /// Id of the kept sample this one duplicates (duplicates only).
  std::string duplicate_of;
};

struct CleanResult {
  std::vector<CorpusSample> kept;
  std::vector<CleanReject> rejected;
};

/// Strips noise lines, drops samples under the word thresholds, then drops
/// samples whose normalized document token sequence was already seen (first
/// occurrence kept). Input order is preserved.
CleanResult clean_corpus(const std::vector<CorpusSample>& samples,
                         const CleanOptions& options = {});

/// Removes every line of `text` fully matched by one of `patterns`.
std::string strip_noise_lines(const std::string& text,
                              const std::vector<std::string>& patterns);

struct SplitRatios {
  double train = 0.8;
  double validation = 0.1;
  double test = 0.1;
};

/// Train/validation/test partition plus everything needed to redo it.
struct CorpusSplit {
  std::vector<CorpusSample> train;
  std::vector<CorpusSample> validation;
  std::vector<CorpusSample> test;
  std::uint64_t seed = 0;
  SplitRatios ratios;
};

/// Sizes for `total` samples: validation and test are floored, the remainder
/// goes to train.
struct SplitSizes {
  std::size_t train, validation, test;
};
SplitSizes split_sizes(std::size_t total, const SplitRatios& ratios);

/// Seeded Fisher-Yates shuffle (mt19937_64, platform independent), then
/// partition into train, validation, test in that order.
CorpusSplit split_corpus(const std::vector<CorpusSample>& samples,
                         const SplitRatios& ratios, std::uint64_t seed);

/// Deterministic permutation of [0, n) used by split_corpus.
std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed);

// Serialization.

nlohmann::json to_json(const CorpusSample& sample);
CorpusSample sample_from_json(const nlohmann::json& j);

/// {"schema":1,"seed":..,"ratios":{..},"train":[ids],"validation":[..],
///  "test":[..]}
nlohmann::json split_manifest(const CorpusSplit& split);

/// Rebuilds a split from its manifest and the corpus it was made from.
CorpusSplit apply_manifest(const nlohmann::json& manifest,
                           const std::vector<CorpusSample>& samples);

/// Samples grouped by jurisdiction, groups in name order, samples in input
/// order.
std::vector<std::pair<std::string, std::vector<CorpusSample>>> by_jurisdiction(
    const std::vector<CorpusSample>& samples);

}  // namespace lexsum

#endif  // LEXSUM_CORPUS_H_
