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


// Sentence-level data augmentation: rephrasing, term-preserving rephrasing
// and back translation through a text-generation provider.

#ifndef LEXSUM_AUGMENT_H_
#define LEXSUM_AUGMENT_H_

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lexsum/corpus.h"
#include "lexsum/metrics.h"
#include "lexsum/scoring.h"

namespace lexsum {

enum class PromptKind { kRephrase, kConstrained, kTranslateForward, kTranslateBack };

std::string to_string(PromptKind kind);

/// Prompt text with {name} placeholders. "{{" and "}}" stand for literal
/// braces. Substituted values are inserted verbatim and never re-expanded.
class PromptTemplate {
 public:
  PromptTemplate(PromptKind kind, std::string text);

  /// Wording compiled into the library; identical to data/templates/.
  static PromptTemplate builtin(PromptKind kind);
  /// Reads the file, dropping one trailing newline.
  static PromptTemplate from_file(PromptKind kind, const std::string& path);

  PromptKind kind() const { return kind_; }
  const std::string& text() const { return text_; }

  /// Placeholders the kind needs: sentence; terms; src_lang and tgt_lang.
  static std::vector<std::string> required(PromptKind kind);

  /// Throws InvalidParameterError for unbalanced braces, unknown
  /// placeholders or a missing required one.
  void validate() const;

  std::string render(const std::map<std::string, std::string>& values) const;

 private:
  PromptKind kind_;
  std::string text_;
};

struct TemplateSet {
  PromptTemplate rephrase = PromptTemplate::builtin(PromptKind::kRephrase);
  PromptTemplate constrained = PromptTemplate::builtin(PromptKind::kConstrained);
  PromptTemplate translate_forward = PromptTemplate::builtin(PromptKind::kTranslateForward);
  PromptTemplate translate_back = PromptTemplate::builtin(PromptKind::kTranslateBack);

  /// Overrides with <dir>/{rephrase,constrained_rephrase,translate_forward,
  /// translate_back}.txt where present.
  static TemplateSet from_directory(const std::string& dir);
};

std::string build_rephrase_prompt(const std::string& sentence,
                                  const TemplateSet& templates = {});

/// Surface forms of glossary phrases found in the sentence, in order of first
/// occurrence, each listed once.
std::vector<std::string> detect_terms(const std::string& sentence,
                                      const LegalGlossary& glossary);

/// Term-preserving rephrase prompt, or the plain rephrase prompt when the
/// sentence contains no glossary phrase.
std::string build_constrained_prompt(const std::string& sentence,
                                     const LegalGlossary& glossary,
                                     const TemplateSet& templates = {});

/// Terms (from detect_terms) whose tokens do not occur in `output`.
std::vector<std::string> missing_terms(const std::string& output,
                                       const std::vector<std::string>& terms);

inline constexpr char kDefaultPivot[] = "German";
inline constexpr char kSourceLanguage[] = "English";

/// Forward translation into the pivot language, then back. Provider errors
/// and empty outputs raise StageError tagged "forward" or "back".
std::string back_translate(const std::string& sentence, const std::string& pivot_lang,
                           const ScorerClient& provider, const TemplateSet& templates = {},
                           std::size_t max_new_tokens = 256);

enum class AugmentMethod { kRephrase, kConstrained, kBackTranslate };

std::string to_string(AugmentMethod method);
AugmentMethod parse_augment_method(const std::string& name);

/// What happened to one source sentence.
struct SentenceRecord {
  std::string part;  // "document" or "summary"
  std::size_t index = 0;
  /// Method actually applied: constrained falls back to rephrase when the
  /// sentence has no glossary term.
  std::string method;
  std::size_t attempts = 0;
  std::vector<std::string> terms;
  /// Terms still missing after the retry.
  std::vector<std::string> missing;
  bool violation = false;
  bool failed = false;
  std::string error;
};

struct AugmentedSample {
  std::string id;  // "<parent>#aug-<method>"
  std::string parent_id;
  std::string jurisdiction;
  AugmentMethod method = AugmentMethod::kRephrase;
  std::string document;
  std::string summary;
  std::vector<SentenceRecord> provenance;
  /// Some sentence could not be rewritten (its original text is kept) or the
  /// rewrite changed the sentence count.
  bool partial = false;
  std::vector<std::string> errors;

  std::size_t violations() const;
};

struct AugmentOptions {
  AugmentMethod method = AugmentMethod::kRephrase;
  std::string pivot_lang = kDefaultPivot;
  std::size_t max_new_tokens = 256;
  bool keep_partial = false;
  std::size_t jobs = 1;
  TemplateSet templates;
};

struct AugmentResult {
  /// One per input sample in input order, minus partial ones unless kept.
  std::vector<AugmentedSample> samples;
  std::vector<std::string> partial_ids;
  std::size_t sentences = 0;
  std::size_t violations = 0;
};

/// Rewrites every sentence of each document and summary one-to-one. Each
/// sentence gets one retry after a provider failure, malformed output or (for
/// the constrained method) a dropped term; a dropped term that survives the
/// retry is kept and flagged, a failure marks the sample partial.
/// Throws EmptyCorpusError for an empty input.
AugmentResult augment_corpus(const std::vector<CorpusSample>& train,
                             const ScorerClient& provider, const LegalGlossary& glossary,
                             const AugmentOptions& options = {});

CorpusSample to_corpus_sample(const AugmentedSample& sample);

/// Originals followed by the augmented samples; the originals are untouched.
std::vector<CorpusSample> merge_with_originals(const std::vector<CorpusSample>& originals,
                                               const std::vector<AugmentedSample>& augmented);

nlohmann::json to_json(const AugmentedSample& sample);

}  // namespace lexsum

#endif  // LEXSUM_AUGMENT_H_
