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


// Summary-quality metrics: ROUGE F1, log-prob sequence scoring, the
// phrase-weighted ensemble score (LTScore), Fleiss' kappa and Pearson
// correlation between metric columns.

#ifndef LEXSUM_METRICS_H_
#define LEXSUM_METRICS_H_

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "lexsum/scoring.h"
#include "lexsum/text.h"

namespace lexsum {

// ---------------------------------------------------------------------------
// ROUGE

enum class RougeVariant { kR1, kR2, kRL };

std::string to_string(RougeVariant variant);

/// Precision, recall and F1 in percent.
struct RougeScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  /// Candidate or reference had no words; all scores are 0.
  bool empty = false;
};

/// Clipped n-gram overlap (R1, R2) or longest common subsequence (RL) over
/// word tokens.
RougeScore rouge_f1(std::span<const std::string> candidate,
                    std::span<const std::string> reference, RougeVariant variant);
RougeScore rouge_f1(const TokenizedText& candidate, const TokenizedText& reference,
                    RougeVariant variant);

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

// ---------------------------------------------------------------------------
// Phrase importance

/// Multi-token legal terms, normalized with the text-core tokenizer.
struct LegalGlossary {
  std::vector<Ngram> phrases;
  std::string source;

  /// One phrase per line. Blank lines and lines starting with '#' are
  /// skipped; duplicates after normalization keep the first occurrence.
  static LegalGlossary from_file(const std::string& path);
  static LegalGlossary from_phrases(const std::vector<std::string>& phrases,
                                    std::string source = "inline");

  bool empty() const { return phrases.empty(); }
  std::size_t size() const { return phrases.size(); }
};

/// Document frequencies of glossary phrases over a reference collection,
/// normally the training split. idf = ln((1 + N) / (1 + df)) + 1.
class IdfTable {
 public:
  IdfTable() = default;

  static IdfTable build(const std::vector<TokenizedText>& documents,
                        const LegalGlossary& glossary, std::size_t jobs = 1);

  std::size_t documents() const { return documents_; }
  std::size_t df(const Ngram& phrase) const;
  double idf(const Ngram& phrase) const;

  nlohmann::json to_json() const;
  static IdfTable from_json(const nlohmann::json& j);

 private:
  std::size_t documents_ = 0;
  std::unordered_map<Ngram, std::size_t, NgramHash> df_;
};

struct PhraseWeight {
  Ngram phrase;
  std::size_t tf = 0;
  double idf = 0.0;
  double raw_score = 0.0;   // tf * idf
  double normalized = 0.0;  // min-max over the kept entries
};

/// Kept phrases ordered by descending raw score, ties by phrase text.
struct PhraseWeightTable {
  std::vector<PhraseWeight> entries;

  bool empty() const { return entries.empty(); }
  std::size_t size() const { return entries.size(); }
};

inline constexpr std::size_t kTopPhrases = 100;

/// Glossary phrases occurring in the candidate or reference, scored by
/// tf (occurrences in both) times idf, top `limit` kept and min-max
/// normalized. When every kept raw score is equal the weights are all 1.
/// Throws InvalidParameterError for an empty glossary.
PhraseWeightTable select_top_phrases(const TokenizedText& candidate,
                                     const TokenizedText& reference,
                                     const LegalGlossary& glossary, const IdfTable& idf,
                                     std::size_t limit = kTopPhrases);

/// 1 outside every phrase occurrence, 1 + e^w inside an occurrence of a
/// phrase with normalized weight w (maximum over overlapping occurrences).
std::vector<double> token_weights(std::span<const std::string> tokens,
                                  const PhraseWeightTable& table);

// ---------------------------------------------------------------------------
// Sequence scoring

/// Σ w_t log p_t / Σ w_t over scorer tokens, each inheriting the weight of the
/// word token it aligns to. `length_norm = false` returns the plain sum.
/// Empty `word_weights` means uniform weights. Throws AlignmentError when the
/// weights do not match the response's word tokens.
double weighted_logprob(const LogProbResponse& response,
                        std::span<const double> word_weights, bool length_norm = true);

/// Log-prob score of `candidate` conditioned on `reference`.
double seq_logprob_score(const std::string& candidate, const std::string& reference,
                         const ScorerClient& scorer,
                         std::span<const double> word_weights = {},
                         bool length_norm = true);

struct LtScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct LtScoreOptions {
  bool length_norm = true;
  std::size_t top_phrases = kTopPhrases;
};

/// Harmonic combination 2PR / (P + R), 0 when P + R = 0.
double harmonic_f1(double precision, double recall);

/// Ensemble score: P scores the candidate given the reference, R the
/// reference given the candidate, each a `model_weights`-weighted sum over
/// scorers with phrase-importance token weights on the scored side. An empty
/// glossary gives uniform weights. Any scorer failure raises
/// PartialEnsembleError naming the scorer.
LtScore ltscore(const std::string& candidate, const std::string& reference,
                std::span<const ScorerClient> scorers,
                std::span<const double> model_weights, const LegalGlossary& glossary,
                const IdfTable& idf, const LtScoreOptions& options = {});

/// Throws InvalidParameterError unless there is one non-negative weight per
/// scorer and they sum to 1 within 1e-9.
void validate_model_weights(std::span<const double> weights, std::size_t scorers);

// ---------------------------------------------------------------------------
// Agreement and correlation

/// Fleiss' kappa over an items x raters table of category labels. Every item
/// needs the same number (>= 2) of raters. When chance agreement is 1 the
/// table is in perfect agreement and kappa is 1.
double fleiss_kappa(const std::vector<std::vector<std::string>>& ratings);

/// Pearson correlation; nullopt when either side has zero variance.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

/// Per-sample metric values with metadata about how they were produced.
struct MetricReport {
  std::string model;
  std::vector<std::string> metrics;
  std::vector<std::string> sample_ids;
  /// values[sample][metric]; missing when the metric failed for the sample.
  std::vector<std::vector<std::optional<double>>> values;
  nlohmann::json metadata = nlohmann::json::object();

  void add_sample(const std::string& id, const std::map<std::string, double>& row);
  std::optional<std::size_t> metric_index(const std::string& name) const;
  /// Mean of the present values per metric.
  std::vector<std::optional<double>> aggregate() const;
};

nlohmann::json to_json(const MetricReport& report);
MetricReport metric_report_from_json(const nlohmann::json& j);

/// One summary row per report with columns
/// model,R1,R2,RL,LTScore_P,LTScore_R,LTScore_F1 (blank when absent).
std::string to_csv(std::span<const MetricReport> reports);

struct CorrelationMatrix {
  std::vector<std::string> metrics;
  /// Symmetric; missing where a column has zero variance or fewer than three
  /// samples carry both values.
  std::vector<std::vector<std::optional<double>>> values;
};

/// Pairwise Pearson over samples where both metrics are present. Throws
/// InsufficientDataError for fewer than 3 samples or 2 metrics.
CorrelationMatrix metric_correlation(const MetricReport& report);

nlohmann::json to_json(const CorrelationMatrix& matrix);
std::string to_csv(const CorrelationMatrix& matrix);

// ---------------------------------------------------------------------------
// Corpus evaluation

struct EvalPair {
  std::string id;
  std::string candidate;
  std::string reference;
};

struct EvalOptions {
  bool rouge = true;
  bool ltscore = true;
  /// Single-scorer, uniform-weight score in both directions (first scorer).
  bool seq_score = false;
  LtScoreOptions lt;
  std::size_t jobs = 1;
};

/// Scores every pair. A sample whose ensemble fails keeps its ROUGE values;
/// its model-based metrics are left missing and the failure is listed under
/// metadata["failed"].
MetricReport evaluate_pairs(const std::string& model, const std::vector<EvalPair>& pairs,
                            std::span<const ScorerClient> scorers,
                            std::span<const double> model_weights,
                            const LegalGlossary& glossary, const IdfTable& idf,
                            const EvalOptions& options = {});

}  // namespace lexsum

#endif  // LEXSUM_METRICS_H_
