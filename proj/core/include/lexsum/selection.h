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

// Budgeted content selection: Lead truncation and the LexRank / TextRank
// graph rankers, plus the n-gram recall used to compare them.

#ifndef LEXSUM_SELECTION_H_
#define LEXSUM_SELECTION_H_

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lexsum/corpus.h"
#include "lexsum/text.h"

namespace lexsum {

inline constexpr std::size_t kDefaultBudget = 16384;

enum class SelectionMethod { kLead, kLexRank, kTextRank };

std::string to_string(SelectionMethod method);
SelectionMethod parse_selection_method(const std::string& name);

struct SelectionResult {
  SelectionMethod method = SelectionMethod::kLead;
  std::size_t budget = 0;
  /// Strictly increasing sentence indices into the source document.
  std::vector<std::size_t> selected;
  /// Set when the only selected sentence had to be cut to the budget.
  bool truncated = false;
  /// False when power iteration stopped at max_iter.
  bool converged = true;
  std::size_t iterations = 0;
  TokenizedText compressed_text;
};

/// Weighted sentence graph and its stationary scores.
struct SentenceGraph {
  using Edge = std::pair<std::size_t, double>;

  std::size_t size = 0;
  /// Symmetric adjacency lists with positive weights, no self loops.
  std::vector<std::vector<Edge>> edges;
  std::vector<double> scores;  // sums to 1
  bool converged = true;
  std::size_t iterations = 0;

  explicit SentenceGraph(std::size_t n = 0) : size(n), edges(n) {}
  void connect(std::size_t i, std::size_t j, double w);
  double weight(std::size_t i, std::size_t j) const;
};

struct RankOptions {
  double threshold = 0.1;  // LexRank only
  double damping = 0.85;
  double epsilon = 1e-6;
  std::size_t max_iter = 200;
};

/// Sentences in order while the running total stays within the budget. A
/// first sentence longer than the budget is cut to it.
SelectionResult lead(const TokenizedText& doc, std::size_t budget);

/// tf-idf cosine similarity (idf over the document's own sentences), edges
/// below the threshold dropped, damped power iteration.
SelectionResult lexrank(const TokenizedText& doc, std::size_t budget,
                        const RankOptions& options = {});

/// Word-type overlap normalized by log sentence lengths, damped power
/// iteration.
SelectionResult textrank(const TokenizedText& doc, std::size_t budget,
                         const RankOptions& options = {});

SelectionResult select(SelectionMethod method, const TokenizedText& doc,
                       std::size_t budget, const RankOptions& options = {});

SentenceGraph lexrank_graph(const TokenizedText& doc, const RankOptions& options = {});
SentenceGraph textrank_graph(const TokenizedText& doc, const RankOptions& options = {});

/// Damped PageRank over a symmetric weight matrix. Rows without edges spread
/// their mass uniformly; scores are renormalized to sum to 1 every step.
void power_iteration(SentenceGraph& graph, const RankOptions& options);

/// Sentence indices by descending score; scores within 1e-12 are ties and go
/// to the earlier sentence.
std::vector<std::size_t> rank_sentences(const std::vector<double>& scores);

/// Greedy budgeted pick over `ranked`, returned in document order. Sentences
/// that do not fit are skipped; if nothing fits, the top one is cut to the
/// budget.
SelectionResult take_ranked(const TokenizedText& doc,
                            const std::vector<std::size_t>& ranked,
                            std::size_t budget);

inline constexpr std::array<std::size_t, 4> kRecallOrders = {1, 2, 3, 5};

/// Clipped n-gram recall of a selection against the target summary, in
/// percent. Orders the target is too short for are empty and excluded from
/// `r_avg`, and `partial` is set.
struct RecallEval {
  std::array<std::optional<double>, 4> recall;  // orders 1, 2, 3, 5
  std::optional<double> r1() const { return recall[0]; }
  std::optional<double> r_avg;
  bool partial = false;
};

RecallEval ngram_recall_eval(const TokenizedText& selected,
                             const TokenizedText& target);

/// Mean R_avg per method over a training corpus.
struct MethodComparison {
  SelectionMethod chosen = SelectionMethod::kLead;
  std::array<double, 3> mean_r_avg{};  // lead, lexrank, textrank
  std::array<double, 3> mean_r1{};
  std::size_t samples = 0;
};

/// Runs every method over the samples, returns the argmax of mean R_avg.
/// Ties (within 1e-9) prefer lead, then textrank, then lexrank.
MethodComparison choose_method(const std::vector<CorpusSample>& train,
                               std::size_t budget, std::size_t jobs = 1,
                               const RankOptions& options = {});

nlohmann::json to_json(const SelectionResult& result);

}  // namespace lexsum

#endif  // LEXSUM_SELECTION_H_
