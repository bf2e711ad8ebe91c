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

// Dataset characterization: extractive fragments (coverage, density),
// novel n-gram ratios, compression ratio, per-subset reports and KDE series.

#ifndef LEXSUM_STATS_H_
#define LEXSUM_STATS_H_

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lexsum/corpus.h"
#include "lexsum/text.h"

namespace lexsum {

/// A maximal token run shared by the summary and the document.
struct Fragment {
  std::size_t summary_begin = 0;
  std::size_t document_begin = 0;
  std::size_t length = 0;
  friend bool operator==(const Fragment&, const Fragment&) = default;
};

/// Greedy left-to-right decomposition of `summary` into fragments.
///
/// At each summary position the longest run that also occurs in the document
/// is taken (earliest document position on ties) and the position advances
/// past it; a token that occurs nowhere in the document advances by one and
/// yields no fragment.
std::vector<Fragment> extractive_fragments(const TokenizedText& document,
                                           const TokenizedText& summary);
std::vector<Fragment> extractive_fragments(
    std::span<const std::string> document, std::span<const std::string> summary);

struct FragmentStats {
  std::vector<std::size_t> fragments;  // lengths
  double coverage = 0.0;               // Σ|f| / |S|
  double density = 0.0;                // Σ|f|² / |S|
  /// Document words / summary words; empty when the summary has no words.
  std::optional<double> compression;
};

/// Coverage and density over summary tokens; both 0 for an empty summary.
FragmentStats fragment_stats(const TokenizedText& document,
                             const TokenizedText& summary);

/// Percentage of summary n-gram instances whose n-gram never occurs in the
/// document. Empty when the summary has fewer than n tokens.
std::optional<double> novel_ngram_ratio(const TokenizedText& document,
                                        const TokenizedText& summary,
                                        std::size_t n);

/// Document word count over summary word count. Throws InvalidParameterError
/// when the summary has no words.
double compression_ratio(const TokenizedText& document,
                         const TokenizedText& summary);

/// Per-sample figures feeding a StatsReport.
struct SampleStats {
  std::string id;
  std::string jurisdiction;
  std::size_t doc_sentences = 0;
  std::size_t doc_words = 0;
  std::size_t sum_sentences = 0;
  std::size_t sum_words = 0;
  double coverage = 0.0;
  double density = 0.0;
  std::optional<double> compression;
  std::array<std::optional<double>, 4> novel;  // n = 1..4
};

SampleStats sample_stats(const CorpusSample& sample);

/// Sample means for one subset. Optional figures are averaged over the samples
/// where they are defined; `*_defined` counts those samples.
struct SubsetStats {
  std::string subset;
  std::size_t samples = 0;
  double doc_sentences = 0.0;
  double doc_words = 0.0;
  double sum_sentences = 0.0;
  double sum_words = 0.0;
  double coverage = 0.0;
  double density = 0.0;
  std::optional<double> compression;
  std::size_t compression_defined = 0;
  std::array<std::optional<double>, 4> novel;
  std::array<std::size_t, 4> novel_defined{};
};

struct StatsReport {
  std::vector<SubsetStats> subsets;  // ordered by subset tag
  std::vector<SampleStats> per_sample;
};

/// Statistics per jurisdiction tag. Throws InvalidParameterError for an empty
/// corpus. `jobs` > 1 computes per-sample figures on a worker pool.
StatsReport corpus_report(const std::vector<CorpusSample>& corpus,
                          std::size_t jobs = 1);

/// Means over already computed per-sample figures for one subset.
SubsetStats aggregate(const std::string& subset,
                      const std::vector<SampleStats>& samples);

/// Versioned JSON (`"schema": 1`); per-sample rows included when asked.
nlohmann::json to_json(const StatsReport& report, bool include_samples = true);
/// One header row plus one row per subset.
std::string to_csv(const StatsReport& report);

struct KdeSeries {
  std::vector<double> x;
  std::vector<double> density;
  double bandwidth = 0.0;
};

/// Silverman's rule of thumb, 0.9·min(σ, IQR/1.34)·n^(-1/5). Falls back to a
/// small positive width when the sample has no spread.
double silverman_bandwidth(const std::vector<double>& values);

/// Gaussian kernel density on `grid_points` evenly spaced points over
/// [min − tail·h, max + tail·h]. Throws InsufficientDataError for fewer than
/// two values and InvalidParameterError for grid_points < 2 or h <= 0.
KdeSeries kde_export(const std::vector<double>& values,
                     std::optional<double> bandwidth = std::nullopt,
                     std::size_t grid_points = 512, double tail = 4.0);

/// Trapezoid-rule integral of a series.
double trapezoid(const std::vector<double>& x, const std::vector<double>& y);

/// "x,density" header and rows.
std::string to_csv(const KdeSeries& series);

}  // namespace lexsum

#endif  // LEXSUM_STATS_H_
