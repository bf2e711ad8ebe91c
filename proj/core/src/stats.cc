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

#include "lexsum/stats.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <unordered_map>

#include "lexsum/error.h"
#include "lexsum/parallel.h"

using nlohmann::json;

namespace lexsum {
namespace {

json optional_json(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

std::string optional_csv(const std::optional<double>& v) {
  if (!v) return "";
  std::ostringstream ss;
  ss.precision(6);
  ss << std::fixed << *v;
  return ss.str();
}

std::string fixed(double v) {
  std::ostringstream ss;
  ss.precision(6);
  ss << std::fixed << v;
  return ss.str();
}

double quantile(std::vector<double> sorted, double q) {
  // Linear interpolation between closest ranks.
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  return sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - static_cast<double>(lo));
}

}  // namespace

std::vector<Fragment> extractive_fragments(std::span<const std::string> document,
                                           std::span<const std::string> summary) {
  std::unordered_map<std::string_view, std::vector<std::size_t>> positions;
  for (std::size_t j = 0; j < document.size(); ++j) {
    positions[document[j]].push_back(j);
  }
  std::vector<Fragment> out;
  std::size_t i = 0;
  while (i < summary.size()) {
    const auto it = positions.find(summary[i]);
    std::size_t best_len = 0;
    std::size_t best_doc = 0;
    if (it != positions.end()) {
      const std::size_t remaining = summary.size() - i;
      for (const std::size_t j : it->second) {
        std::size_t k = 1;
        while (k < remaining && j + k < document.size() &&
               summary[i + k] == document[j + k]) {
          ++k;
        }
        if (k > best_len) {
          best_len = k;
          best_doc = j;
          if (best_len == remaining) break;
        }
      }
    }
    if (best_len == 0) {
      ++i;
      continue;
    }
    out.push_back({i, best_doc, best_len});
    i += best_len;
  }
  return out;
}

std::vector<Fragment> extractive_fragments(const TokenizedText& document,
                                           const TokenizedText& summary) {
  return extractive_fragments(std::span<const std::string>(document.tokens),
                              std::span<const std::string>(summary.tokens));
}

FragmentStats fragment_stats(const TokenizedText& document,
                             const TokenizedText& summary) {
  FragmentStats st;
  const auto frags = extractive_fragments(document, summary);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (const auto& f : frags) {
    st.fragments.push_back(f.length);
    const auto len = static_cast<double>(f.length);
    sum += len;
    sum_sq += len * len;
  }
  const auto s = static_cast<double>(summary.token_count());
  if (s > 0) {
    st.coverage = sum / s;
    st.density = sum_sq / s;
  }
  if (word_count(summary) > 0) st.compression = compression_ratio(document, summary);
  return st;
}

std::optional<double> novel_ngram_ratio(const TokenizedText& document,
                                        const TokenizedText& summary,
                                        std::size_t n) {
  if (n == 0) throw InvalidParameterError("n-gram order must be >= 1");
  if (summary.token_count() < n) return std::nullopt;
  const NgramMultiset doc = ngrams(document, n);
  const NgramMultiset sum = ngrams(summary, n);
  std::size_t novel = 0;
  for (const auto& [gram, count] : sum.counts()) {
    if (!doc.contains(gram)) novel += count;
  }
  return 100.0 * static_cast<double>(novel) / static_cast<double>(sum.total());
}

double compression_ratio(const TokenizedText& document,
                         const TokenizedText& summary) {
  const std::size_t sw = word_count(summary);
  if (sw == 0) throw InvalidParameterError("compression ratio: summary has no words");
  return static_cast<double>(word_count(document)) / static_cast<double>(sw);
}

SampleStats sample_stats(const CorpusSample& sample) {
  const TokenizedText doc = tokenize(sample.document);
  const TokenizedText sum = tokenize(sample.summary);
  SampleStats st;
  st.id = sample.id;
  st.jurisdiction = sample.jurisdiction;
  st.doc_sentences = doc.sentence_count();
  st.doc_words = word_count(doc);
  st.sum_sentences = sum.sentence_count();
  st.sum_words = word_count(sum);
  const FragmentStats fs = fragment_stats(doc, sum);
  st.coverage = fs.coverage;
  st.density = fs.density;
  st.compression = fs.compression;
  for (std::size_t n = 1; n <= 4; ++n) {
    st.novel[n - 1] = novel_ngram_ratio(doc, sum, n);
  }
  return st;
}

SubsetStats aggregate(const std::string& subset,
                      const std::vector<SampleStats>& samples) {
  SubsetStats agg;
  agg.subset = subset;
  agg.samples = samples.size();
  if (samples.empty()) return agg;
  double compression = 0.0;
  std::array<double, 4> novel{};
  for (const auto& s : samples) {
    agg.doc_sentences += static_cast<double>(s.doc_sentences);
    agg.doc_words += static_cast<double>(s.doc_words);
    agg.sum_sentences += static_cast<double>(s.sum_sentences);
    agg.sum_words += static_cast<double>(s.sum_words);
    agg.coverage += s.coverage;
    agg.density += s.density;
    if (s.compression) {
      compression += *s.compression;
      ++agg.compression_defined;
    }
    for (std::size_t k = 0; k < 4; ++k) {
      if (s.novel[k]) {
        novel[k] += *s.novel[k];
        ++agg.novel_defined[k];
      }
    }
  }
  const auto n = static_cast<double>(samples.size());
  agg.doc_sentences /= n;
  agg.doc_words /= n;
  agg.sum_sentences /= n;
  agg.sum_words /= n;
  agg.coverage /= n;
  agg.density /= n;
  if (agg.compression_defined) {
    agg.compression = compression / static_cast<double>(agg.compression_defined);
  }
  for (std::size_t k = 0; k < 4; ++k) {
    if (agg.novel_defined[k]) {
      agg.novel[k] = novel[k] / static_cast<double>(agg.novel_defined[k]);
    }
  }
  return agg;
}

StatsReport corpus_report(const std::vector<CorpusSample>& corpus, std::size_t jobs) {
  if (corpus.empty()) throw InvalidParameterError("corpus_report: empty corpus");
  StatsReport report;
  report.per_sample = parallel_map<SampleStats>(
      corpus.size(), jobs, [&](std::size_t i) { return sample_stats(corpus[i]); });
  std::map<std::string, std::vector<SampleStats>> groups;
  for (const auto& s : report.per_sample) groups[s.jurisdiction].push_back(s);
  for (const auto& [tag, rows] : groups) report.subsets.push_back(aggregate(tag, rows));
  return report;
}

json to_json(const StatsReport& report, bool include_samples) {
  json j;
  j["schema"] = 1;
  j["aggregation"] = "sample-mean";
  j["subsets"] = json::array();
  for (const auto& s : report.subsets) {
    json row;
    row["subset"] = s.subset;
    row["samples"] = s.samples;
    row["doc_sentences"] = s.doc_sentences;
    row["doc_words"] = s.doc_words;
    row["sum_sentences"] = s.sum_sentences;
    row["sum_words"] = s.sum_words;
    row["density"] = s.density;
    row["coverage"] = s.coverage;
    row["compression"] = optional_json(s.compression);
    json novel = json::object();
    for (std::size_t k = 0; k < 4; ++k) {
      novel[std::to_string(k + 1)] = optional_json(s.novel[k]);
    }
    row["novel_ngrams_pct"] = novel;
    j["subsets"].push_back(row);
  }
  if (include_samples) {
    j["samples"] = json::array();
    for (const auto& s : report.per_sample) {
      json row;
      row["id"] = s.id;
      row["subset"] = s.jurisdiction;
      row["doc_sentences"] = s.doc_sentences;
      row["doc_words"] = s.doc_words;
      row["sum_sentences"] = s.sum_sentences;
      row["sum_words"] = s.sum_words;
      row["density"] = s.density;
      row["coverage"] = s.coverage;
      row["compression"] = optional_json(s.compression);
      json novel = json::array();
      for (const auto& v : s.novel) novel.push_back(optional_json(v));
      row["novel_ngrams_pct"] = novel;
      j["samples"].push_back(row);
    }
  }
  return j;
}

std::string to_csv(const StatsReport& report) {
  std::ostringstream out;
  out << "subset,samples,doc_sents,doc_words,sum_sents,sum_words,density,"
         "coverage,compression,novel_1,novel_2,novel_3,novel_4\n";
  for (const auto& s : report.subsets) {
    out << s.subset << ',' << s.samples << ',' << fixed(s.doc_sentences) << ','
        << fixed(s.doc_words) << ',' << fixed(s.sum_sentences) << ','
        << fixed(s.sum_words) << ',' << fixed(s.density) << ','
        << fixed(s.coverage) << ',' << optional_csv(s.compression);
    for (const auto& v : s.novel) out << ',' << optional_csv(v);
    out << '\n';
  }
  return out.str();
}

double silverman_bandwidth(const std::vector<double>& values) {
  if (values.size() < 2) throw InsufficientDataError("bandwidth needs >= 2 values");
  const auto n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / (n - 1.0));
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  const double iqr = quantile(sorted, 0.75) - quantile(sorted, 0.25);
  double spread = sd;
  if (iqr > 0) spread = std::min(sd, iqr / 1.34);
  const double h = 0.9 * spread * std::pow(n, -0.2);
  if (h > 0) return h;
  return 1e-2 * std::max(1.0, std::abs(mean));
}

KdeSeries kde_export(const std::vector<double>& values,
                     std::optional<double> bandwidth, std::size_t grid_points,
                     double tail) {
  if (values.size() < 2) throw InsufficientDataError("KDE needs >= 2 values");
  if (grid_points < 2) throw InvalidParameterError("KDE grid needs >= 2 points");
  const double h = bandwidth ? *bandwidth : silverman_bandwidth(values);
  if (!(h > 0)) throw InvalidParameterError("KDE bandwidth must be > 0");
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  const double lo = *mn - tail * h;
  const double hi = *mx + tail * h;
  KdeSeries out;
  out.bandwidth = h;
  out.x.resize(grid_points);
  out.density.resize(grid_points);
  const double step = (hi - lo) / static_cast<double>(grid_points - 1);
  const double norm =
      1.0 / (static_cast<double>(values.size()) * h * std::sqrt(2.0 * std::numbers::pi));
  for (std::size_t g = 0; g < grid_points; ++g) {
    const double x = g + 1 == grid_points ? hi : lo + step * static_cast<double>(g);
    double acc = 0.0;
    for (double v : values) {
      const double u = (x - v) / h;
      acc += std::exp(-0.5 * u * u);
    }
    out.x[g] = x;
    out.density[g] = acc * norm;
  }
  return out;
}

double trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
  double area = 0.0;
  for (std::size_t i = 1; i < x.size() && i < y.size(); ++i) {
    area += 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
  }
  return area;
}

std::string to_csv(const KdeSeries& series) {
  std::ostringstream out;
  out.precision(10);
  out << "x,density\n";
  for (std::size_t i = 0; i < series.x.size(); ++i) {
    out << series.x[i] << ',' << series.density[i] << '\n';
  }
  return out.str();
}

}  // namespace lexsum
