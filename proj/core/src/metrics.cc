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


#include "lexsum/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "lexsum/error.h"
#include "lexsum/parallel.h"

using nlohmann::json;

namespace lexsum {
namespace {

constexpr double kWeightSumTolerance = 1e-9;

std::string join(const Ngram& phrase) {
  std::string out;
  for (const auto& t : phrase) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

Ngram split_phrase(const std::string& text) {
  Ngram out;
  std::istringstream in(text);
  for (std::string t; in >> t;) out.push_back(t);
  return out;
}

// Positions of each token, so phrase lookups only visit plausible starts.
using PositionIndex = std::unordered_map<std::string_view, std::vector<std::size_t>>;

PositionIndex index_positions(std::span<const std::string> tokens) {
  PositionIndex index;
  for (std::size_t i = 0; i < tokens.size(); ++i) index[tokens[i]].push_back(i);
  return index;
}

template <typename Visit>
void for_each_occurrence(std::span<const std::string> tokens, const PositionIndex& index,
                         const Ngram& phrase, Visit&& visit) {
  if (phrase.empty() || phrase.size() > tokens.size()) return;
  const auto it = index.find(phrase.front());
  if (it == index.end()) return;
  for (std::size_t start : it->second) {
    if (start + phrase.size() > tokens.size()) break;
    if (std::equal(phrase.begin() + 1, phrase.end(), tokens.begin() + start + 1)) {
      visit(start);
    }
  }
}

std::size_t count_occurrences(std::span<const std::string> tokens, const PositionIndex& index,
                              const Ngram& phrase) {
  std::size_t n = 0;
  for_each_occurrence(tokens, index, phrase, [&](std::size_t) { ++n; });
  return n;
}

json optional_to_json(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

std::string format_value(const std::optional<double>& v) {
  if (!v) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", *v);
  return buf;
}

}  // namespace

std::string to_string(RougeVariant variant) {
  switch (variant) {
    case RougeVariant::kR1:
      return "R1";
    case RougeVariant::kR2:
      return "R2";
    case RougeVariant::kRL:
      return "RL";
  }
  return "?";
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

RougeScore rouge_f1(std::span<const std::string> candidate,
                    std::span<const std::string> reference, RougeVariant variant) {
  RougeScore out;
  if (candidate.empty() || reference.empty()) {
    out.empty = true;
    return out;
  }
  double overlap = 0.0, cand_total = 0.0, ref_total = 0.0;
  if (variant == RougeVariant::kRL) {
    overlap = static_cast<double>(lcs_length(candidate, reference));
    cand_total = static_cast<double>(candidate.size());
    ref_total = static_cast<double>(reference.size());
  } else {
    const std::size_t n = variant == RougeVariant::kR1 ? 1 : 2;
    const NgramMultiset c = ngrams(candidate, n);
    const NgramMultiset r = ngrams(reference, n);
    overlap = static_cast<double>(NgramMultiset::clipped_overlap(c, r));
    cand_total = static_cast<double>(c.total());
    ref_total = static_cast<double>(r.total());
  }
  out.precision = cand_total > 0 ? 100.0 * overlap / cand_total : 0.0;
  out.recall = ref_total > 0 ? 100.0 * overlap / ref_total : 0.0;
  out.f1 = harmonic_f1(out.precision, out.recall);
  return out;
}

RougeScore rouge_f1(const TokenizedText& candidate, const TokenizedText& reference,
                    RougeVariant variant) {
  const auto c = word_tokens(candidate);
  const auto r = word_tokens(reference);
  return rouge_f1(c, r, variant);
}

LegalGlossary LegalGlossary::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read glossary: " + path);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#') continue;
    lines.push_back(line);
  }
  return from_phrases(lines, path);
}

LegalGlossary LegalGlossary::from_phrases(const std::vector<std::string>& phrases,
                                          std::string source) {
  LegalGlossary out;
  out.source = std::move(source);
  std::set<Ngram> seen;
  for (const auto& p : phrases) {
    Ngram tokens = tokenize(p).tokens;
    if (tokens.empty() || !seen.insert(tokens).second) continue;
    out.phrases.push_back(std::move(tokens));
  }
  return out;
}

IdfTable IdfTable::build(const std::vector<TokenizedText>& documents,
                         const LegalGlossary& glossary, std::size_t jobs) {
  IdfTable table;
  table.documents_ = documents.size();
  const auto present = parallel_map<std::vector<std::size_t>>(
      documents.size(), jobs, [&](std::size_t d) {
        const auto& tokens = documents[d].tokens;
        const PositionIndex index = index_positions(tokens);
        std::vector<std::size_t> hits;
        for (std::size_t p = 0; p < glossary.phrases.size(); ++p) {
          bool found = false;
          for_each_occurrence(tokens, index, glossary.phrases[p],
                              [&](std::size_t) { found = true; });
          if (found) hits.push_back(p);
        }
        return hits;
      });
  for (const auto& hits : present) {
    for (std::size_t p : hits) ++table.df_[glossary.phrases[p]];
  }
  return table;
}

std::size_t IdfTable::df(const Ngram& phrase) const {
  const auto it = df_.find(phrase);
  return it == df_.end() ? 0 : it->second;
}

double IdfTable::idf(const Ngram& phrase) const {
  return std::log((1.0 + static_cast<double>(documents_)) /
                  (1.0 + static_cast<double>(df(phrase)))) +
         1.0;
}

json IdfTable::to_json() const {
  std::vector<std::pair<std::string, std::size_t>> rows;
  for (const auto& [phrase, df] : df_) rows.emplace_back(join(phrase), df);
  std::sort(rows.begin(), rows.end());
  json entries = json::array();
  for (const auto& [phrase, df] : rows) entries.push_back({{"phrase", phrase}, {"df", df}});
  return {{"schema", 1}, {"documents", documents_}, {"df", entries}};
}

IdfTable IdfTable::from_json(const json& j) {
  if (j.value("schema", 0) != 1) throw InvalidParameterError("unsupported idf table schema");
  IdfTable table;
  table.documents_ = j.at("documents").get<std::size_t>();
  for (const auto& e : j.at("df")) {
    table.df_[split_phrase(e.at("phrase").get<std::string>())] = e.at("df").get<std::size_t>();
  }
  return table;
}

PhraseWeightTable select_top_phrases(const TokenizedText& candidate,
                                     const TokenizedText& reference,
                                     const LegalGlossary& glossary, const IdfTable& idf,
                                     std::size_t limit) {
  if (glossary.empty()) throw InvalidParameterError("phrase selection needs a glossary");
  const PositionIndex cand_index = index_positions(candidate.tokens);
  const PositionIndex ref_index = index_positions(reference.tokens);
  std::vector<std::pair<std::string, PhraseWeight>> scored;
  for (const auto& phrase : glossary.phrases) {
    const std::size_t tf = count_occurrences(candidate.tokens, cand_index, phrase) +
                           count_occurrences(reference.tokens, ref_index, phrase);
    if (tf == 0) continue;
    PhraseWeight w;
    w.phrase = phrase;
    w.tf = tf;
    w.idf = idf.idf(phrase);
    w.raw_score = static_cast<double>(tf) * w.idf;
    scored.emplace_back(join(phrase), std::move(w));
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.second.raw_score != b.second.raw_score) {
      return a.second.raw_score > b.second.raw_score;
    }
    return a.first < b.first;
  });
  if (scored.size() > limit) scored.resize(limit);

  PhraseWeightTable table;
  if (scored.empty()) return table;
  const double hi = scored.front().second.raw_score;
  const double lo = scored.back().second.raw_score;
  for (auto& [text, w] : scored) {
    w.normalized = hi > lo ? (w.raw_score - lo) / (hi - lo) : 1.0;
    table.entries.push_back(std::move(w));
  }
  return table;
}

std::vector<double> token_weights(std::span<const std::string> tokens,
                                  const PhraseWeightTable& table) {
  std::vector<double> weights(tokens.size(), 1.0);
  if (table.empty()) return weights;
  const PositionIndex index = index_positions(tokens);
  for (const auto& entry : table.entries) {
    const double w = 1.0 + std::exp(entry.normalized);
    for_each_occurrence(tokens, index, entry.phrase, [&](std::size_t start) {
      for (std::size_t k = start; k < start + entry.phrase.size(); ++k) {
        weights[k] = std::max(weights[k], w);
      }
    });
  }
  return weights;
}

double weighted_logprob(const LogProbResponse& response,
                        std::span<const double> word_weights, bool length_norm) {
  if (response.logprobs.empty()) throw ProtocolError("scorer returned no tokens");
  if (response.alignment.size() != response.logprobs.size()) {
    throw AlignmentError("alignment does not cover every scorer token");
  }
  const bool uniform = word_weights.empty();
  if (!uniform && word_weights.size() != response.target_words.token_count()) {
    throw AlignmentError("token weights cover " + std::to_string(word_weights.size()) +
                         " tokens but the target has " +
                         std::to_string(response.target_words.token_count()));
  }
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < response.logprobs.size(); ++k) {
    const std::size_t word = response.alignment[k];
    if (!uniform && word >= word_weights.size()) {
      throw AlignmentError("scorer token aligned past the last word token");
    }
    const double w = uniform ? 1.0 : word_weights[word];
    num += w * response.logprobs[k];
    den += w;
  }
  return length_norm ? num / den : num;
}

double seq_logprob_score(const std::string& candidate, const std::string& reference,
                         const ScorerClient& scorer, std::span<const double> word_weights,
                         bool length_norm) {
  return weighted_logprob(scorer.token_logprobs(candidate, reference), word_weights,
                          length_norm);
}

double harmonic_f1(double precision, double recall) {
  // 2s^2 / 2s can round away from s; equal inputs return s itself.
  if (precision == recall) return precision;
  const double sum = precision + recall;
  return sum == 0.0 ? 0.0 : 2.0 * precision * recall / sum;
}

void validate_model_weights(std::span<const double> weights, std::size_t scorers) {
  if (scorers == 0) throw InvalidParameterError("at least one scorer is required");
  if (weights.size() != scorers) {
    throw InvalidParameterError("expected " + std::to_string(scorers) +
                                " model weights, got " + std::to_string(weights.size()));
  }
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw InvalidParameterError("model weights must be finite and non-negative");
    }
    sum += w;
  }
  if (std::abs(sum - 1.0) > kWeightSumTolerance) {
    throw InvalidParameterError("model weights must sum to 1");
  }
}

LtScore ltscore(const std::string& candidate, const std::string& reference,
                std::span<const ScorerClient> scorers, std::span<const double> model_weights,
                const LegalGlossary& glossary, const IdfTable& idf,
                const LtScoreOptions& options) {
  validate_model_weights(model_weights, scorers.size());
  const TokenizedText cand = tokenize(candidate);
  const TokenizedText ref = tokenize(reference);
  if (cand.tokens.empty() || ref.tokens.empty()) {
    throw InvalidParameterError("candidate and reference must be non-empty");
  }
  std::vector<double> cand_weights, ref_weights;
  if (!glossary.empty()) {
    const PhraseWeightTable table =
        select_top_phrases(cand, ref, glossary, idf, options.top_phrases);
    if (!table.empty()) {
      cand_weights = token_weights(cand.tokens, table);
      ref_weights = token_weights(ref.tokens, table);
    }
  }
  LtScore out;
  for (std::size_t j = 0; j < scorers.size(); ++j) {
    double p = 0.0, r = 0.0;
    try {
      p = seq_logprob_score(candidate, reference, scorers[j], cand_weights,
                            options.length_norm);
      r = seq_logprob_score(reference, candidate, scorers[j], ref_weights,
                            options.length_norm);
    } catch (const Error& e) {
      throw PartialEnsembleError("scorer " + std::to_string(j) + " (" +
                                     scorers[j].model_id() + ") failed: " + e.what(),
                                 j);
    }
    out.precision += model_weights[j] * p;
    out.recall += model_weights[j] * r;
  }
  out.f1 = harmonic_f1(out.precision, out.recall);
  return out;
}

double fleiss_kappa(const std::vector<std::vector<std::string>>& ratings) {
  if (ratings.empty()) throw InvalidParameterError("kappa needs at least one item");
  const std::size_t raters = ratings.front().size();
  if (raters < 2) throw InvalidParameterError("kappa needs at least two raters per item");
  std::map<std::string, std::size_t> category_totals;
  double p_bar = 0.0;
  for (const auto& item : ratings) {
    if (item.size() != raters) {
      throw InvalidParameterError("every item must have the same number of raters");
    }
    std::map<std::string, std::size_t> counts;
    for (const auto& label : item) ++counts[label];
    double agree = 0.0;
    for (const auto& [label, c] : counts) {
      agree += static_cast<double>(c) * static_cast<double>(c - 1);
      category_totals[label] += c;
    }
    p_bar += agree / (static_cast<double>(raters) * static_cast<double>(raters - 1));
  }
  const double items = static_cast<double>(ratings.size());
  p_bar /= items;
  double p_e = 0.0;
  for (const auto& [label, total] : category_totals) {
    const double p = static_cast<double>(total) / (items * static_cast<double>(raters));
    p_e += p * p;
  }
  if (1.0 - p_e < 1e-12) return 1.0;
  return (p_bar - p_e) / (1.0 - p_e);
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidParameterError("pearson: length mismatch");
  if (x.size() < 2) return std::nullopt;
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0, xx = 0.0, yy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
    xx += x[i] * x[i];
    yy += y[i] * y[i];
  }
  // Constant columns leave only rounding noise in the centered sums.
  if (sxx <= 1e-20 * xx || syy <= 1e-20 * yy) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

void MetricReport::add_sample(const std::string& id, const std::map<std::string, double>& row) {
  for (const auto& [name, value] : row) {
    if (!metric_index(name)) {
      metrics.push_back(name);
      for (auto& v : values) v.emplace_back();
    }
  }
  std::vector<std::optional<double>> out(metrics.size());
  for (const auto& [name, value] : row) out[*metric_index(name)] = value;
  sample_ids.push_back(id);
  values.push_back(std::move(out));
}

std::optional<std::size_t> MetricReport::metric_index(const std::string& name) const {
  const auto it = std::find(metrics.begin(), metrics.end(), name);
  if (it == metrics.end()) return std::nullopt;
  return static_cast<std::size_t>(it - metrics.begin());
}

std::vector<std::optional<double>> MetricReport::aggregate() const {
  std::vector<std::optional<double>> out(metrics.size());
  for (std::size_t m = 0; m < metrics.size(); ++m) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& row : values) {
      if (row[m]) {
        sum += *row[m];
        ++n;
      }
    }
    if (n > 0) out[m] = sum / static_cast<double>(n);
  }
  return out;
}

json to_json(const MetricReport& report) {
  json aggregate = json::object();
  const auto means = report.aggregate();
  for (std::size_t m = 0; m < report.metrics.size(); ++m) {
    aggregate[report.metrics[m]] = optional_to_json(means[m]);
  }
  json samples = json::array();
  for (std::size_t s = 0; s < report.sample_ids.size(); ++s) {
    json values = json::object();
    for (std::size_t m = 0; m < report.metrics.size(); ++m) {
      values[report.metrics[m]] = optional_to_json(report.values[s][m]);
    }
    samples.push_back({{"id", report.sample_ids[s]}, {"values", values}});
  }
  return {{"schema", 1},           {"model", report.model},
          {"metrics", report.metrics}, {"metadata", report.metadata},
          {"aggregate", aggregate}, {"samples", samples}};
}

MetricReport metric_report_from_json(const json& j) {
  if (!j.is_object() || j.value("schema", 0) != 1) {
    throw InvalidParameterError("unsupported metric report schema");
  }
  MetricReport report;
  report.model = j.value("model", std::string());
  report.metrics = j.at("metrics").get<std::vector<std::string>>();
  report.metadata = j.value("metadata", json::object());
  for (const auto& s : j.at("samples")) {
    report.sample_ids.push_back(s.at("id").get<std::string>());
    std::vector<std::optional<double>> row(report.metrics.size());
    const auto& values = s.at("values");
    for (std::size_t m = 0; m < report.metrics.size(); ++m) {
      const auto it = values.find(report.metrics[m]);
      if (it != values.end() && it->is_number()) row[m] = it->get<double>();
    }
    report.values.push_back(std::move(row));
  }
  return report;
}

std::string to_csv(std::span<const MetricReport> reports) {
  static const char* const kColumns[] = {"R1",        "R2",        "RL",
                                         "LTScore_P", "LTScore_R", "LTScore_F1"};
  std::string out = "model";
  for (const char* c : kColumns) out += std::string(",") + c;
  out += '\n';
  for (const auto& report : reports) {
    const auto means = report.aggregate();
    out += report.model;
    for (const char* c : kColumns) {
      const auto m = report.metric_index(c);
      out += ',' + format_value(m ? means[*m] : std::nullopt);
    }
    out += '\n';
  }
  return out;
}

CorrelationMatrix metric_correlation(const MetricReport& report) {
  if (report.sample_ids.size() < 3) {
    throw InsufficientDataError("correlation needs at least 3 samples");
  }
  if (report.metrics.size() < 2) {
    throw InsufficientDataError("correlation needs at least 2 metrics");
  }
  const std::size_t k = report.metrics.size();
  CorrelationMatrix out;
  out.metrics = report.metrics;
  out.values.assign(k, std::vector<std::optional<double>>(k));
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a; b < k; ++b) {
      std::vector<double> x, y;
      for (const auto& row : report.values) {
        if (row[a] && row[b]) {
          x.push_back(*row[a]);
          y.push_back(*row[b]);
        }
      }
      std::optional<double> r;
      if (x.size() >= 3) r = pearson(x, y);
      if (r && a == b) r = 1.0;
      out.values[a][b] = out.values[b][a] = r;
    }
  }
  return out;
}

json to_json(const CorrelationMatrix& matrix) {
  json rows = json::array();
  for (const auto& row : matrix.values) {
    json r = json::array();
    for (const auto& v : row) r.push_back(optional_to_json(v));
    rows.push_back(r);
  }
  return {{"schema", 1}, {"metrics", matrix.metrics}, {"pearson", rows}};
}

std::string to_csv(const CorrelationMatrix& matrix) {
  std::string out = "metric";
  for (const auto& m : matrix.metrics) out += ',' + m;
  out += '\n';
  for (std::size_t a = 0; a < matrix.metrics.size(); ++a) {
    out += matrix.metrics[a];
    for (const auto& v : matrix.values[a]) out += ',' + format_value(v);
    out += '\n';
  }
  return out;
}

MetricReport evaluate_pairs(const std::string& model, const std::vector<EvalPair>& pairs,
                            std::span<const ScorerClient> scorers,
                            std::span<const double> model_weights,
                            const LegalGlossary& glossary, const IdfTable& idf,
                            const EvalOptions& options) {
  const bool model_based = options.ltscore || options.seq_score;
  if (model_based) validate_model_weights(model_weights, scorers.size());

  struct Row {
    std::map<std::string, double> values;
    bool empty_rouge = false;
    std::string failure;
    std::optional<std::size_t> failed_scorer;
  };
  const auto rows = parallel_map<Row>(pairs.size(), options.jobs, [&](std::size_t i) {
    Row row;
    const auto& pair = pairs[i];
    if (options.rouge) {
      const TokenizedText c = tokenize(pair.candidate);
      const TokenizedText r = tokenize(pair.reference);
      for (auto v : {RougeVariant::kR1, RougeVariant::kR2, RougeVariant::kRL}) {
        const RougeScore s = rouge_f1(c, r, v);
        row.values[to_string(v)] = s.f1;
        row.empty_rouge = row.empty_rouge || s.empty;
      }
    }
    try {
      if (options.ltscore) {
        const LtScore s = ltscore(pair.candidate, pair.reference, scorers, model_weights,
                                  glossary, idf, options.lt);
        row.values["LTScore_P"] = s.precision;
        row.values["LTScore_R"] = s.recall;
        row.values["LTScore_F1"] = s.f1;
      }
      if (options.seq_score) {
        const double one = 1.0;
        const LtScore s = ltscore(pair.candidate, pair.reference, scorers.first(1),
                                  std::span<const double>(&one, 1), LegalGlossary{}, idf,
                                  options.lt);
        row.values["SeqScore_F1"] = s.f1;
      }
    } catch (const PartialEnsembleError& e) {
      row.failure = e.what();
      row.failed_scorer = e.scorer_index();
    } catch (const InvalidParameterError& e) {
      row.failure = e.what();
    }
    return row;
  });

  MetricReport report;
  report.model = model;
  if (options.rouge) report.metrics = {"R1", "R2", "RL"};
  if (options.ltscore) {
    for (const char* m : {"LTScore_P", "LTScore_R", "LTScore_F1"}) report.metrics.push_back(m);
  }
  if (options.seq_score) report.metrics.push_back("SeqScore_F1");
  json failed = json::array();
  json empty = json::array();
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    report.add_sample(pairs[i].id, rows[i].values);
    if (!rows[i].failure.empty()) {
      json f = {{"id", pairs[i].id}, {"error", rows[i].failure}};
      if (rows[i].failed_scorer) f["scorer"] = *rows[i].failed_scorer;
      failed.push_back(f);
    }
    if (rows[i].empty_rouge) empty.push_back(pairs[i].id);
  }
  json scorer_meta = json::array();
  if (model_based) {
    for (std::size_t j = 0; j < scorers.size(); ++j) {
      scorer_meta.push_back({{"endpoint", scorers[j].handle().endpoint},
                             {"model_id", scorers[j].model_id()},
                             {"weight", model_weights[j]}});
    }
  }
  report.metadata = {{"samples", pairs.size()},
                     {"scorers", scorer_meta},
                     {"length_norm", options.lt.length_norm},
                     {"top_phrases", options.lt.top_phrases},
                     {"glossary", {{"source", glossary.source}, {"phrases", glossary.size()}}},
                     {"idf_documents", idf.documents()},
                     {"failed", failed},
                     {"empty_rouge", empty}};
  return report;
}

}  // namespace lexsum
