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

#include "lexsum/selection.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "lexsum/error.h"
#include "lexsum/parallel.h"

using nlohmann::json;

namespace lexsum {
namespace {

constexpr double kScoreTie = 1e-12;

// Word-type ids per sentence, plus term counts.
struct SentenceTerms {
  std::vector<std::vector<std::pair<std::size_t, double>>> counts;  // sorted by id
  std::vector<std::size_t> lengths;                                 // word tokens
  std::size_t vocabulary = 0;
};

SentenceTerms sentence_terms(const TokenizedText& doc) {
  SentenceTerms out;
  std::unordered_map<std::string_view, std::size_t> ids;
  for (const TokenSpan& s : doc.sentences) {
    std::map<std::size_t, double> tf;
    std::size_t len = 0;
    for (std::size_t t = s.begin; t < s.end; ++t) {
      const std::string& tok = doc.tokens[t];
      if (!is_word_token(tok)) continue;
      ++len;
      const auto [it, inserted] = ids.emplace(tok, ids.size());
      tf[it->second] += 1.0;
    }
    out.counts.emplace_back(tf.begin(), tf.end());
    out.lengths.push_back(len);
  }
  out.vocabulary = ids.size();
  return out;
}

void check_budget(std::size_t budget) {
  if (budget < 1) throw InvalidParameterError("selection budget must be >= 1");
}

SelectionResult ranked_selection(SelectionMethod method, const TokenizedText& doc,
                                 std::size_t budget, SentenceGraph graph) {
  SelectionResult r = take_ranked(doc, rank_sentences(graph.scores), budget);
  r.method = method;
  r.converged = graph.converged;
  r.iterations = graph.iterations;
  return r;
}

}  // namespace

std::string to_string(SelectionMethod method) {
  switch (method) {
    case SelectionMethod::kLead:
      return "lead";
    case SelectionMethod::kLexRank:
      return "lexrank";
    case SelectionMethod::kTextRank:
      return "textrank";
  }
  return "unknown";
}

SelectionMethod parse_selection_method(const std::string& name) {
  if (name == "lead") return SelectionMethod::kLead;
  if (name == "lexrank") return SelectionMethod::kLexRank;
  if (name == "textrank") return SelectionMethod::kTextRank;
  throw InvalidParameterError("unknown selection method: " + name);
}

SelectionResult lead(const TokenizedText& doc, std::size_t budget) {
  check_budget(budget);
  if (doc.sentence_count() == 0) throw InvalidParameterError("lead: empty document");
  SelectionResult r;
  r.method = SelectionMethod::kLead;
  r.budget = budget;
  std::vector<TokenSpan> ranges;
  std::size_t used = 0;
  for (std::size_t i = 0; i < doc.sentence_count(); ++i) {
    const TokenSpan s = doc.sentences[i];
    if (i == 0 && s.size() > budget) {
      r.selected.push_back(0);
      r.truncated = true;
      ranges.push_back({s.begin, s.begin + budget});
      break;
    }
    if (used + s.size() > budget) break;
    used += s.size();
    r.selected.push_back(i);
    ranges.push_back(s);
  }
  r.compressed_text = compose(doc, ranges);
  return r;
}

void SentenceGraph::connect(std::size_t i, std::size_t j, double w) {
  if (i == j || !(w > 0.0)) return;
  edges.at(i).emplace_back(j, w);
  edges.at(j).emplace_back(i, w);
}

double SentenceGraph::weight(std::size_t i, std::size_t j) const {
  for (const auto& [k, w] : edges.at(i)) {
    if (k == j) return w;
  }
  return 0.0;
}

std::vector<std::size_t> rank_sentences(const std::vector<double>& scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] != scores[b] ? scores[a] > scores[b] : a < b;
  });
  // Scores within kScoreTie of a run's leader count as ties and go back to
  // document order. Doing this after an exact sort keeps the comparator a
  // strict weak ordering.
  for (std::size_t b = 0; b < order.size();) {
    std::size_t e = b + 1;
    while (e < order.size() && scores[order[b]] - scores[order[e]] <= kScoreTie) ++e;
    std::sort(order.begin() + b, order.begin() + e);
    b = e;
  }
  return order;
}

SelectionResult take_ranked(const TokenizedText& doc,
                            const std::vector<std::size_t>& ranked,
                            std::size_t budget) {
  check_budget(budget);
  SelectionResult r;
  r.budget = budget;
  std::size_t used = 0;
  for (const std::size_t i : ranked) {
    const std::size_t len = doc.sentences.at(i).size();
    if (used + len <= budget) {
      used += len;
      r.selected.push_back(i);
    }
    if (used == budget) break;
  }
  std::vector<TokenSpan> ranges;
  if (r.selected.empty() && !ranked.empty()) {
    const TokenSpan top = doc.sentences[ranked.front()];
    r.selected.push_back(ranked.front());
    r.truncated = true;
    ranges.push_back({top.begin, top.begin + budget});
  } else {
    std::sort(r.selected.begin(), r.selected.end());
    for (const std::size_t i : r.selected) ranges.push_back(doc.sentences[i]);
  }
  r.compressed_text = compose(doc, ranges);
  return r;
}

void power_iteration(SentenceGraph& graph, const RankOptions& options) {
  const std::size_t n = graph.size;
  graph.scores.assign(n, n ? 1.0 / static_cast<double>(n) : 0.0);
  graph.converged = true;
  graph.iterations = 0;
  if (n == 0) return;
  std::vector<double> row_sum(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& [j, w] : graph.edges[i]) row_sum[i] += w;
  }
  const double d = options.damping;
  const double base = (1.0 - d) / static_cast<double>(n);
  std::vector<double> next(n);
  graph.converged = false;
  for (std::size_t it = 1; it <= options.max_iter; ++it) {
    double dangling = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (row_sum[j] <= 0.0) dangling += graph.scores[j];
    }
    const double spread = d * dangling / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (const auto& [j, w] : graph.edges[i]) acc += graph.scores[j] * w / row_sum[j];
      next[i] = base + spread + d * acc;
    }
    const double total = std::accumulate(next.begin(), next.end(), 0.0);
    double delta = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      next[i] /= total;
      delta += std::abs(next[i] - graph.scores[i]);
    }
    graph.scores.swap(next);
    graph.iterations = it;
    if (delta < options.epsilon) {
      graph.converged = true;
      break;
    }
  }
}

SentenceGraph lexrank_graph(const TokenizedText& doc, const RankOptions& options) {
  const SentenceTerms terms = sentence_terms(doc);
  const std::size_t n = doc.sentence_count();
  std::vector<double> df(terms.vocabulary, 0.0);
  for (const auto& row : terms.counts) {
    for (const auto& [id, c] : row) df[id] += 1.0;
  }
  // Smoothed idf keeps every term weight positive, even for one sentence.
  std::vector<double> idf(terms.vocabulary);
  for (std::size_t k = 0; k < idf.size(); ++k) {
    idf[k] = std::log((1.0 + static_cast<double>(n)) / (1.0 + df[k])) + 1.0;
  }
  std::vector<std::vector<std::pair<std::size_t, double>>> vec(n);
  std::vector<double> norm(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& [id, c] : terms.counts[i]) {
      const double w = c * idf[id];
      vec[i].emplace_back(id, w);
      norm[i] += w * w;
    }
    norm[i] = std::sqrt(norm[i]);
  }
  SentenceGraph g = SentenceGraph(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (norm[i] == 0.0 || norm[j] == 0.0) continue;
      double dot = 0.0;
      auto a = vec[i].begin();
      auto b = vec[j].begin();
      while (a != vec[i].end() && b != vec[j].end()) {
        if (a->first < b->first) {
          ++a;
        } else if (b->first < a->first) {
          ++b;
        } else {
          dot += a->second * b->second;
          ++a;
          ++b;
        }
      }
      const double sim = dot / (norm[i] * norm[j]);
      if (sim >= options.threshold) {
        g.connect(i, j, sim);
      }
    }
  }
  power_iteration(g, options);
  return g;
}

SentenceGraph textrank_graph(const TokenizedText& doc, const RankOptions& options) {
  const SentenceTerms terms = sentence_terms(doc);
  const std::size_t n = doc.sentence_count();
  SentenceGraph g = SentenceGraph(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      std::size_t shared = 0;
      auto a = terms.counts[i].begin();
      auto b = terms.counts[j].begin();
      while (a != terms.counts[i].end() && b != terms.counts[j].end()) {
        if (a->first < b->first) {
          ++a;
        } else if (b->first < a->first) {
          ++b;
        } else {
          ++shared;
          ++a;
          ++b;
        }
      }
      if (shared == 0) continue;
      double denom = std::log(static_cast<double>(terms.lengths[i])) +
                     std::log(static_cast<double>(terms.lengths[j]));
      if (denom <= 0.0) denom = 1.0;  // two one-word sentences
      const double sim = static_cast<double>(shared) / denom;
      g.connect(i, j, sim);
    }
  }
  power_iteration(g, options);
  return g;
}

SelectionResult lexrank(const TokenizedText& doc, std::size_t budget,
                        const RankOptions& options) {
  check_budget(budget);
  if (doc.sentence_count() == 0) throw InvalidParameterError("lexrank: empty document");
  return ranked_selection(SelectionMethod::kLexRank, doc, budget,
                          lexrank_graph(doc, options));
}

SelectionResult textrank(const TokenizedText& doc, std::size_t budget,
                         const RankOptions& options) {
  check_budget(budget);
  if (doc.sentence_count() == 0) throw InvalidParameterError("textrank: empty document");
  return ranked_selection(SelectionMethod::kTextRank, doc, budget,
                          textrank_graph(doc, options));
}

SelectionResult select(SelectionMethod method, const TokenizedText& doc,
                       std::size_t budget, const RankOptions& options) {
  switch (method) {
    case SelectionMethod::kLead:
      return lead(doc, budget);
    case SelectionMethod::kLexRank:
      return lexrank(doc, budget, options);
    case SelectionMethod::kTextRank:
      return textrank(doc, budget, options);
  }
  throw InvalidParameterError("unknown selection method");
}

RecallEval ngram_recall_eval(const TokenizedText& selected,
                             const TokenizedText& target) {
  const std::vector<std::string> target_words = word_tokens(target);
  if (target_words.empty()) throw InvalidParameterError("recall: empty target summary");
  const std::vector<std::string> selected_words = word_tokens(selected);
  RecallEval out;
  double sum = 0.0;
  std::size_t defined = 0;
  for (std::size_t k = 0; k < kRecallOrders.size(); ++k) {
    const std::size_t n = kRecallOrders[k];
    if (target_words.size() < n) {
      out.partial = true;
      continue;
    }
    const NgramMultiset tgt = ngrams(target_words, n);
    const NgramMultiset sel = ngrams(selected_words, n);
    const double r = 100.0 * static_cast<double>(NgramMultiset::clipped_overlap(sel, tgt)) /
                     static_cast<double>(tgt.total());
    out.recall[k] = r;
    sum += r;
    ++defined;
  }
  out.r_avg = sum / static_cast<double>(defined);
  return out;
}

MethodComparison choose_method(const std::vector<CorpusSample>& train,
                               std::size_t budget, std::size_t jobs,
                               const RankOptions& options) {
  if (train.empty()) throw InvalidParameterError("choose_method: empty training corpus");
  constexpr std::array<SelectionMethod, 3> kMethods = {
      SelectionMethod::kLead, SelectionMethod::kLexRank, SelectionMethod::kTextRank};
  struct Row {
    std::array<std::optional<double>, 3> r_avg, r1;
  };
  const auto rows = parallel_map<Row>(train.size(), jobs, [&](std::size_t i) {
    Row row;
    const TokenizedText doc = tokenize(train[i].document);
    const TokenizedText sum = tokenize(train[i].summary);
    if (doc.sentence_count() == 0 || word_count(sum) == 0) return row;
    for (std::size_t m = 0; m < kMethods.size(); ++m) {
      const SelectionResult sel = select(kMethods[m], doc, budget, options);
      const RecallEval ev = ngram_recall_eval(sel.compressed_text, sum);
      row.r_avg[m] = ev.r_avg;
      row.r1[m] = ev.r1();
    }
    return row;
  });
  MethodComparison cmp;
  for (const Row& row : rows) {
    if (!row.r_avg[0]) continue;
    ++cmp.samples;
    for (std::size_t m = 0; m < 3; ++m) {
      cmp.mean_r_avg[m] += *row.r_avg[m];
      cmp.mean_r1[m] += row.r1[m].value_or(0.0);
    }
  }
  if (cmp.samples == 0) throw InvalidParameterError("choose_method: no usable samples");
  for (std::size_t m = 0; m < 3; ++m) {
    cmp.mean_r_avg[m] /= static_cast<double>(cmp.samples);
    cmp.mean_r1[m] /= static_cast<double>(cmp.samples);
  }
  // Preference order on ties: lead, textrank, lexrank.
  constexpr std::array<std::size_t, 3> kPreference = {0, 2, 1};
  std::size_t best = kPreference[0];
  for (const std::size_t m : kPreference) {
    if (cmp.mean_r_avg[m] > cmp.mean_r_avg[best] + 1e-9) best = m;
  }
  cmp.chosen = kMethods[best];
  return cmp;
}

json to_json(const SelectionResult& result) {
  json j;
  j["method"] = to_string(result.method);
  j["budget"] = result.budget;
  j["selected"] = result.selected;
  j["truncated"] = result.truncated;
  j["converged"] = result.converged;
  j["iterations"] = result.iterations;
  j["compressed_tokens"] = result.compressed_text.token_count();
  j["compressed_text"] = result.compressed_text.raw;
  return j;
}

}  // namespace lexsum
