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


#include "lexsum/segment.h"

#include <algorithm>
#include <set>

#include "lexsum/error.h"

using nlohmann::json;

namespace lexsum {

SegmentPlan segment_document(const TokenizedText& doc, std::size_t max_len,
                             std::size_t overlap) {
  if (max_len <= overlap) {
    throw InvalidParameterError("segment length must exceed the overlap");
  }
  SegmentPlan plan;
  plan.max_len = max_len;
  plan.overlap = overlap;
  const std::size_t n = doc.token_count();
  if (n == 0) return plan;

  std::vector<std::size_t> boundaries;  // sentence ends, ascending
  boundaries.reserve(doc.sentence_count() + 1);
  for (const auto& s : doc.sentences) boundaries.push_back(s.end);
  if (boundaries.empty() || boundaries.back() != n) boundaries.push_back(n);

  std::size_t start = 0;
  while (true) {
    const std::size_t limit = std::min(start + max_len, n);
    // Furthest boundary <= limit.
    auto it = std::upper_bound(boundaries.begin(), boundaries.end(), limit);
    std::size_t end = limit;
    if (it != boundaries.begin() && *std::prev(it) > start + overlap) end = *std::prev(it);
    plan.segments.push_back({start, end});
    if (end == n) break;
    start = end - overlap;
  }
  return plan;
}

TargetAlignment align_targets(const TokenizedText& doc, const SegmentPlan& plan,
                              const TokenizedText& target) {
  if (plan.segments.empty()) throw InvalidParameterError("segment plan is empty");
  if (target.sentence_count() == 0) throw InvalidParameterError("target has no sentences");

  std::vector<NgramMultiset> segment_unigrams;
  segment_unigrams.reserve(plan.segments.size());
  for (const auto& seg : plan.segments) {
    if (seg.end > doc.token_count()) {
      throw InvalidParameterError("segment plan does not match the document");
    }
    const TokenizedText part = compose(doc, std::span<const TokenSpan>(&seg, 1));
    segment_unigrams.push_back(ngrams(word_tokens(part), 1));
  }

  TargetAlignment out;
  std::vector<std::vector<std::string>> assigned(plan.segments.size());
  for (std::size_t k = 0; k < target.sentence_count(); ++k) {
    const TokenizedText sentence = compose(target, std::span(&target.sentences[k], 1));
    const NgramMultiset words = ngrams(word_tokens(sentence), 1);
    std::size_t best = 0;
    std::size_t best_overlap = 0;
    for (std::size_t s = 0; s < segment_unigrams.size(); ++s) {
      // Recall shares its denominator across segments, so compare overlaps.
      const std::size_t o = NgramMultiset::clipped_overlap(words, segment_unigrams[s]);
      if (o > best_overlap) {
        best_overlap = o;
        best = s;
      }
    }
    out.assignment.push_back(best);
    assigned[best].emplace_back(target.sentence_text(k));
  }
  for (const auto& sentences : assigned) out.segment_targets.push_back(join_sentences(sentences));
  return out;
}

std::string merge_segments(const std::vector<std::string>& segment_summaries) {
  if (segment_summaries.empty()) throw InvalidParameterError("nothing to merge");
  std::set<std::vector<std::string>> seen;
  std::vector<std::string> kept;
  for (const auto& summary : segment_summaries) {
    const TokenizedText t = tokenize(summary);
    for (std::size_t i = 0; i < t.sentence_count(); ++i) {
      const auto& span = t.sentences[i];
      std::vector<std::string> key(t.tokens.begin() + span.begin, t.tokens.begin() + span.end);
      if (seen.insert(std::move(key)).second) kept.emplace_back(t.sentence_text(i));
    }
  }
  return join_sentences(kept);
}

std::vector<SegmentExample> segment_sample(const CorpusSample& sample, std::size_t max_len,
                                           std::size_t overlap) {
  const TokenizedText doc = tokenize(sample.document);
  const TokenizedText target = tokenize(sample.summary);
  const SegmentPlan plan = segment_document(doc, max_len, overlap);
  std::vector<SegmentExample> out;
  if (plan.segments.empty()) return out;
  const TargetAlignment alignment = align_targets(doc, plan, target);
  for (std::size_t s = 0; s < plan.segments.size(); ++s) {
    out.push_back({sample.id, s, std::string(doc.span_text(plan.segments[s])),
                   alignment.segment_targets[s]});
  }
  return out;
}

json to_json(const SegmentExample& example) {
  return {{"parent_id", example.parent_id},
          {"segment_index", example.segment_index},
          {"segment_text", example.segment_text},
          {"segment_target", example.segment_target}};
}

json to_json(const SegmentPlan& plan) {
  json spans = json::array();
  for (const auto& s : plan.segments) spans.push_back({s.begin, s.end});
  return {{"max_len", plan.max_len}, {"overlap", plan.overlap}, {"segments", spans}};
}

}  // namespace lexsum
