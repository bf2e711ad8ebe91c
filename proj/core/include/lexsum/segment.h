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


// Divide-and-conquer handling of long documents: sentence-aligned segment
// plans, per-segment training targets and merging of segment summaries.

#ifndef LEXSUM_SEGMENT_H_
#define LEXSUM_SEGMENT_H_

#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lexsum/corpus.h"
#include "lexsum/text.h"

namespace lexsum {

inline constexpr std::size_t kDefaultSegmentLength = 2048;
inline constexpr std::size_t kDefaultSegmentOverlap = 128;

struct SegmentPlan {
  /// Ordered token spans over the document; each at most max_len long and
  /// starting `overlap` tokens before the previous one ends.
  std::vector<TokenSpan> segments;
  std::size_t max_len = kDefaultSegmentLength;
  std::size_t overlap = kDefaultSegmentOverlap;
};

/// Each segment ends at the furthest sentence boundary that keeps it within
/// max_len and still moves past the overlap. Without such a boundary the
/// segment is cut at max_len. Throws InvalidParameterError unless
/// max_len > overlap. An empty document gives an empty plan.
SegmentPlan segment_document(const TokenizedText& doc, std::size_t max_len,
                             std::size_t overlap);

/// For every target sentence, the segment with the highest clipped unigram
/// recall of that sentence (earliest segment on ties).
/// assignment[k] is the segment of target sentence k.
struct TargetAlignment {
  std::vector<std::size_t> assignment;
  /// Per segment, its assigned sentences joined in original order.
  std::vector<std::string> segment_targets;
};

/// Throws InvalidParameterError for a target without sentences or an empty
/// plan.
TargetAlignment align_targets(const TokenizedText& doc, const SegmentPlan& plan,
                              const TokenizedText& target);

/// Concatenates segment summaries in order, dropping sentences whose token
/// sequence already appeared. Throws InvalidParameterError for no input.
std::string merge_segments(const std::vector<std::string>& segment_summaries);

struct SegmentExample {
  std::string parent_id;
  std::size_t segment_index = 0;
  std::string segment_text;
  std::string segment_target;
};

/// Training pairs for one sample: every segment with its aligned target
/// (possibly empty).
std::vector<SegmentExample> segment_sample(const CorpusSample& sample, std::size_t max_len,
                                           std::size_t overlap);

nlohmann::json to_json(const SegmentExample& example);
nlohmann::json to_json(const SegmentPlan& plan);

}  // namespace lexsum

#endif  // LEXSUM_SEGMENT_H_
