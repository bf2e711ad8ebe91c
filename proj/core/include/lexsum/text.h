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

// Word tokenization, sentence segmentation and n-gram counting. Every other
// module sees text only through TokenizedText.

#ifndef LEXSUM_TEXT_H_
#define LEXSUM_TEXT_H_

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace lexsum {

/// Half-open range [begin, end) over token indices.
struct TokenSpan {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool empty() const { return end == begin; }
  friend bool operator==(const TokenSpan&, const TokenSpan&) = default;
};

/// Half-open byte range into the raw text a token came from.
struct CharSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  friend bool operator==(const CharSpan&, const CharSpan&) = default;
};

/// Canonical token/sentence view of a document or summary.
///
/// `tokens[i]` is the lowercased form of `raw.substr(offsets[i])`. Sentence
/// spans are contiguous, non-overlapping and cover every token.
struct TokenizedText {
  std::string raw;
  std::vector<std::string> tokens;
  std::vector<CharSpan> offsets;
  std::vector<TokenSpan> sentences;

  std::size_t token_count() const { return tokens.size(); }
  std::size_t sentence_count() const { return sentences.size(); }

  /// Raw text of sentence `i`, from its first token to its last.
  std::string_view sentence_text(std::size_t i) const;
  /// Raw text covered by a token span (empty for an empty span).
  std::string_view span_text(TokenSpan span) const;
};

/// Abbreviations whose trailing period never ends a sentence. Entries are
/// lowercase and carry no period ("mr", "v", "para").
class AbbreviationList {
 public:
  /// Mr., Mrs., Dr., No., v., para., s. and a few common legal forms.
  static const AbbreviationList& defaults();

  AbbreviationList() = default;
  explicit AbbreviationList(std::vector<std::string> entries);

  /// One abbreviation per line; '#' starts a comment; trailing '.' optional.
  static AbbreviationList from_file(const std::string& path);

  bool contains(std::string_view lowercase_token) const;
  void add(std::string entry);
  std::size_t size() const { return entries_.size(); }

 private:
  std::unordered_set<std::string> entries_;
};

/// Splits `text` into lowercased word and punctuation tokens and groups them
/// into sentences.
///
/// A word is a run of letters/digits (any non-ASCII code point that is not a
/// known punctuation mark counts as a letter); an apostrophe or hyphen between
/// two word characters and a '.' or ',' between two digits stay inside the
/// word. Every other visible character is its own token. A sentence ends at
/// '.', '!' or '?' (plus closing quotes/brackets) followed by whitespace and an
/// uppercase letter, optionally behind an opening quote or bracket; a '.'
/// directly after an abbreviation does not end a sentence. A blank line also
/// ends a sentence. Only ASCII letters are case-folded.
TokenizedText tokenize(std::string_view text,
                       const AbbreviationList& abbreviations =
                           AbbreviationList::defaults());

/// Tokens joined by single spaces.
std::string detokenize(std::span<const std::string> tokens);

/// True when the token contains at least one letter or digit.
bool is_word_token(std::string_view token);

/// Number of word tokens (punctuation excluded). Used for all "word" counts.
std::size_t word_count(const TokenizedText& text);

/// Tokens with punctuation removed, in order.
std::vector<std::string> word_tokens(const TokenizedText& text);

/// Builds a TokenizedText made of the given token ranges of `source`, in the
/// order given. Each range is cut at the source's sentence boundaries so the
/// result keeps the source's sentence structure; ranges are joined with a
/// single space in `raw`.
TokenizedText compose(const TokenizedText& source,
                      std::span<const TokenSpan> ranges);

/// Joins sentence texts with a space where the tokenizer still sees the
/// boundary between them, and with a blank line where it would not.
std::string join_sentences(std::span<const std::string> sentences,
                           const AbbreviationList& abbreviations =
                               AbbreviationList::defaults());

using Ngram = std::vector<std::string>;

struct NgramHash {
  std::size_t operator()(const Ngram& ngram) const noexcept;
};

/// Multiset of contiguous token windows of one order.
class NgramMultiset {
 public:
  using Counts = std::unordered_map<Ngram, std::size_t, NgramHash>;

  explicit NgramMultiset(std::size_t n) : n_(n) {}

  std::size_t order() const { return n_; }
  const Counts& counts() const { return counts_; }
  /// Occurrences of `ngram`; 0 when absent.
  std::size_t count(const Ngram& ngram) const;
  bool contains(const Ngram& ngram) const { return counts_.contains(ngram); }
  /// Sum of all counts (number of windows).
  std::size_t total() const { return total_; }
  std::size_t distinct() const { return counts_.size(); }
  bool empty() const { return total_ == 0; }

  void add(Ngram ngram, std::size_t times = 1);

  /// Σ min(count_a, count_b) over shared n-grams.
  static std::size_t clipped_overlap(const NgramMultiset& a,
                                     const NgramMultiset& b);

 private:
  std::size_t n_;
  std::size_t total_ = 0;
  Counts counts_;
};

/// All windows of length n over `tokens`. Throws InvalidParameterError for
/// n == 0.
NgramMultiset ngrams(std::span<const std::string> tokens, std::size_t n);
NgramMultiset ngrams(const TokenizedText& text, std::size_t n);

/// Starting positions of every occurrence of `phrase` in `tokens`.
std::vector<std::size_t> find_occurrences(std::span<const std::string> tokens,
                                          std::span<const std::string> phrase);

}  // namespace lexsum

#endif  // LEXSUM_TEXT_H_
