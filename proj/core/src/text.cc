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

#include "lexsum/text.h"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "lexsum/error.h"

namespace lexsum {
namespace {

enum class CharClass { kSpace, kWord, kPunct };

struct CodePoint {
  char32_t value = 0;
  std::size_t length = 1;
};

// Decodes one UTF-8 sequence; malformed bytes decode as themselves, length 1.
CodePoint decode(std::string_view s, std::size_t pos) {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  if (b0 < 0x80) return {b0, 1};
  std::size_t len = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    return {b0, 1};
  }
  if (pos + len > s.size()) return {b0, 1};
  for (std::size_t k = 1; k < len; ++k) {
    const auto b = static_cast<unsigned char>(s[pos + k]);
    if ((b & 0xC0) != 0x80) return {b0, 1};
    cp = (cp << 6) | (b & 0x3F);
  }
  return {cp, len};
}

CharClass classify(char32_t cp) {
  if (cp < 0x80) {
    if (cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == '\f' ||
        cp == '\v') {
      return CharClass::kSpace;
    }
    if ((cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') ||
        (cp >= 'A' && cp <= 'Z')) {
      return CharClass::kWord;
    }
    // Control characters are treated as whitespace.
    if (cp < 0x20 || cp == 0x7F) return CharClass::kSpace;
    return CharClass::kPunct;
  }
  if (cp == 0x00A0 || (cp >= 0x2000 && cp <= 0x200B) || cp == 0x2028 ||
      cp == 0x2029 || cp == 0x202F || cp == 0x205F || cp == 0x3000 ||
      cp == 0xFEFF) {
    return CharClass::kSpace;
  }
  if ((cp >= 0x00A1 && cp <= 0x00BF) || cp == 0x00D7 || cp == 0x00F7 ||
      (cp >= 0x2010 && cp <= 0x2027) || (cp >= 0x2030 && cp <= 0x205E) ||
      (cp >= 0x3001 && cp <= 0x3003)) {
    return CharClass::kPunct;
  }
  return CharClass::kWord;
}

bool is_digit(char32_t cp) { return cp >= '0' && cp <= '9'; }

bool is_joiner(char32_t cp) {
  return cp == '\'' || cp == '-' || cp == 0x2019;
}

bool is_terminal(std::string_view tok) {
  return tok == "." || tok == "!" || tok == "?";
}

bool is_closer(std::string_view tok) {
  return tok == "\"" || tok == "'" || tok == ")" || tok == "]" ||
         tok == "\xE2\x80\x9D" /* ” */ || tok == "\xE2\x80\x99" /* ’ */;
}

bool is_opener(char32_t cp) {
  return cp == '"' || cp == '\'' || cp == '(' || cp == '[' || cp == 0x201C ||
         cp == 0x2018;
}

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

// True when the gap text contains a blank line.
bool has_blank_line(std::string_view gap) {
  std::size_t newlines = 0;
  for (char c : gap) {
    if (c == '\n') {
      if (++newlines >= 2) return true;
    } else if (c != ' ' && c != '\t' && c != '\r') {
      newlines = 0;
    }
  }
  return false;
}

// After position `pos`: whitespace, optional opener, then an uppercase letter.
bool starts_new_sentence(std::string_view raw, std::size_t pos) {
  std::size_t i = pos;
  bool saw_space = false;
  while (i < raw.size()) {
    const CodePoint cp = decode(raw, i);
    if (classify(cp.value) != CharClass::kSpace) break;
    saw_space = true;
    i += cp.length;
  }
  if (!saw_space || i >= raw.size()) return false;
  CodePoint cp = decode(raw, i);
  if (is_opener(cp.value)) {
    i += cp.length;
    if (i >= raw.size()) return false;
    cp = decode(raw, i);
  }
  return cp.value >= 'A' && cp.value <= 'Z';
}

}  // namespace

std::string_view TokenizedText::sentence_text(std::size_t i) const {
  return span_text(sentences.at(i));
}

std::string_view TokenizedText::span_text(TokenSpan span) const {
  if (span.empty()) return {};
  const std::size_t b = offsets.at(span.begin).begin;
  const std::size_t e = offsets.at(span.end - 1).end;
  return std::string_view(raw).substr(b, e - b);
}

const AbbreviationList& AbbreviationList::defaults() {
  static const AbbreviationList list(
      {"mr", "mrs", "ms", "dr", "no", "v", "vs", "para", "paras", "s", "ss",
       "art", "cf", "etc", "j", "jj", "lj", "ljj", "cj", "pp",
       "p", "st", "co", "ltd", "inc"});
  return list;
}

AbbreviationList::AbbreviationList(std::vector<std::string> entries) {
  for (auto& e : entries) add(std::move(e));
}

AbbreviationList AbbreviationList::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read abbreviation list: " + path);
  AbbreviationList list;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string entry;
    if (fields >> entry) list.add(entry);
  }
  return list;
}

bool AbbreviationList::contains(std::string_view lowercase_token) const {
  return entries_.contains(std::string(lowercase_token));
}

void AbbreviationList::add(std::string entry) {
  while (!entry.empty() && entry.back() == '.') entry.pop_back();
  if (!entry.empty()) entries_.insert(ascii_lower(entry));
}

TokenizedText tokenize(std::string_view text,
                       const AbbreviationList& abbreviations) {
  TokenizedText out;
  out.raw = std::string(text);
  const std::string_view raw = out.raw;

  std::size_t pos = 0;
  while (pos < raw.size()) {
    const CodePoint cp = decode(raw, pos);
    const CharClass cls = classify(cp.value);
    if (cls == CharClass::kSpace) {
      pos += cp.length;
      continue;
    }
    const std::size_t start = pos;
    pos += cp.length;
    if (cls == CharClass::kWord) {
      char32_t prev = cp.value;
      while (pos < raw.size()) {
        const CodePoint next = decode(raw, pos);
        if (classify(next.value) == CharClass::kWord) {
          prev = next.value;
          pos += next.length;
          continue;
        }
        const std::size_t after = pos + next.length;
        if (after >= raw.size()) break;
        const CodePoint follow = decode(raw, after);
        const bool joins =
            (is_joiner(next.value) &&
             classify(follow.value) == CharClass::kWord) ||
            ((next.value == '.' || next.value == ',') && is_digit(prev) &&
             is_digit(follow.value));
        if (!joins) break;
        prev = follow.value;
        pos = after + follow.length;
      }
    }
    out.offsets.push_back({start, pos});
    out.tokens.push_back(ascii_lower(raw.substr(start, pos - start)));
  }

  const std::size_t n = out.tokens.size();
  std::size_t sentence_start = 0;
  for (std::size_t i = 0; i < n; ++i) {
    bool boundary = false;
    std::size_t last = i;
    if (is_terminal(out.tokens[i])) {
      const bool abbreviated =
          out.tokens[i] == "." && i > 0 && is_word_token(out.tokens[i - 1]) &&
          out.offsets[i - 1].end == out.offsets[i].begin &&
          abbreviations.contains(out.tokens[i - 1]);
      if (!abbreviated) {
        while (last + 1 < n &&
               out.offsets[last + 1].begin == out.offsets[last].end &&
               (is_terminal(out.tokens[last + 1]) ||
                is_closer(out.tokens[last + 1]))) {
          ++last;
        }
        boundary = last + 1 < n && starts_new_sentence(raw, out.offsets[last].end);
      }
    }
    if (!boundary && last + 1 < n) {
      const std::size_t gap_begin = out.offsets[last].end;
      const std::size_t gap_end = out.offsets[last + 1].begin;
      boundary = has_blank_line(raw.substr(gap_begin, gap_end - gap_begin));
    }
    if (boundary || last + 1 == n) {
      out.sentences.push_back({sentence_start, last + 1});
      sentence_start = last + 1;
    }
    i = last;
  }
  return out;
}

std::string detokenize(std::span<const std::string> tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

bool is_word_token(std::string_view token) {
  std::size_t pos = 0;
  while (pos < token.size()) {
    const CodePoint cp = decode(token, pos);
    if (classify(cp.value) == CharClass::kWord) return true;
    pos += cp.length;
  }
  return false;
}

std::size_t word_count(const TokenizedText& text) {
  return static_cast<std::size_t>(std::count_if(
      text.tokens.begin(), text.tokens.end(),
      [](const std::string& t) { return is_word_token(t); }));
}

std::vector<std::string> word_tokens(const TokenizedText& text) {
  std::vector<std::string> out;
  out.reserve(text.tokens.size());
  for (const auto& t : text.tokens) {
    if (is_word_token(t)) out.push_back(t);
  }
  return out;
}

TokenizedText compose(const TokenizedText& source,
                      std::span<const TokenSpan> ranges) {
  TokenizedText out;
  for (const TokenSpan& range : ranges) {
    if (range.end > source.token_count() || range.begin > range.end) {
      throw InvalidParameterError("compose: token range out of bounds");
    }
    if (range.empty()) continue;
    if (!out.raw.empty()) out.raw += ' ';
    const std::size_t base = out.raw.size();
    const std::size_t src_base = source.offsets[range.begin].begin;
    out.raw += source.span_text(range);
    const std::size_t first_out = out.tokens.size();
    for (std::size_t t = range.begin; t < range.end; ++t) {
      out.tokens.push_back(source.tokens[t]);
      out.offsets.push_back({source.offsets[t].begin - src_base + base,
                             source.offsets[t].end - src_base + base});
    }
    for (const TokenSpan& s : source.sentences) {
      const std::size_t b = std::max(s.begin, range.begin);
      const std::size_t e = std::min(s.end, range.end);
      if (b < e) {
        out.sentences.push_back(
            {first_out + (b - range.begin), first_out + (e - range.begin)});
      }
    }
  }
  return out;
}

std::string join_sentences(std::span<const std::string> sentences,
                           const AbbreviationList& abbreviations) {
  std::string out;
  std::size_t prev_count = 0;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    const std::size_t count = tokenize(sentences[i], abbreviations).sentence_count();
    if (i > 0) {
      // Boundary detection only looks at neighbouring tokens, so checking the
      // pair is enough.
      const std::size_t joined =
          tokenize(sentences[i - 1] + " " + sentences[i], abbreviations).sentence_count();
      out += joined == prev_count + count ? " " : "\n\n";
    }
    out += sentences[i];
    prev_count = count;
  }
  return out;
}

std::size_t NgramHash::operator()(const Ngram& ngram) const noexcept {
  std::size_t h = 0xcbf29ce484222325ULL;
  for (const auto& tok : ngram) {
    h ^= std::hash<std::string>{}(tok) + 0x9e3779b97f4a7c15ULL + (h << 6) +
         (h >> 2);
  }
  return h;
}

std::size_t NgramMultiset::count(const Ngram& ngram) const {
  const auto it = counts_.find(ngram);
  return it == counts_.end() ? 0 : it->second;
}

void NgramMultiset::add(Ngram ngram, std::size_t times) {
  if (ngram.size() != n_) {
    throw InvalidParameterError("n-gram length does not match multiset order");
  }
  if (times == 0) return;
  counts_[std::move(ngram)] += times;
  total_ += times;
}

std::size_t NgramMultiset::clipped_overlap(const NgramMultiset& a,
                                           const NgramMultiset& b) {
  const NgramMultiset& small = a.distinct() <= b.distinct() ? a : b;
  const NgramMultiset& large = &small == &a ? b : a;
  std::size_t overlap = 0;
  for (const auto& [gram, c] : small.counts()) {
    overlap += std::min(c, large.count(gram));
  }
  return overlap;
}

NgramMultiset ngrams(std::span<const std::string> tokens, std::size_t n) {
  if (n == 0) throw InvalidParameterError("n-gram order must be >= 1");
  NgramMultiset out(n);
  if (tokens.size() < n) return out;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    out.add(Ngram(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                  tokens.begin() + static_cast<std::ptrdiff_t>(i + n)));
  }
  return out;
}

NgramMultiset ngrams(const TokenizedText& text, std::size_t n) {
  return ngrams(std::span<const std::string>(text.tokens), n);
}

std::vector<std::size_t> find_occurrences(std::span<const std::string> tokens,
                                          std::span<const std::string> phrase) {
  std::vector<std::size_t> out;
  if (phrase.empty() || phrase.size() > tokens.size()) return out;
  for (std::size_t i = 0; i + phrase.size() <= tokens.size(); ++i) {
    if (std::equal(phrase.begin(), phrase.end(),
                   tokens.begin() + static_cast<std::ptrdiff_t>(i))) {
      out.push_back(i);
    }
  }
  return out;
}

}  // namespace lexsum
