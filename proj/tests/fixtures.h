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

// Hand-computed fixtures shared by the unit tests and the acceptance binary.

#ifndef LEXSUM_TESTS_FIXTURES_H_
#define LEXSUM_TESTS_FIXTURES_H_

#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include "lexsum/corpus.h"
#include "lexsum/metrics.h"
#include "lexsum/scoring.h"
#include "test_util.h"

namespace lexsum::testing {

inline std::vector<std::string> words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

inline std::string join(const Ngram& phrase) {
  std::string out;
  for (const auto& t : phrase) out += (out.empty() ? "" : " ") + t;
  return out;
}

struct RougeCase {
  const char* candidate;
  const char* reference;
  RougeVariant variant;
  double precision, recall, f1;
};

// Hand counts; see the comment on each row for the overlap used.
inline const RougeCase kRougeCases[] = {
    {"the cat", "the cat sat", RougeVariant::kR1, 100.0, 66.6667, 80.0},  // 2/2, 2/3
    {"c a b", "a b c", RougeVariant::kRL, 66.6667, 66.6667, 66.6667},     // lcs "a b"
    {"the cat sat", "the cat", RougeVariant::kR2, 50.0, 100.0, 66.6667},  // "the cat"
    {"a a a", "a", RougeVariant::kR1, 33.3333, 100.0, 50.0},              // clipped to 1
    {"a b", "c d", RougeVariant::kR1, 0.0, 0.0, 0.0},
    {"a b c d", "a b x c d", RougeVariant::kR2, 66.6667, 50.0, 57.1429},  // ab, cd
    {"a b c d", "a b x c d", RougeVariant::kRL, 100.0, 80.0, 88.8889},    // lcs 4
    {"the court held the appeal", "the appeal was held", RougeVariant::kR1, 60.0, 75.0,
     66.6667},  // the (clipped), held, appeal
    {"the court held the appeal", "the appeal was held", RougeVariant::kR2, 25.0, 33.3333,
     28.5714},  // "the appeal"
    {"the court held the appeal", "the appeal was held", RougeVariant::kRL, 40.0, 50.0,
     44.4444},  // lcs 2
    {"a b", "a b a b", RougeVariant::kR1, 100.0, 50.0, 66.6667},
    {"a b", "a b a b", RougeVariant::kR2, 100.0, 33.3333, 50.0},
    {"a b", "a b a b", RougeVariant::kRL, 100.0, 50.0, 66.6667},
    {"x", "x y z w", RougeVariant::kR1, 100.0, 25.0, 40.0},
    {"x", "x y", RougeVariant::kR2, 0.0, 0.0, 0.0},  // no candidate bigrams
    {"a b c d e", "e d c b a", RougeVariant::kRL, 20.0, 20.0, 20.0},
    {"a b c d e", "e d c b a", RougeVariant::kR1, 100.0, 100.0, 100.0},
    {"a b c d e", "e d c b a", RougeVariant::kR2, 0.0, 0.0, 0.0},
    {"a x b y c", "a b c", RougeVariant::kRL, 60.0, 100.0, 75.0},
    {"a x b y c", "a b c", RougeVariant::kR1, 60.0, 100.0, 75.0},
    {"a b c a b", "a b a b c", RougeVariant::kR2, 75.0, 75.0, 75.0},  // ab x2, bc
    {"a b c a b", "a b a b c", RougeVariant::kRL, 80.0, 80.0, 80.0},  // lcs "a b a b"
};

// P_i = 1, 1/3, 1/3, 0 -> P = 5/12. Category shares 6/12, 4/12, 2/12 ->
// Pe = 7/18. kappa = (5/12 - 7/18) / (11/18) = 1/22.
inline std::vector<std::vector<std::string>> kappa_hand_table() {
  return {{"win", "win", "win"},
          {"win", "win", "lose"},
          {"lose", "lose", "tie"},
          {"win", "lose", "tie"}};
}
inline constexpr double kKappaHand = 1.0 / 22.0;

// Fifty sentences in ten five-sentence documents, each sentence naming one or
// two glossary phrases.
struct ConstrainedFixture {
  std::vector<std::string> sentences;
  std::vector<CorpusSample> train;
};

inline ConstrainedFixture constrained_fixture(const LegalGlossary& g) {
  ConstrainedFixture f;
  for (std::size_t i = 0; i < 50; ++i) {
    const std::string a = join(g.phrases[i % g.size()]);
    const std::string b = join(g.phrases[(i * 7 + 3) % g.size()]);
    f.sentences.push_back("In matter " + std::to_string(i) + " the court weighed " + a +
                          (i % 2 ? " against " + b : std::string()) + ".");
  }
  for (std::size_t k = 0; k < 10; ++k) {
    std::string doc;
    for (std::size_t j = 0; j < 5; ++j) doc += (j ? " " : "") + f.sentences[k * 5 + j];
    f.train.push_back(make_sample("f" + std::to_string(k), "", doc,
                                  "Summary of file " + std::to_string(k) + "."));
  }
  return f;
}

// Text after the last "Sentence: " marker of a prompt.
inline std::string prompt_sentence(const std::string& prompt) {
  const std::string marker = "Sentence: ";
  return prompt.substr(prompt.rfind(marker) + marker.size());
}

// Provider for the fixture: rewrites the opening "In" to "Within" and, on the
// first call for every third sentence, drops the first listed term; sentences
// 0 mod 9 drop it on every call. Of the 50, 17 are retried and 6 stay flagged.
inline ScriptedBackend::GenerateFn dropping_rewriter() {
  return [](const std::string& prompt, std::size_t call) {
    std::string s = prompt_sentence(prompt);
    if (s.rfind("In matter ", 0) != 0) return s;
    const std::size_t num = std::stoul(s.substr(10));
    s.replace(0, 2, "Within");
    const auto q = prompt.find('"');
    if (q != std::string::npos && num % 3 == 0 && (call == 0 || num % 9 == 0)) {
      const std::string term = prompt.substr(q + 1, prompt.find('"', q + 1) - q - 1);
      s.replace(s.find(term), term.size(), "that issue");
    }
    return s;
  };
}

}  // namespace lexsum::testing

#endif  // LEXSUM_TESTS_FIXTURES_H_
