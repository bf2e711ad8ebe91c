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


#include "lexsum/augment.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <tuple>

#include "lexsum/error.h"
#include "lexsum/parallel.h"

using nlohmann::json;

namespace lexsum {
namespace {

constexpr char kRephraseText[] =
    "Rephrase the following sentence from a court judgment. Keep its meaning and "
    "return only the rewritten sentence.\nSentence: {sentence}";
constexpr char kConstrainedText[] =
    "Rephrase the following sentence from a court judgment. Keep its meaning and use "
    "each of these legal terms exactly as written: {terms}. Return only the rewritten "
    "sentence.\nSentence: {sentence}";
constexpr char kTranslateText[] =
    "Translate the following {src_lang} sentence into {tgt_lang}. Return only the "
    "translation.\nSentence: {sentence}";

const char* file_name(PromptKind kind) {
  switch (kind) {
    case PromptKind::kRephrase:
      return "rephrase";
    case PromptKind::kConstrained:
      return "constrained_rephrase";
    case PromptKind::kTranslateForward:
      return "translate_forward";
    case PromptKind::kTranslateBack:
      return "translate_back";
  }
  return "?";
}

// Calls visit(name) for each placeholder and visit_literal(text) for the rest.
template <typename Literal, typename Placeholder>
void scan_template(const std::string& text, Literal&& literal, Placeholder&& placeholder) {
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (c == '{' || c == '}') {
      if (i + 1 < text.size() && text[i + 1] == c) {
        literal(std::string(1, c));
        i += 2;
        continue;
      }
      if (c == '}') throw InvalidParameterError("template has an unmatched '}'");
      const auto close = text.find('}', i + 1);
      if (close == std::string::npos) {
        throw InvalidParameterError("template has an unmatched '{'");
      }
      const std::string name = text.substr(i + 1, close - i - 1);
      if (name.empty() || name.find('{') != std::string::npos) {
        throw InvalidParameterError("template has a malformed placeholder");
      }
      placeholder(name);
      i = close + 1;
      continue;
    }
    const auto next = text.find_first_of("{}", i);
    const std::size_t end = next == std::string::npos ? text.size() : next;
    literal(text.substr(i, end - i));
    i = end;
  }
}

std::string collapse_whitespace(const std::string& s) {
  std::string out;
  bool space = false;
  for (char c : s) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
      space = !out.empty();
    } else {
      if (space) out += ' ';
      space = false;
      out += c;
    }
  }
  return out;
}

std::string quote_terms(const std::vector<std::string>& terms) {
  std::string out;
  for (const auto& t : terms) {
    if (!out.empty()) out += ", ";
    out += '"' + t + '"';
  }
  return out;
}

std::string generate_or_stage_error(const ScorerClient& provider, const std::string& stage,
                                    const std::string& prompt, std::size_t max_new_tokens) {
  std::string out;
  try {
    out = provider.generate(prompt, max_new_tokens);
  } catch (const Error& e) {
    throw StageError(stage, e.what());
  }
  out = collapse_whitespace(out);
  if (out.empty()) throw StageError(stage, "empty provider output");
  return out;
}

struct Rewrite {
  std::string text;
  SentenceRecord record;
};

Rewrite rewrite_sentence(const std::string& sentence, const ScorerClient& provider,
                         const LegalGlossary& glossary, const AugmentOptions& options) {
  Rewrite out;
  SentenceRecord& rec = out.record;
  rec.method = to_string(options.method);
  if (options.method == AugmentMethod::kConstrained) {
    rec.terms = detect_terms(sentence, glossary);
    if (rec.terms.empty()) rec.method = to_string(AugmentMethod::kRephrase);
  }
  std::string prompt;
  if (options.method == AugmentMethod::kRephrase) {
    prompt = build_rephrase_prompt(sentence, options.templates);
  } else if (options.method == AugmentMethod::kConstrained) {
    prompt = build_constrained_prompt(sentence, glossary, options.templates);
  }

  std::optional<std::string> flagged;
  for (rec.attempts = 1; rec.attempts <= 2; ++rec.attempts) {
    try {
      std::string text =
          options.method == AugmentMethod::kBackTranslate
              ? back_translate(sentence, options.pivot_lang, provider, options.templates,
                               options.max_new_tokens)
              : generate_or_stage_error(provider, "rephrase", prompt, options.max_new_tokens);
      if (tokenize(text).sentence_count() != 1) {
        throw Error("provider output is not a single sentence");
      }
      auto missing = missing_terms(text, rec.terms);
      if (missing.empty()) {
        out.text = std::move(text);
        rec.missing.clear();
        rec.error.clear();
        return out;
      }
      rec.missing = std::move(missing);
      flagged = std::move(text);
    } catch (const Error& e) {
      rec.error = e.what();
    }
  }
  rec.attempts = 2;
  if (flagged) {
    rec.violation = true;
    rec.error.clear();
    out.text = std::move(*flagged);
  } else {
    rec.failed = true;
    out.text = sentence;
  }
  return out;
}

std::string rewrite_part(const std::string& part, const std::string& text,
                         const ScorerClient& provider, const LegalGlossary& glossary,
                         const AugmentOptions& options, AugmentedSample& sample) {
  const TokenizedText tokens = tokenize(text);
  std::vector<std::string> rewritten;
  rewritten.reserve(tokens.sentence_count());
  for (std::size_t i = 0; i < tokens.sentence_count(); ++i) {
    Rewrite r = rewrite_sentence(std::string(tokens.sentence_text(i)), provider, glossary,
                                 options);
    r.record.part = part;
    r.record.index = i;
    if (r.record.failed) {
      sample.partial = true;
      sample.errors.push_back(part + " sentence " + std::to_string(i) + ": " + r.record.error);
    }
    rewritten.push_back(std::move(r.text));
    sample.provenance.push_back(std::move(r.record));
  }
  std::string joined = join_sentences(rewritten);
  const std::size_t count = tokenize(joined).sentence_count();
  if (count != tokens.sentence_count()) {
    sample.partial = true;
    sample.errors.push_back(part + ": rewrite has " + std::to_string(count) +
                            " sentences, source has " +
                            std::to_string(tokens.sentence_count()));
  }
  return joined;
}

}  // namespace

std::string to_string(PromptKind kind) { return file_name(kind); }

PromptTemplate::PromptTemplate(PromptKind kind, std::string text)
    : kind_(kind), text_(std::move(text)) {}

PromptTemplate PromptTemplate::builtin(PromptKind kind) {
  switch (kind) {
    case PromptKind::kRephrase:
      return {kind, kRephraseText};
    case PromptKind::kConstrained:
      return {kind, kConstrainedText};
    case PromptKind::kTranslateForward:
    case PromptKind::kTranslateBack:
      return {kind, kTranslateText};
  }
  throw InvalidParameterError("unknown prompt kind");
}

PromptTemplate PromptTemplate::from_file(PromptKind kind, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read template: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string text = ss.str();
  if (!text.empty() && text.back() == '\n') text.pop_back();
  if (!text.empty() && text.back() == '\r') text.pop_back();
  PromptTemplate t(kind, std::move(text));
  t.validate();
  return t;
}

std::vector<std::string> PromptTemplate::required(PromptKind kind) {
  switch (kind) {
    case PromptKind::kRephrase:
      return {"sentence"};
    case PromptKind::kConstrained:
      return {"sentence", "terms"};
    case PromptKind::kTranslateForward:
    case PromptKind::kTranslateBack:
      return {"sentence", "src_lang", "tgt_lang"};
  }
  return {};
}

void PromptTemplate::validate() const {
  const auto needed = required(kind_);
  std::vector<std::string> seen;
  scan_template(
      text_, [](const std::string&) {},
      [&](const std::string& name) {
        if (std::find(needed.begin(), needed.end(), name) == needed.end()) {
          throw InvalidParameterError(to_string(kind_) + " template: unknown placeholder {" +
                                      name + "}");
        }
        seen.push_back(name);
      });
  for (const auto& n : needed) {
    if (std::find(seen.begin(), seen.end(), n) == seen.end()) {
      throw InvalidParameterError(to_string(kind_) + " template lacks {" + n + "}");
    }
  }
}

std::string PromptTemplate::render(const std::map<std::string, std::string>& values) const {
  std::string out;
  scan_template(
      text_, [&](const std::string& lit) { out += lit; },
      [&](const std::string& name) {
        const auto it = values.find(name);
        if (it == values.end()) {
          throw InvalidParameterError("no value for placeholder {" + name + "}");
        }
        out += it->second;
      });
  return out;
}

TemplateSet TemplateSet::from_directory(const std::string& dir) {
  TemplateSet set;
  const auto load = [&](PromptTemplate& slot) {
    const auto path = std::filesystem::path(dir) / (std::string(file_name(slot.kind())) + ".txt");
    if (std::filesystem::exists(path)) slot = PromptTemplate::from_file(slot.kind(), path);
  };
  load(set.rephrase);
  load(set.constrained);
  load(set.translate_forward);
  load(set.translate_back);
  return set;
}

std::string build_rephrase_prompt(const std::string& sentence, const TemplateSet& templates) {
  if (sentence.empty()) throw InvalidParameterError("cannot rephrase an empty sentence");
  return templates.rephrase.render({{"sentence", sentence}});
}

std::vector<std::string> detect_terms(const std::string& sentence,
                                      const LegalGlossary& glossary) {
  const TokenizedText t = tokenize(sentence);
  // (start, -length, surface) sorts by position, longer phrase first.
  std::vector<std::tuple<std::size_t, std::ptrdiff_t, std::string>> found;
  for (const auto& phrase : glossary.phrases) {
    for (std::size_t start : find_occurrences(t.tokens, phrase)) {
      const std::size_t last = start + phrase.size() - 1;
      found.emplace_back(start, -static_cast<std::ptrdiff_t>(phrase.size()),
                         t.raw.substr(t.offsets[start].begin,
                                      t.offsets[last].end - t.offsets[start].begin));
    }
  }
  std::sort(found.begin(), found.end());
  std::vector<std::string> out;
  for (auto& [start, len, surface] : found) {
    if (std::find(out.begin(), out.end(), surface) == out.end()) out.push_back(surface);
  }
  return out;
}

std::string build_constrained_prompt(const std::string& sentence,
                                     const LegalGlossary& glossary,
                                     const TemplateSet& templates) {
  const auto terms = detect_terms(sentence, glossary);
  if (terms.empty()) return build_rephrase_prompt(sentence, templates);
  return templates.constrained.render({{"sentence", sentence}, {"terms", quote_terms(terms)}});
}

std::vector<std::string> missing_terms(const std::string& output,
                                       const std::vector<std::string>& terms) {
  std::vector<std::string> missing;
  if (terms.empty()) return missing;
  const TokenizedText t = tokenize(output);
  for (const auto& term : terms) {
    if (find_occurrences(t.tokens, tokenize(term).tokens).empty()) missing.push_back(term);
  }
  return missing;
}

std::string back_translate(const std::string& sentence, const std::string& pivot_lang,
                           const ScorerClient& provider, const TemplateSet& templates,
                           std::size_t max_new_tokens) {
  if (sentence.empty()) throw InvalidParameterError("cannot translate an empty sentence");
  const std::string pivot = generate_or_stage_error(
      provider, "forward",
      templates.translate_forward.render(
          {{"sentence", sentence}, {"src_lang", kSourceLanguage}, {"tgt_lang", pivot_lang}}),
      max_new_tokens);
  return generate_or_stage_error(
      provider, "back",
      templates.translate_back.render(
          {{"sentence", pivot}, {"src_lang", pivot_lang}, {"tgt_lang", kSourceLanguage}}),
      max_new_tokens);
}

std::string to_string(AugmentMethod method) {
  switch (method) {
    case AugmentMethod::kRephrase:
      return "rephrase";
    case AugmentMethod::kConstrained:
      return "constrained";
    case AugmentMethod::kBackTranslate:
      return "backtranslate";
  }
  return "?";
}

AugmentMethod parse_augment_method(const std::string& name) {
  if (name == "rephrase") return AugmentMethod::kRephrase;
  if (name == "constrained") return AugmentMethod::kConstrained;
  if (name == "backtranslate") return AugmentMethod::kBackTranslate;
  throw InvalidParameterError("unknown augmentation method: " + name);
}

std::size_t AugmentedSample::violations() const {
  return static_cast<std::size_t>(std::count_if(
      provenance.begin(), provenance.end(), [](const SentenceRecord& r) { return r.violation; }));
}

AugmentResult augment_corpus(const std::vector<CorpusSample>& train,
                             const ScorerClient& provider, const LegalGlossary& glossary,
                             const AugmentOptions& options) {
  if (train.empty()) throw EmptyCorpusError("nothing to augment");
  options.templates.rephrase.validate();
  options.templates.constrained.validate();
  options.templates.translate_forward.validate();
  options.templates.translate_back.validate();
  if (options.method == AugmentMethod::kConstrained && glossary.empty()) {
    throw InvalidParameterError("the constrained method needs a glossary");
  }
  if (options.method == AugmentMethod::kBackTranslate && options.pivot_lang.empty()) {
    throw InvalidParameterError("back translation needs a pivot language");
  }

  auto samples = parallel_map<AugmentedSample>(train.size(), options.jobs, [&](std::size_t i) {
    const CorpusSample& parent = train[i];
    AugmentedSample s;
    s.parent_id = parent.id;
    s.id = parent.id + "#aug-" + to_string(options.method);
    s.jurisdiction = parent.jurisdiction;
    s.method = options.method;
    s.document = rewrite_part("document", parent.document, provider, glossary, options, s);
    s.summary = rewrite_part("summary", parent.summary, provider, glossary, options, s);
    return s;
  });

  AugmentResult result;
  for (auto& s : samples) {
    result.sentences += s.provenance.size();
    result.violations += s.violations();
    if (s.partial) {
      result.partial_ids.push_back(s.parent_id);
      if (!options.keep_partial) continue;
    }
    result.samples.push_back(std::move(s));
  }
  return result;
}

CorpusSample to_corpus_sample(const AugmentedSample& sample) {
  CorpusSample out;
  out.id = sample.id;
  out.jurisdiction = sample.jurisdiction;
  out.document = sample.document;
  out.summary = sample.summary;
  return out;
}

std::vector<CorpusSample> merge_with_originals(const std::vector<CorpusSample>& originals,
                                               const std::vector<AugmentedSample>& augmented) {
  std::vector<CorpusSample> out = originals;
  out.reserve(originals.size() + augmented.size());
  for (const auto& a : augmented) out.push_back(to_corpus_sample(a));
  return out;
}

json to_json(const AugmentedSample& sample) {
  json provenance = json::array();
  for (const auto& r : sample.provenance) {
    json rec = {{"part", r.part},       {"index", r.index},         {"method", r.method},
                {"attempts", r.attempts}, {"violation", r.violation}, {"failed", r.failed}};
    if (!r.terms.empty()) rec["terms"] = r.terms;
    if (!r.missing.empty()) rec["missing"] = r.missing;
    if (!r.error.empty()) rec["error"] = r.error;
    provenance.push_back(std::move(rec));
  }
  json out = {{"id", sample.id},
              {"parent_id", sample.parent_id},
              {"jurisdiction", sample.jurisdiction},
              {"method", to_string(sample.method)},
              {"document", sample.document},
              {"summary", sample.summary},
              {"partial", sample.partial},
              {"provenance", provenance}};
  if (!sample.errors.empty()) out["errors"] = sample.errors;
  return out;
}

}  // namespace lexsum
