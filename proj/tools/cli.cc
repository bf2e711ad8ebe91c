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


#include "cli.h"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "CLI11.hpp"
#include "lexsum/augment.h"
#include "lexsum/corpus.h"
#include "lexsum/error.h"
#include "lexsum/metrics.h"
#include "lexsum/parallel.h"
#include "lexsum/scoring.h"
#include "lexsum/segment.h"
#include "lexsum/selection.h"
#include "lexsum/stats.h"
#include "lexsum/version.h"

namespace lexsum::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr char kScorerEnv[] = "CLSUM_SCORER_URL";

// ---------------------------------------------------------------------------
// Output helpers

void write_atomic(const std::string& path, const std::string& content) {
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw IoError("cannot write " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw IoError("cannot replace " + path + ": " + ec.message());
  }
}

std::string jsonl(const json& meta, const std::vector<json>& rows) {
  std::string out = json{{"meta", meta}}.dump() + "\n";
  for (const auto& row : rows) out += row.dump() + "\n";
  return out;
}

std::string csv_with_meta(const json& meta, const std::string& csv) {
  return "# " + meta.dump() + "\n" + csv;
}

std::string json_with_meta(const json& meta, json body) {
  body["meta"] = meta;
  return body.dump(2) + "\n";
}

// The effective configuration of a subcommand: every option with its parsed
// value or default.
json run_meta(const CLI::App& root, const CLI::App& sub) {
  json config = json::object();
  const auto collect = [&](const CLI::App& app) {
    for (const CLI::Option* opt : app.get_options()) {
      const std::string name = opt->get_single_name();
      if (name == "help" || name == "version" || name == "config") continue;
      if (opt->count() > 0) {
        const auto& results = opt->results();
        config[name] = results.size() == 1 ? json(results.front()) : json(results);
      } else {
        config[name] = opt->get_default_str();
      }
    }
  };
  collect(root);
  collect(sub);
  return {{"tool", "lexsum"},
          {"version", kVersion},
          {"command", sub.get_name()},
          {"config", config}};
}

std::vector<CorpusSample> read_corpus(const std::string& path) {
  LoadResult loaded = load_corpus(path, CorpusFormat::kJsonl);
  for (const auto& r : loaded.rejects) {
    std::cerr << "lexsum: skipped " << r.source << ": " << r.reason << "\n";
  }
  return std::move(loaded.samples);
}

std::vector<json> read_jsonl_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  std::vector<json> rows;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw InvalidParameterError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (j.is_object() && j.size() == 1 && j.contains("meta")) continue;
    rows.push_back(std::move(j));
  }
  return rows;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidParameterError(path + ": " + e.what());
  }
}

std::vector<json> corpus_rows(const std::vector<CorpusSample>& samples) {
  std::vector<json> rows;
  rows.reserve(samples.size());
  for (const auto& s : samples) rows.push_back(to_json(s));
  return rows;
}

// ---------------------------------------------------------------------------
// Scorer options shared by augment and evaluate

struct ScorerArgs {
  std::vector<std::string> endpoints;
  std::vector<std::string> model_ids;
  double timeout = 60.0;
  std::size_t retries = 3;
  double backoff = 0.5;
};

void add_scorer_options(CLI::App* sub, ScorerArgs& args, bool many) {
  auto* ep = sub->add_option("--scorer", args.endpoints,
                             "Endpoint: http://host:port, exec:<command> or "
                             "scripted:<fixture.json> (default: $CLSUM_SCORER_URL)");
  auto* id = sub->add_option("--scorer-model", args.model_ids, "model_id sent to the scorer");
  if (!many) {
    ep->expected(1);
    id->expected(1);
  }
  sub->add_option("--timeout", args.timeout, "Seconds per request")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--retries", args.retries, "Retries after a transport failure")
      ->capture_default_str();
  sub->add_option("--backoff", args.backoff, "First retry delay in seconds, doubling")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
}

std::vector<ScorerClient> make_scorers(const ScorerArgs& args) {
  std::vector<std::string> endpoints = args.endpoints;
  if (endpoints.empty()) {
    if (const char* env = std::getenv(kScorerEnv); env && *env) endpoints.emplace_back(env);
  }
  if (endpoints.empty()) {
    throw CLI::ValidationError("--scorer", std::string("no scorer endpoint; pass --scorer or set ") +
                                               kScorerEnv);
  }
  if (!args.model_ids.empty() && args.model_ids.size() != 1 &&
      args.model_ids.size() != endpoints.size()) {
    throw CLI::ValidationError("--scorer-model", "give one model id or one per scorer");
  }
  std::vector<ScorerClient> out;
  for (std::size_t j = 0; j < endpoints.size(); ++j) {
    ScorerHandle h;
    h.endpoint = endpoints[j];
    h.model_id = args.model_ids.empty() ? "default"
                                        : args.model_ids[args.model_ids.size() == 1 ? 0 : j];
    h.timeout_seconds = args.timeout;
    h.max_retries = args.retries;
    h.initial_backoff_seconds = args.backoff;
    try {
      out.push_back(make_scorer(h));
    } catch (const InvalidParameterError& e) {
      throw CLI::ValidationError("--scorer", e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Subcommands

struct Globals {
  std::size_t jobs = 1;
};

struct IngestArgs {
  std::string in, out, rejects, format = "jsonl", default_jurisdiction = "custom";
  std::string noise_patterns;
  std::size_t min_doc_words = 300, min_sum_words = 50;
};

int run_ingest(const IngestArgs& a, const json& meta) {
  LoadOptions lo;
  lo.default_jurisdiction = a.default_jurisdiction;
  LoadResult loaded = load_corpus(a.in, parse_corpus_format(a.format), lo);
  CleanOptions co;
  co.min_doc_words = a.min_doc_words;
  co.min_sum_words = a.min_sum_words;
  if (a.noise_patterns.empty()) {
    co.noise_patterns = CleanOptions::default_noise_patterns();
  } else {
    std::ifstream in(a.noise_patterns);
    if (!in) throw IoError("cannot read " + a.noise_patterns);
    for (std::string line; std::getline(in, line);) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty() && line[0] != '#') co.noise_patterns.push_back(line);
    }
  }
  CleanResult cleaned = clean_corpus(loaded.samples, co);
  if (!a.rejects.empty()) {
    std::vector<json> rows;
    for (const auto& r : loaded.rejects) rows.push_back({{"source", r.source}, {"reason", r.reason}});
    for (const auto& r : cleaned.rejected) {
      json row = {{"id", r.sample.id}, {"reason", to_string(r.reason)}};
      if (!r.duplicate_of.empty()) row["duplicate_of"] = r.duplicate_of;
      rows.push_back(std::move(row));
    }
    write_atomic(a.rejects, jsonl(meta, rows));
  }
  if (cleaned.kept.empty()) throw EmptyCorpusError("no sample survived cleaning");
  write_atomic(a.out, jsonl(meta, corpus_rows(cleaned.kept)));
  std::cerr << "lexsum ingest: " << cleaned.kept.size() << " kept, "
            << cleaned.rejected.size() << " rejected by cleaning, " << loaded.rejects.size()
            << " rejected on load\n";
  return kExitOk;
}

struct SplitArgs {
  std::string in, out_dir, manifest;
  std::vector<double> ratios = {0.8, 0.1, 0.1};
  std::uint64_t seed = 42;
};

int run_split(const SplitArgs& a, const json& meta) {
  const auto samples = read_corpus(a.in);
  CorpusSplit split;
  if (!a.manifest.empty()) {
    split = apply_manifest(read_json_file(a.manifest), samples);
  } else {
    try {
      split = split_corpus(samples, {a.ratios[0], a.ratios[1], a.ratios[2]}, a.seed);
    } catch (const InvalidParameterError& e) {
      throw CLI::ValidationError("--ratios", e.what());
    }
  }
  const fs::path dir(a.out_dir);
  write_atomic((dir / "train.jsonl").string(), jsonl(meta, corpus_rows(split.train)));
  write_atomic((dir / "validation.jsonl").string(), jsonl(meta, corpus_rows(split.validation)));
  write_atomic((dir / "test.jsonl").string(), jsonl(meta, corpus_rows(split.test)));
  write_atomic((dir / "manifest.json").string(), json_with_meta(meta, split_manifest(split)));
  std::cerr << "lexsum split: " << split.train.size() << " / " << split.validation.size()
            << " / " << split.test.size() << "\n";
  return kExitOk;
}

struct StatsArgs {
  std::string in, out, csv, kde_metric, kde_out;
  bool no_samples = false;
  std::size_t kde_points = 512;
  double kde_bandwidth = 0.0;
};

std::optional<double> stat_value(const SampleStats& s, const std::string& metric) {
  if (metric == "density") return s.density;
  if (metric == "coverage") return s.coverage;
  if (metric == "compression") return s.compression;
  for (std::size_t n = 1; n <= 4; ++n) {
    if (metric == "novel_" + std::to_string(n)) return s.novel[n - 1];
  }
  throw CLI::ValidationError("--kde-metric", "unknown metric " + metric);
}

int run_stats(const StatsArgs& a, const Globals& g, const json& meta) {
  const auto samples = read_corpus(a.in);
  const StatsReport report = corpus_report(samples, g.jobs);
  write_atomic(a.out, json_with_meta(meta, to_json(report, !a.no_samples)));
  if (!a.csv.empty()) write_atomic(a.csv, csv_with_meta(meta, to_csv(report)));
  if (!a.kde_metric.empty()) {
    std::vector<double> values;
    for (const auto& s : report.per_sample) {
      if (auto v = stat_value(s, a.kde_metric)) values.push_back(*v);
    }
    std::optional<double> bw;
    if (a.kde_bandwidth > 0) bw = a.kde_bandwidth;
    const KdeSeries kde = kde_export(values, bw, a.kde_points);
    write_atomic(a.kde_out, csv_with_meta(meta, to_csv(kde)));
  }
  return kExitOk;
}

struct SelectArgs {
  std::string in, out, train, comparison_out, method = "lead";
  std::size_t budget = kDefaultBudget;
};

int run_select(const SelectArgs& a, const Globals& g, const json& meta) {
  const auto samples = read_corpus(a.in);
  // Method per jurisdiction; "" is the fallback for tags absent from train.
  std::map<std::string, SelectionMethod> chosen;
  json comparison = json::object();
  if (a.method == "auto") {
    const auto train = read_corpus(a.train);
    const auto record = [&](const std::string& tag, const MethodComparison& c) {
      chosen[tag] = c.chosen;
      json means = json::object();
      const char* names[] = {"lead", "lexrank", "textrank"};
      for (std::size_t m = 0; m < 3; ++m) {
        means[names[m]] = {{"r_avg", c.mean_r_avg[m]}, {"r1", c.mean_r1[m]}};
      }
      comparison[tag.empty() ? "*" : tag] = {
          {"chosen", to_string(c.chosen)}, {"samples", c.samples}, {"means", means}};
    };
    record("", choose_method(train, a.budget, g.jobs));
    for (const auto& [tag, group] : by_jurisdiction(train)) {
      record(tag, choose_method(group, a.budget, g.jobs));
    }
  } else {
    chosen[""] = parse_selection_method(a.method);
  }
  const auto method_for = [&](const std::string& tag) {
    const auto it = chosen.find(tag);
    return it != chosen.end() ? it->second : chosen.at("");
  };
  const auto rows = parallel_map<json>(samples.size(), g.jobs, [&](std::size_t i) {
    const auto& s = samples[i];
    SelectionResult r = select(method_for(s.jurisdiction), tokenize(s.document), a.budget);
    json row = to_json(s);
    row["document"] = r.compressed_text.raw;
    json sel = to_json(r);
    sel.erase("compressed_text");
    row["selection"] = std::move(sel);
    return row;
  });
  write_atomic(a.out, jsonl(meta, rows));
  if (!a.comparison_out.empty()) {
    write_atomic(a.comparison_out, json_with_meta(meta, {{"schema", 1}, {"subsets", comparison}}));
  }
  return kExitOk;
}

struct AugmentArgs {
  std::string in, out, merged_out, method = "rephrase", glossary, templates;
  std::string pivot = kDefaultPivot;
  bool keep_partial = false;
  std::size_t max_new_tokens = 256;
  ScorerArgs scorer;
};

int run_augment(const AugmentArgs& a, const Globals& g, const json& meta) {
  const auto samples = read_corpus(a.in);
  AugmentOptions opts;
  opts.method = parse_augment_method(a.method);
  opts.pivot_lang = a.pivot;
  opts.keep_partial = a.keep_partial;
  opts.max_new_tokens = a.max_new_tokens;
  opts.jobs = g.jobs;
  if (!a.templates.empty()) opts.templates = TemplateSet::from_directory(a.templates);
  LegalGlossary glossary;
  if (!a.glossary.empty()) glossary = LegalGlossary::from_file(a.glossary);
  if (opts.method == AugmentMethod::kConstrained && glossary.empty()) {
    throw CLI::ValidationError("--glossary", "the constrained method needs a glossary");
  }
  const auto scorers = make_scorers(a.scorer);
  const AugmentResult result = augment_corpus(samples, scorers.front(), glossary, opts);
  std::vector<json> rows;
  for (const auto& s : result.samples) rows.push_back(to_json(s));
  write_atomic(a.out, jsonl(meta, rows));
  if (!a.merged_out.empty()) {
    std::vector<AugmentedSample> kept;
    for (const auto& s : result.samples) {
      if (!s.partial) kept.push_back(s);
    }
    write_atomic(a.merged_out, jsonl(meta, corpus_rows(merge_with_originals(samples, kept))));
  }
  std::cerr << "lexsum augment: " << result.samples.size() << " augmented, "
            << result.partial_ids.size() << " partial, " << result.violations
            << " term violations over " << result.sentences << " sentences\n";
  for (const auto& id : result.partial_ids) std::cerr << "  partial: " << id << "\n";
  return result.samples.empty() && !result.partial_ids.empty() ? kExitTransport : kExitOk;
}

struct SegmentArgs {
  std::string in, out, merge_in, summary_field = "summary";
  std::size_t max_len = kDefaultSegmentLength, overlap = kDefaultSegmentOverlap;
};

int run_segment(const SegmentArgs& a, const Globals& g, const json& meta) {
  if (a.in.empty() == a.merge_in.empty()) {
    throw CLI::ValidationError("--in", "give exactly one of --in and --merge-in");
  }
  if (a.max_len <= a.overlap) throw CLI::ValidationError("--max-len", "must exceed --overlap");
  std::vector<json> rows;
  if (!a.in.empty()) {
    const auto samples = read_corpus(a.in);
    const auto per_sample =
        parallel_map<std::vector<SegmentExample>>(samples.size(), g.jobs, [&](std::size_t i) {
          return segment_sample(samples[i], a.max_len, a.overlap);
        });
    for (const auto& examples : per_sample) {
      for (const auto& e : examples) rows.push_back(to_json(e));
    }
  } else {
    std::vector<std::string> order;
    std::map<std::string, std::map<std::size_t, std::string>> parts;
    for (const auto& r : read_jsonl_records(a.merge_in)) {
      const std::string parent = r.at("parent_id").get<std::string>();
      if (!parts.contains(parent)) order.push_back(parent);
      parts[parent][r.at("segment_index").get<std::size_t>()] =
          r.at(a.summary_field).get<std::string>();
    }
    for (const auto& parent : order) {
      std::vector<std::string> summaries;
      for (const auto& [index, text] : parts[parent]) summaries.push_back(text);
      rows.push_back({{"id", parent}, {"summary", merge_segments(summaries)}});
    }
  }
  write_atomic(a.out, jsonl(meta, rows));
  return kExitOk;
}

struct EvaluateArgs {
  std::string in, out, csv, model, glossary, idf_corpus;
  std::string candidate_field = "prediction", reference_field = "summary";
  std::vector<double> weights;
  bool no_rouge = false, no_ltscore = false, seq_score = false, no_length_norm = false;
  std::size_t top_phrases = kTopPhrases;
  ScorerArgs scorer;
};

int run_evaluate(const EvaluateArgs& a, const Globals& g, const json& meta) {
  std::vector<EvalPair> pairs;
  for (const auto& r : read_jsonl_records(a.in)) {
    if (!r.contains(a.candidate_field) || !r.contains(a.reference_field)) {
      throw InvalidParameterError("record lacks \"" + a.candidate_field + "\" or \"" +
                                  a.reference_field + "\"");
    }
    pairs.push_back({r.value("id", std::to_string(pairs.size())),
                     r.at(a.candidate_field).get<std::string>(),
                     r.at(a.reference_field).get<std::string>()});
  }
  if (pairs.empty()) throw EmptyCorpusError("no records in " + a.in);

  EvalOptions opts;
  opts.rouge = !a.no_rouge;
  opts.ltscore = !a.no_ltscore;
  opts.seq_score = a.seq_score;
  opts.lt.length_norm = !a.no_length_norm;
  opts.lt.top_phrases = a.top_phrases;
  opts.jobs = g.jobs;

  std::vector<ScorerClient> scorers;
  std::vector<double> weights = a.weights;
  LegalGlossary glossary;
  IdfTable idf;
  if (opts.ltscore || opts.seq_score) {
    scorers = make_scorers(a.scorer);
    if (weights.empty()) weights.assign(scorers.size(), 1.0 / static_cast<double>(scorers.size()));
    try {
      validate_model_weights(weights, scorers.size());
    } catch (const InvalidParameterError& e) {
      throw CLI::ValidationError("--weights", e.what());
    }
    if (!a.glossary.empty()) {
      if (a.idf_corpus.empty()) {
        throw CLI::ValidationError("--idf-corpus", "phrase weights need an idf corpus");
      }
      glossary = LegalGlossary::from_file(a.glossary);
      std::vector<TokenizedText> docs;
      for (const auto& s : read_corpus(a.idf_corpus)) docs.push_back(tokenize(s.document));
      idf = IdfTable::build(docs, glossary, g.jobs);
    }
  }
  const std::string model = a.model.empty() ? fs::path(a.in).stem().string() : a.model;
  MetricReport report = evaluate_pairs(model, pairs, scorers, weights, glossary, idf, opts);
  report.metadata["run"] = meta;
  write_atomic(a.out, json_with_meta(meta, to_json(report)));
  if (!a.csv.empty()) {
    write_atomic(a.csv, csv_with_meta(meta, to_csv(std::span<const MetricReport>(&report, 1))));
  }
  const auto& failed = report.metadata["failed"];
  bool transport = false;
  for (const auto& f : failed) {
    std::cerr << "lexsum evaluate: " << f["id"].get<std::string>() << ": "
              << f["error"].get<std::string>() << "\n";
    transport = transport || f.contains("scorer");
  }
  if (failed.empty()) return kExitOk;
  return transport ? kExitTransport : kExitData;
}

struct CorrelateArgs {
  std::string in, out, csv;
};

int run_correlate(const CorrelateArgs& a, const json& meta) {
  const CorrelationMatrix m = metric_correlation(metric_report_from_json(read_json_file(a.in)));
  write_atomic(a.out, json_with_meta(meta, to_json(m)));
  if (!a.csv.empty()) write_atomic(a.csv, csv_with_meta(meta, to_csv(m)));
  return kExitOk;
}

struct KappaArgs {
  std::string in, out;
};

std::vector<std::vector<std::string>> read_ratings(const std::string& path) {
  if (fs::path(path).extension() == ".json") {
    return read_json_file(path).get<std::vector<std::vector<std::string>>>();
  }
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  std::vector<std::vector<std::string>> table;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos || line[0] == '#') continue;
    std::vector<std::string> row;
    std::istringstream cells(line);
    for (std::string cell; std::getline(cells, cell, ',');) {
      const auto b = cell.find_first_not_of(" \t");
      const auto e = cell.find_last_not_of(" \t");
      row.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
    }
    table.push_back(std::move(row));
  }
  return table;
}

int run_kappa(const KappaArgs& a, const json& meta) {
  const auto table = read_ratings(a.in);
  const double kappa = fleiss_kappa(table);
  std::set<std::string> categories;
  for (const auto& row : table) categories.insert(row.begin(), row.end());
  json body = {{"schema", 1},
               {"kappa", kappa},
               {"items", table.size()},
               {"raters", table.front().size()},
               {"categories", categories}};
  if (a.out.empty()) {
    std::cout << body.dump(2) << "\n";
  } else {
    write_atomic(a.out, json_with_meta(meta, body));
  }
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"lexsum: corpus preparation, content selection, augmentation and "
               "evaluation for long legal-judgment summarization"};
  app.name("lexsum");
  app.set_version_flag("--version", std::string(kVersion));
  app.set_config("--config", "", "INI file; [section] names match subcommands");
  app.config_formatter(std::make_shared<CLI::ConfigINI>());
  app.require_subcommand(1);
  app.fallthrough();
  app.failure_message(CLI::FailureMessage::help);

  Globals g;
  app.add_option("-j,--jobs", g.jobs, "Worker threads")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  IngestArgs ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Load, clean and deduplicate a corpus");
  c_ingest->add_option("--in", ingest.in, "jsonl file/directory or paired-text root")
      ->required()
      ->check(CLI::ExistingPath);
  c_ingest->add_option("--format", ingest.format, "jsonl or paired-text")
      ->check(CLI::IsMember({"jsonl", "paired-text"}))
      ->capture_default_str();
  c_ingest->add_option("--out", ingest.out, "Cleaned corpus (jsonl)")->required();
  c_ingest->add_option("--rejects", ingest.rejects, "Rejected records (jsonl)");
  c_ingest->add_option("--default-jurisdiction", ingest.default_jurisdiction)
      ->capture_default_str();
  c_ingest->add_option("--min-doc-words", ingest.min_doc_words)->capture_default_str();
  c_ingest->add_option("--min-sum-words", ingest.min_sum_words)->capture_default_str();
  c_ingest->add_option("--noise-patterns", ingest.noise_patterns,
                       "One regex per line (default: built-in patterns)")
      ->check(CLI::ExistingFile);

  SplitArgs split;
  auto* c_split = app.add_subcommand("split", "Seeded train/validation/test split");
  c_split->add_option("--in", split.in)->required()->check(CLI::ExistingPath);
  c_split->add_option("--out-dir", split.out_dir)->required();
  c_split->add_option("--ratios", split.ratios, "train validation test")
      ->expected(3)
      ->capture_default_str();
  c_split->add_option("--seed", split.seed)->capture_default_str();
  c_split->add_option("--manifest", split.manifest, "Reproduce a previous split")
      ->check(CLI::ExistingFile);

  StatsArgs stats;
  auto* c_stats = app.add_subcommand("stats", "Per-subset corpus statistics");
  c_stats->add_option("--in", stats.in)->required()->check(CLI::ExistingPath);
  c_stats->add_option("--out", stats.out, "Report (json)")->required();
  c_stats->add_option("--csv", stats.csv, "Per-subset table (csv)");
  c_stats->add_flag("--no-samples", stats.no_samples, "Omit per-sample rows");
  auto* kde_metric = c_stats->add_option(
      "--kde-metric", stats.kde_metric,
      "density, coverage, compression or novel_1..novel_4");
  auto* kde_out = c_stats->add_option("--kde-out", stats.kde_out, "Density curve (csv)");
  kde_metric->needs(kde_out);
  kde_out->needs(kde_metric);
  c_stats->add_option("--kde-points", stats.kde_points)
      ->check(CLI::Range(2, 1 << 20))
      ->capture_default_str();
  c_stats->add_option("--kde-bandwidth", stats.kde_bandwidth, "0 = Silverman's rule")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();

  SelectArgs sel;
  auto* c_select = app.add_subcommand("select", "Budgeted content selection");
  c_select->add_option("--in", sel.in)->required()->check(CLI::ExistingPath);
  c_select->add_option("--out", sel.out, "Corpus with selected documents (jsonl)")->required();
  c_select->add_option("--method", sel.method, "lead, lexrank, textrank or auto")
      ->check(CLI::IsMember({"lead", "lexrank", "textrank", "auto"}))
      ->capture_default_str();
  c_select->add_option("--budget", sel.budget, "Token budget")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  c_select->add_option("--train", sel.train, "Training corpus for --method auto")
      ->check(CLI::ExistingPath);
  c_select->add_option("--comparison-out", sel.comparison_out, "Method comparison (json)");

  AugmentArgs aug;
  auto* c_augment = app.add_subcommand("augment", "Sentence-level data augmentation");
  c_augment->add_option("--in", aug.in)->required()->check(CLI::ExistingPath);
  c_augment->add_option("--out", aug.out, "Augmented samples (jsonl)")->required();
  c_augment->add_option("--merged-out", aug.merged_out, "Originals plus augmented (jsonl)");
  c_augment->add_option("--method", aug.method)
      ->check(CLI::IsMember({"rephrase", "constrained", "backtranslate"}))
      ->capture_default_str();
  c_augment->add_option("--glossary", aug.glossary)->check(CLI::ExistingFile);
  c_augment->add_option("--pivot", aug.pivot, "Pivot language")->capture_default_str();
  c_augment->add_flag("--keep-partial", aug.keep_partial,
                      "Keep samples with sentences that could not be rewritten");
  c_augment->add_option("--templates", aug.templates, "Directory of prompt templates")
      ->check(CLI::ExistingDirectory);
  c_augment->add_option("--max-new-tokens", aug.max_new_tokens)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  add_scorer_options(c_augment, aug.scorer, false);

  SegmentArgs seg;
  auto* c_segment = app.add_subcommand("segment", "Segment long documents or merge summaries");
  c_segment->add_option("--in", seg.in, "Corpus to segment")->check(CLI::ExistingPath);
  c_segment->add_option("--merge-in", seg.merge_in,
                        "Segment summaries to merge (jsonl with parent_id, segment_index)")
      ->check(CLI::ExistingFile);
  c_segment->add_option("--summary-field", seg.summary_field)->capture_default_str();
  c_segment->add_option("--out", seg.out)->required();
  c_segment->add_option("--max-len", seg.max_len)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  c_segment->add_option("--overlap", seg.overlap)->capture_default_str();

  EvaluateArgs ev;
  auto* c_eval = app.add_subcommand("evaluate", "ROUGE and ensemble log-prob scoring");
  c_eval->add_option("--in", ev.in, "jsonl with id, candidate and reference fields")
      ->required()
      ->check(CLI::ExistingFile);
  c_eval->add_option("--out", ev.out, "Metric report (json)")->required();
  c_eval->add_option("--csv", ev.csv, "Summary row (csv)");
  c_eval->add_option("--model", ev.model, "Name of the system under evaluation");
  c_eval->add_option("--candidate-field", ev.candidate_field)->capture_default_str();
  c_eval->add_option("--reference-field", ev.reference_field)->capture_default_str();
  c_eval->add_option("--weights", ev.weights, "One weight per scorer (default uniform)");
  c_eval->add_option("--glossary", ev.glossary)->check(CLI::ExistingFile);
  c_eval->add_option("--idf-corpus", ev.idf_corpus, "Training split for phrase idf")
      ->check(CLI::ExistingPath);
  c_eval->add_option("--top-phrases", ev.top_phrases)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  c_eval->add_flag("--no-rouge", ev.no_rouge);
  c_eval->add_flag("--no-ltscore", ev.no_ltscore);
  c_eval->add_flag("--seq-score", ev.seq_score, "Add the single-scorer uniform-weight score");
  c_eval->add_flag("--no-length-norm", ev.no_length_norm,
                   "Sum weighted log-probs instead of averaging");
  add_scorer_options(c_eval, ev.scorer, true);

  CorrelateArgs corr;
  auto* c_corr = app.add_subcommand("correlate", "Pearson correlation between metrics");
  c_corr->add_option("--in", corr.in, "Metric report (json)")
      ->required()
      ->check(CLI::ExistingFile);
  c_corr->add_option("--out", corr.out)->required();
  c_corr->add_option("--csv", corr.csv);

  KappaArgs kappa;
  auto* c_kappa = app.add_subcommand("kappa", "Fleiss' kappa of a rating table");
  c_kappa->add_option("--in", kappa.in, "csv (one item per line) or json array of arrays")
      ->required()
      ->check(CLI::ExistingFile);
  c_kappa->add_option("--out", kappa.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  const CLI::App* sub = app.get_subcommands().front();
  const json meta = run_meta(app, *sub);
  try {
    if (sub == c_ingest) return run_ingest(ingest, meta);
    if (sub == c_split) return run_split(split, meta);
    if (sub == c_stats) return run_stats(stats, g, meta);
    if (sub == c_select) {
      if (sel.method == "auto" && sel.train.empty()) {
        throw CLI::ValidationError("--train", "--method auto needs --train");
      }
      return run_select(sel, g, meta);
    }
    if (sub == c_augment) return run_augment(aug, g, meta);
    if (sub == c_segment) return run_segment(seg, g, meta);
    if (sub == c_eval) return run_evaluate(ev, g, meta);
    if (sub == c_corr) return run_correlate(corr, meta);
    if (sub == c_kappa) return run_kappa(kappa, meta);
  } catch (const CLI::ParseError& e) {
    std::cerr << "lexsum: usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const TransportError& e) {
    std::cerr << "lexsum: transport error: " << e.what() << "\n";
    return kExitTransport;
  } catch (const PartialEnsembleError& e) {
    std::cerr << "lexsum: transport error: " << e.what() << "\n";
    return kExitTransport;
  } catch (const std::exception& e) {
    std::cerr << "lexsum: error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  for (const auto& a : args) argv.push_back(a.c_str());
  argv.push_back(nullptr);
  return run(static_cast<int>(args.size()), argv.data());
}

}  // namespace lexsum::cli
