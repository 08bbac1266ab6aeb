// Copyright 2026 The msqa Authors.
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

// msqa: command-line front end for data generation, training, candidate
// sampling, reranking and evaluation. Every subcommand writes a JSON run
// manifest next to its main output (or to --manifest).

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "msqa/checkpoint.h"
#include "msqa/data.h"
#include "msqa/errors.h"
#include "msqa/eval.h"
#include "msqa/experiments.h"
#include "msqa/io.h"
#include "msqa/rerank.h"
#include "msqa/train.h"
#include "msqa/trees.h"

namespace {

using namespace msqa;

constexpr int kUsageExit = 2;
constexpr int kFailureExit = 1;

// Options shared by every subcommand that trains or loads a model.
struct ConfigFlags {
  std::string config_path;
  std::string preset;
  std::map<std::string, std::string> overrides;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "key = value config file")
        ->check(CLI::ExistingFile);
    app->add_option("--preset", preset, "toy or paper (config files may set this instead)");
    for (const auto& [key, value] : TrainConfig().entries()) {
      app->add_option("--" + key, overrides[key], "override " + key);
    }
  }

  TrainConfig build() const {
    TrainConfig config;
    if (!config_path.empty()) {
      config = TrainConfig::load(config_path);
      if (!preset.empty()) {
        throw ConfigError("--preset conflicts with --config; set preset in the file");
      }
    } else if (!preset.empty()) {
      config = TrainConfig::preset(preset);
    }
    for (const auto& [key, value] : overrides) {
      if (!value.empty()) config.set(key, value);
    }
    config.validate();
    return config;
  }
};

struct Run {
  Manifest manifest;
  std::string path;

  Run(const std::string& command, std::string manifest_path)
      : manifest(command), path(std::move(manifest_path)) {}

  void record(const TrainConfig& config) {
    for (const auto& [key, value] : config.entries()) manifest.config(key, value);
  }
  void finish() const {
    manifest.write(path);
    std::cerr << "manifest: " << path << "\n";
  }
};

std::string manifest_for(const std::string& explicit_path, const std::string& output,
                         const std::string& command) {
  if (!explicit_path.empty()) return explicit_path;
  if (!output.empty()) return output + ".manifest.json";
  return "msqa-" + command + ".manifest.json";
}

Dataset load_localized(const std::string& path) {
  Dataset data = load_ropes(path);
  const LocalizationReport report = localize_all(data);
  if (!report.failed_ids.empty()) {
    std::cerr << path << ": " << report.failed_ids.size()
              << " answers not found in the situation or question\n";
  }
  return data;
}

std::vector<std::string> split_words(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string word; in >> word;) out.push_back(word);
  return out;
}

// Checkpoints carry their vocabulary so later commands can re-tokenize.
// Tokens never contain whitespace, so a space-separated list is safe.
void attach_vocab(Checkpoint& checkpoint, const Vocabulary& vocab) {
  std::string joined;
  for (const std::string& t : vocab.tokens()) joined += (joined.empty() ? "" : " ") + t;
  checkpoint.metadata["vocab"] = joined;
}

Vocabulary vocab_of(const Checkpoint& checkpoint) {
  const auto it = checkpoint.metadata.find("vocab");
  if (it == checkpoint.metadata.end()) throw InputError("checkpoint has no vocabulary");
  return Vocabulary::from_lines(split_words(it->second));
}

std::string kind_of(const Checkpoint& checkpoint) {
  const auto it = checkpoint.metadata.find("kind");
  return it == checkpoint.metadata.end() ? "" : it->second;
}

void print_epoch(const EpochLog& log) {
  std::fprintf(stderr, "epoch %zu loss %.4f train_em %.2f", log.epoch, log.mean_loss,
               log.train_em);
  if (log.dev_em) std::fprintf(stderr, " dev_em %.2f", *log.dev_em);
  std::fprintf(stderr, "\n");
}

TypeMixture parse_mixture(const std::string& spec) {
  if (spec == "uniform") return TypeMixture::uniform();
  if (spec == "ropes-train") return ropes_train_mixture();
  if (spec == "ropes-dev") return ropes_dev_mixture();
  if (spec == "ropes-test") return ropes_test_mixture();
  if (const auto only = parse_type(spec)) return TypeMixture::only(*only);
  // "NP=0.5,VP=0.5"
  TypeMixture m;
  m.proportions.fill(0.0);
  std::istringstream in(spec);
  for (std::string item; std::getline(in, item, ',');) {
    const auto eq = item.find('=');
    const auto type = eq == std::string::npos ? std::nullopt : parse_type(item.substr(0, eq));
    if (!type) throw ConfigError("bad mixture entry '" + item + "'");
    m.proportions[static_cast<std::size_t>(*type)] = std::stod(item.substr(eq + 1));
  }
  return m;
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::istringstream in(text);
  for (std::string item; std::getline(in, item, ',');) out.push_back(std::stoull(item));
  if (out.empty()) throw ConfigError("no seeds given");
  return out;
}

std::map<std::string, CandidateSet> by_id(const std::vector<CandidateSet>& sets) {
  std::map<std::string, CandidateSet> out;
  for (const CandidateSet& s : sets) out[s.example_id] = s;
  return out;
}

// ---- subcommands ----------------------------------------------------------

struct GenSynth {
  SynthConfig config;
  std::string mixture = "uniform";
  std::string out;
  std::string manifest;

  void attach(CLI::App* app) {
    app->add_option("--count", config.count, "examples to generate");
    app->add_option("--hops", config.hops, "rule-chain depth (1 or 2)");
    app->add_option("--mixture", mixture,
                    "uniform, ropes-train, ropes-dev, ropes-test, a type name, or NP=p,VP=p,...");
    app->add_option("--distractor-rules", config.distractor_rules);
    app->add_option("--distractor-facts", config.distractor_facts);
    app->add_option("--entity-pool", config.entity_pool);
    app->add_option("--seed", config.seed);
    app->add_option("--id-prefix", config.id_prefix);
    app->add_option("--out", out, "ROPES-format JSON output")->required();
    app->add_option("--manifest", manifest);
  }

  int run() {
    config.mixture = parse_mixture(mixture);
    const Dataset data = generate_synthetic(config);
    write_ropes(out, data);
    Run r("gen-synth", manifest_for(manifest, out, "gen-synth"));
    r.manifest.config("count", std::to_string(config.count));
    r.manifest.config("hops", std::to_string(config.hops));
    r.manifest.config("mixture", mixture);
    r.manifest.config("distractor_rules", std::to_string(config.distractor_rules));
    r.manifest.config("distractor_facts", std::to_string(config.distractor_facts));
    r.manifest.config("entity_pool", std::to_string(config.entity_pool));
    r.manifest.config("seed", std::to_string(config.seed));
    r.manifest.output(out);
    for (const auto& [type, pct] : type_distribution(data)) {
      r.manifest.metric(std::string("percent_") + type_name(type), pct);
    }
    r.finish();
    std::cout << "wrote " << data.size() << " examples to " << out << "\n";
    return 0;
  }
};

struct Train {
  ConfigFlags flags;
  std::string mode = "multistep";
  std::string train_path, dev_path, out, manifest;

  void attach(CLI::App* app) {
    flags.attach(app);
    app->add_option("--mode", mode, "baseline or multistep")
        ->check(CLI::IsMember({"baseline", "multistep"}));
    app->add_option("--train", train_path)->required()->check(CLI::ExistingFile);
    app->add_option("--dev", dev_path, "selects the best epoch")->check(CLI::ExistingFile);
    app->add_option("--out", out, "checkpoint path")->required();
    app->add_option("--manifest", manifest);
  }

  int run() {
    const TrainConfig config = flags.build();
    const Dataset train = load_localized(train_path);
    const Dataset dev = dev_path.empty() ? Dataset{} : load_localized(dev_path);
    const Vocabulary vocab = build_vocabulary(train);
    std::vector<PreparedExample> ptrain = prepare(train, vocab, config);
    std::vector<PreparedExample> pdev = prepare(dev, vocab, config);
    SpanModel model(parse_mode(mode), config, vocab.size());
    const TrainReport report = train_span_model(model, ptrain, pdev, print_epoch);
    Checkpoint ckpt = model.checkpoint();
    attach_vocab(ckpt, vocab);
    write_checkpoint(out, ckpt);

    Run r("train", manifest_for(manifest, out, "train"));
    r.record(config);
    r.manifest.config("mode", mode);
    r.manifest.input(train_path);
    if (!dev_path.empty()) r.manifest.input(dev_path);
    r.manifest.output(out);
    r.manifest.metric("trained_examples", static_cast<double>(report.trained_examples));
    r.manifest.metric("skipped_examples", static_cast<double>(report.skipped_examples));
    r.manifest.metric("best_epoch", static_cast<double>(report.best_epoch));
    if (!report.epochs.empty()) {
      r.manifest.metric("final_loss", report.epochs.back().mean_loss);
      r.manifest.metric("final_train_em", report.epochs.back().train_em);
    }
    if (report.best_dev_em) r.manifest.metric("best_dev_em", *report.best_dev_em);
    r.finish();
    if (report.best_dev_em) std::printf("best dev EM %.2f (epoch %zu)\n", *report.best_dev_em,
                                        report.best_epoch);
    return 0;
  }
};

struct Predict {
  std::string model_path, data_path, out, candidates_out, trace_out, manifest;
  std::size_t c = 1;

  void attach(CLI::App* app) {
    app->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
    app->add_option("--data", data_path)->required()->check(CLI::ExistingFile);
    app->add_option("--out", out, "predictions file")->required();
    app->add_option("--c", c, "candidates kept per example");
    app->add_option("--candidates-out", candidates_out, "top-c candidate file");
    app->add_option("--trace", trace_out, "attention trace (multistep models), JSON lines");
    app->add_option("--manifest", manifest);
  }

  int run() {
    const Checkpoint ckpt = read_checkpoint(model_path);
    if (kind_of(ckpt) != "span") throw InputError(model_path + " is not a span model");
    const SpanModel model = SpanModel::from_checkpoint(ckpt);
    const Vocabulary vocab = vocab_of(ckpt);
    const Dataset data = load_localized(data_path);
    std::vector<PreparedExample> prepared = prepare(data, vocab, model.config());
    const PredictionSet predictions = predict_spans(model, prepared, c);
    write_predictions(out, predictions);

    Run r("predict", manifest_for(manifest, out, "predict"));
    r.record(model.config());
    r.manifest.config("c", std::to_string(c));
    r.manifest.input(model_path);
    r.manifest.input(data_path);
    r.manifest.output(out);
    if (!candidates_out.empty()) {
      std::vector<CandidateSet> sets;
      for (const auto& [id, p] : predictions) sets.push_back({id, p.candidates, "predict"});
      write_candidates(candidates_out, sets);
      r.manifest.output(candidates_out);
    }
    if (!trace_out.empty()) {
      if (model.mode() != SpanMode::kMultiStep) throw InputError("--trace needs a multistep model");
      std::string lines;
      for (PreparedExample& p : prepared) {
        InferenceTrace trace;
        model.scores(p, &trace);
        lines += format_trace(p.example->id, p.input, trace);
      }
      write_file(trace_out, lines);
      r.manifest.output(trace_out);
    }
    const EmReport em = evaluate_em(predictions, data);
    r.manifest.metric("em", em.em);
    r.finish();
    std::printf("EM %.2f (%zu/%zu)\n", em.em, em.correct, em.total);
    return 0;
  }
};

struct Eval {
  std::string predictions_path, data_path, trees_path, manifest;
  bool by_type = false;
  bool include_others = false;

  void attach(CLI::App* app) {
    app->add_option("--predictions", predictions_path)->required()->check(CLI::ExistingFile);
    app->add_option("--data", data_path)->required()->check(CLI::ExistingFile);
    app->add_flag("--by-type", by_type, "per question type EM");
    app->add_option("--trees", trees_path, "label types from bracketed trees")
        ->check(CLI::ExistingFile);
    app->add_flag("--others", include_others, "include the Others row");
    app->add_option("--manifest", manifest);
  }

  int run() {
    const PredictionSet predictions = read_predictions(predictions_path);
    Dataset data = load_ropes(data_path);
    if (!trees_path.empty()) label_types(data, load_trees(trees_path));
    const EmReport em = evaluate_em(predictions, data);
    Run r("eval", manifest_for(manifest, "", "eval"));
    r.manifest.input(predictions_path);
    r.manifest.input(data_path);
    if (!trees_path.empty()) r.manifest.input(trees_path);
    r.manifest.metric("em", em.em);
    r.manifest.metric("missing", static_cast<double>(em.missing.size()));
    for (const std::string& id : em.missing) std::cerr << "missing prediction: " << id << "\n";
    std::printf("EM %.2f (%zu/%zu)\n", em.em, em.correct, em.total);
    if (by_type) {
      for (const TypeRow& row : em_by_type(predictions, data, include_others)) {
        std::printf("%-6s %6zu %6.2f\n", type_name(row.type), row.count, row.em);
        r.manifest.metric(std::string("em_") + type_name(row.type), row.em);
      }
    }
    r.finish();
    return 0;
  }
};

struct SampleCandidates {
  ConfigFlags flags;
  std::string scheme_name, train_path, out, manifest;

  void attach(CLI::App* app) {
    flags.attach(app);
    app->add_option("--scheme", scheme_name, "10fold, 5fold, 2fold, 3turn, <k>fold, <k>turn");
    app->add_option("--train", train_path)->required()->check(CLI::ExistingFile);
    app->add_option("--out", out, "candidate file")->required();
    app->add_option("--manifest", manifest);
  }

  int run() {
    TrainConfig config = flags.build();
    if (!scheme_name.empty()) config.sampling_scheme = scheme_name;
    const SamplingScheme scheme = SamplingScheme::parse(config.sampling_scheme);
    const Dataset train = load_localized(train_path);
    const Vocabulary vocab = build_vocabulary(train);
    const SamplingResult result =
        sample_candidates(train, vocab, scheme, config,
                          [](const GeneratorInfo& g, const TrainReport& rep) {
                            std::fprintf(stderr, "%s trained on %zu examples\n", g.tag.c_str(),
                                         rep.trained_examples);
                          });
    std::vector<CandidateSet> sets;
    for (const auto& [index, set] : result.sets) sets.push_back(set);
    write_candidates(out, sets);
    std::vector<CandidateSet> labeled = sets;
    const double oracle = oracle_at_k(labeled, gold_answers(train), config.c);

    Run r("sample-candidates", manifest_for(manifest, out, "sample-candidates"));
    r.record(config);
    r.manifest.input(train_path);
    r.manifest.output(out);
    r.manifest.metric("labeled", static_cast<double>(sets.size()));
    r.manifest.metric("candidate_accuracy", result.candidate_accuracy);
    r.manifest.metric("oracle_at_c", oracle);
    r.finish();
    std::printf("%s: %zu labeled, candidate accuracy %.2f, oracle@%zu %.4f\n",
                scheme.name().c_str(), sets.size(), result.candidate_accuracy, config.c, oracle);
    return 0;
  }
};

// Pairs each example with its candidate set; examples without one are dropped.
std::vector<RerankItem> rerank_items(std::vector<PreparedExample>& prepared,
                                     const std::map<std::string, CandidateSet>& sets) {
  std::vector<RerankItem> out;
  for (PreparedExample& p : prepared) {
    const auto it = sets.find(p.example->id);
    if (it == sets.end() || it->second.candidates.empty()) continue;
    RerankItem item;
    item.example = &p;
    item.candidates = it->second.candidates;
    item.label = gold_candidate(*p.example, item.candidates);
    out.push_back(std::move(item));
  }
  return out;
}

struct TrainReranker {
  ConfigFlags flags;
  std::string train_path, candidates_path, dev_path, dev_candidates_path, init_from, out,
      manifest;

  void attach(CLI::App* app) {
    flags.attach(app);
    app->add_option("--train", train_path)->required()->check(CLI::ExistingFile);
    app->add_option("--candidates", candidates_path)->required()->check(CLI::ExistingFile);
    app->add_option("--init-from", init_from,
                    "span checkpoint whose encoder and matching modules seed the reranker")
        ->check(CLI::ExistingFile);
    app->add_option("--dev", dev_path)->check(CLI::ExistingFile);
    app->add_option("--dev-candidates", dev_candidates_path)->check(CLI::ExistingFile);
    app->add_option("--out", out, "checkpoint path")->required();
    app->add_option("--manifest", manifest);
  }

  int run() {
    if (dev_path.empty() != dev_candidates_path.empty()) {
      throw ConfigError("--dev and --dev-candidates go together");
    }
    const TrainConfig config = flags.build();
    const Dataset train = load_localized(train_path);
    const Dataset dev = dev_path.empty() ? Dataset{} : load_localized(dev_path);
    std::optional<Checkpoint> init;
    if (!init_from.empty()) {
      init = read_checkpoint(init_from);
      if (kind_of(*init) != "span") throw InputError(init_from + " is not a span model");
    }
    // A warm start has to keep the span model's token ids.
    const Vocabulary vocab = init ? vocab_of(*init) : build_vocabulary(train);
    std::vector<PreparedExample> ptrain = prepare(train, vocab, config);
    std::vector<PreparedExample> pdev = prepare(dev, vocab, config);
    std::vector<RerankItem> train_items =
        rerank_items(ptrain, by_id(read_candidates(candidates_path)));
    std::vector<RerankItem> dev_items;
    if (!dev_path.empty()) dev_items = rerank_items(pdev, by_id(read_candidates(dev_candidates_path)));

    RerankerModel model(config, vocab.size());
    if (init) {
      const std::size_t copied = load_matching(*init, model.store());
      if (copied == 0) throw ConfigError(init_from + " shares no parameters with the reranker");
      std::fprintf(stderr, "warm start: %zu tensors from %s\n", copied, init_from.c_str());
    }
    const TrainReport report = train_reranker(model, train_items, dev_items, print_epoch);
    Checkpoint ckpt = model.checkpoint();
    attach_vocab(ckpt, vocab);
    write_checkpoint(out, ckpt);

    Run r("train-reranker", manifest_for(manifest, out, "train-reranker"));
    r.record(config);
    r.manifest.input(train_path);
    r.manifest.input(candidates_path);
    if (init) r.manifest.input(init_from);
    if (!dev_path.empty()) {
      r.manifest.input(dev_path);
      r.manifest.input(dev_candidates_path);
    }
    r.manifest.output(out);
    r.manifest.metric("trained_examples", static_cast<double>(report.trained_examples));
    r.manifest.metric("skipped_examples", static_cast<double>(report.skipped_examples));
    const double total = static_cast<double>(report.trained_examples + report.skipped_examples);
    r.manifest.metric("skip_rate",
                      total > 0 ? static_cast<double>(report.skipped_examples) / total : 0.0);
    if (report.best_dev_em) r.manifest.metric("best_dev_em", *report.best_dev_em);
    r.finish();
    std::printf("trained on %zu, skipped %zu without a gold candidate\n",
                report.trained_examples, report.skipped_examples);
    return 0;
  }
};

struct Rerank {
  std::string model_path, data_path, candidates_path, out, votes_out, manifest;

  void attach(CLI::App* app) {
    app->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
    app->add_option("--data", data_path)->required()->check(CLI::ExistingFile);
    app->add_option("--candidates", candidates_path)->required()->check(CLI::ExistingFile);
    app->add_option("--out", out, "predictions file")->required();
    app->add_option("--votes-out", votes_out, "vote file for the ensemble command");
    app->add_option("--manifest", manifest);
  }

  int run() {
    const Checkpoint ckpt = read_checkpoint(model_path);
    if (kind_of(ckpt) != "reranker") throw InputError(model_path + " is not a reranker");
    const RerankerModel model = RerankerModel::from_checkpoint(ckpt);
    const Vocabulary vocab = vocab_of(ckpt);
    const Dataset data = load_localized(data_path);
    std::vector<PreparedExample> prepared = prepare(data, vocab, model.config());
    std::vector<RerankItem> items = rerank_items(prepared, by_id(read_candidates(candidates_path)));

    const std::string tag = std::filesystem::path(model_path).stem().string();
    PredictionSet predictions;
    std::vector<RerankVote> votes;
    for (RerankItem& item : items) {
      const RerankDecision d = rerank(model, *item.example, item.candidates);
      const std::string& id = item.example->example->id;
      predictions[id] = {item.candidates[d.chosen].text, d.probs[d.chosen], item.candidates};
      votes.push_back({tag, id, d.chosen, d.probs[d.chosen]});
    }
    write_predictions(out, predictions);
    Run r("rerank", manifest_for(manifest, out, "rerank"));
    r.record(model.config());
    r.manifest.input(model_path);
    r.manifest.input(data_path);
    r.manifest.input(candidates_path);
    r.manifest.output(out);
    if (!votes_out.empty()) {
      write_votes(votes_out, votes);
      r.manifest.output(votes_out);
    }
    const EmReport em = evaluate_em(predictions, data);
    r.manifest.metric("em", em.em);
    r.finish();
    std::printf("EM %.2f (%zu/%zu)\n", em.em, em.correct, em.total);
    return 0;
  }
};

struct Ensemble {
  std::vector<std::string> vote_paths;
  std::string candidates_path, data_path, out, manifest;

  void attach(CLI::App* app) {
    app->add_option("--votes", vote_paths, "one vote file per reranker")
        ->required()
        ->check(CLI::ExistingFile);
    app->add_option("--candidates", candidates_path, "the shared candidate file")
        ->required()
        ->check(CLI::ExistingFile);
    app->add_option("--data", data_path, "reports EM when given")->check(CLI::ExistingFile);
    app->add_option("--out", out, "predictions file")->required();
    app->add_option("--manifest", manifest);
  }

  int run() {
    std::vector<RerankVote> votes;
    for (const std::string& path : vote_paths) {
      for (RerankVote& v : read_votes(path)) votes.push_back(std::move(v));
    }
    const std::map<std::string, CandidateSet> sets = by_id(read_candidates(candidates_path));
    const std::map<std::string, std::size_t> chosen = ensemble_vote(votes, sets);
    PredictionSet predictions;
    for (const auto& [id, index] : chosen) {
      const SpanCandidate& c = sets.at(id).candidates[index];
      predictions[id] = {c.text, c.score, sets.at(id).candidates};
    }
    write_predictions(out, predictions);
    Run r("ensemble", manifest_for(manifest, out, "ensemble"));
    for (const std::string& path : vote_paths) r.manifest.input(path);
    r.manifest.input(candidates_path);
    r.manifest.output(out);
    r.manifest.metric("voters", static_cast<double>(vote_paths.size()));
    if (!data_path.empty()) {
      r.manifest.input(data_path);
      const EmReport em = evaluate_em(predictions, load_ropes(data_path));
      r.manifest.metric("em", em.em);
      std::printf("EM %.2f (%zu/%zu)\n", em.em, em.correct, em.total);
    }
    r.finish();
    return 0;
  }
};

struct Oracle {
  std::string candidates_path, data_path, manifest;
  std::size_t k = 1;

  void attach(CLI::App* app) {
    app->add_option("--candidates", candidates_path)->required()->check(CLI::ExistingFile);
    app->add_option("--data", data_path, "gold answers")->required()->check(CLI::ExistingFile);
    app->add_option("--k", k, "candidates considered");
    app->add_option("--manifest", manifest);
  }

  int run() {
    const double value = oracle_at_k(read_candidates(candidates_path),
                                     gold_answers(load_ropes(data_path)), k);
    Run r("oracle", manifest_for(manifest, "", "oracle"));
    r.manifest.config("k", std::to_string(k));
    r.manifest.input(candidates_path);
    r.manifest.input(data_path);
    r.manifest.metric("oracle", value);
    r.finish();
    std::printf("oracle@%zu %g\n", k, value);
    return 0;
  }
};

struct AnalyzeTypes {
  std::string data_path, trees_path, out, manifest;

  void attach(CLI::App* app) {
    app->add_option("--data", data_path)->required()->check(CLI::ExistingFile);
    app->add_option("--trees", trees_path, "<id>\\t<bracketed tree> lines")
        ->required()
        ->check(CLI::ExistingFile);
    app->add_option("--out", out, "dataset with type labels");
    app->add_option("--manifest", manifest);
  }

  int run() {
    Dataset data = load_ropes(data_path);
    const TypeAnalysis analysis = label_types(data, load_trees(trees_path));
    Dataset labeled;
    for (const Example& ex : data) {
      if (ex.type) labeled.push_back(ex);
    }
    Run r("analyze-types", manifest_for(manifest, out, "analyze-types"));
    r.manifest.input(data_path);
    r.manifest.input(trees_path);
    if (!out.empty()) {
      write_ropes(out, data);
      r.manifest.output(out);
    }
    r.manifest.metric("labeled", static_cast<double>(analysis.labeled));
    r.manifest.metric("skipped", static_cast<double>(analysis.skipped.size()));
    std::printf("labeled %zu, skipped %zu\n", analysis.labeled, analysis.skipped.size());
    for (const auto& [type, pct] : type_distribution(labeled)) {
      std::printf("%-6s %6.2f%%\n", type_name(type), pct);
      r.manifest.metric(std::string("percent_") + type_name(type), pct);
    }
    r.finish();
    return 0;
  }
};

struct Ablate {
  ConfigFlags flags;
  std::string train_path, dev_path, seeds = "1,2,3", manifest;

  void attach(CLI::App* app) {
    flags.attach(app);
    app->add_option("--train", train_path)->required()->check(CLI::ExistingFile);
    app->add_option("--dev", dev_path)->required()->check(CLI::ExistingFile);
    app->add_option("--seeds", seeds, "comma-separated");
    app->add_option("--manifest", manifest);
  }

  int run() {
    const TrainConfig config = flags.build();
    const Dataset train = load_localized(train_path);
    const Dataset dev = load_localized(dev_path);
    const AblationTable table = run_ablation_suite(
        train, dev, config, parse_seeds(seeds), [](const std::string& s) { std::cerr << s << "\n"; });
    Run r("ablate", manifest_for(manifest, "", "ablate"));
    r.record(config);
    r.manifest.config("seeds", seeds);
    r.manifest.input(train_path);
    r.manifest.input(dev_path);
    for (const AblationRow& row : table.rows) {
      std::printf("%-14s %6.2f %+6.2f\n", row.name.c_str(), row.em, row.delta);
      r.manifest.metric(row.name, row.em);
    }
    std::printf("%-14s %6s %+6.2f\n", "average", "", table.average_delta);
    r.manifest.metric("average_delta", table.average_delta);
    r.finish();
    return 0;
  }
};

struct Compare {
  ConfigFlags flags;
  std::string train_path, dev_path, seeds = "1,2,3", manifest;

  void attach(CLI::App* app) {
    flags.attach(app);
    app->add_option("--train", train_path)->required()->check(CLI::ExistingFile);
    app->add_option("--dev", dev_path)->required()->check(CLI::ExistingFile);
    app->add_option("--seeds", seeds, "comma-separated");
    app->add_option("--manifest", manifest);
  }

  int run() {
    const TrainConfig config = flags.build();
    const Dataset train = load_localized(train_path);
    const Dataset dev = load_localized(dev_path);
    const SystemComparison result = run_system_comparison(
        train, dev, config, parse_seeds(seeds), [](const std::string& s) { std::cerr << s << "\n"; });
    Run r("compare", manifest_for(manifest, "", "compare"));
    r.record(config);
    r.manifest.config("seeds", seeds);
    r.manifest.input(train_path);
    r.manifest.input(dev_path);
    const std::pair<const char*, double> rows[] = {{"baseline", result.baseline},
                                                   {"multistep", result.multistep},
                                                   {"reranker", result.reranker},
                                                   {"ensemble", result.ensemble}};
    for (const auto& [name, em] : rows) {
      std::printf("%-10s %6.2f\n", name, em);
      r.manifest.metric(name, em);
    }
    r.finish();
    return 0;
  }
};

struct Gradcheck {
  ConfigFlags flags;
  std::string mode = "multistep", manifest;
  std::size_t samples = 100;
  std::size_t examples = 2;
  double threshold = 1e-3;
  double eps = 1e-5;

  void attach(CLI::App* app) {
    flags.attach(app);
    app->add_option("--mode", mode)->check(CLI::IsMember({"baseline", "multistep"}));
    app->add_option("--samples", samples, "coordinates checked (0 = all)");
    app->add_option("--examples", examples, "synthetic examples in the loss");
    app->add_option("--threshold", threshold, "fail above this relative error");
    app->add_option("--eps", eps, "finite-difference step");
    app->add_option("--manifest", manifest);
  }

  int run() {
    const TrainConfig config = flags.build();
    SynthConfig synth;
    synth.count = examples;
    synth.seed = config.seed;
    synth.mixture = TypeMixture::uniform();
    GradientCheckOptions options;
    options.samples = samples;
    options.seed = config.seed;
    options.eps = eps;
    const GradientCheckReport report =
        span_gradient_check(generate_synthetic(synth), parse_mode(mode), config, options);
    Run r("gradcheck", manifest_for(manifest, "", "gradcheck"));
    r.record(config);
    r.manifest.config("mode", mode);
    r.manifest.metric("max_relative_error", report.max_relative_error);
    r.manifest.metric("coordinates", static_cast<double>(report.coordinates));
    r.manifest.metric_text("worst_parameter", report.worst_parameter);
    r.finish();
    std::printf("max relative error %.3e over %zu coordinates (worst: %s)\n",
                report.max_relative_error, report.coordinates, report.worst_parameter.c_str());
    return report.max_relative_error < threshold ? 0 : kFailureExit;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"msqa: multi-step inference for situated reasoning QA"};
  app.require_subcommand(1);

  GenSynth gen_synth;
  Train train;
  Predict predict;
  Eval eval;
  SampleCandidates sample;
  TrainReranker train_reranker;
  Rerank rerank;
  Ensemble ensemble;
  Oracle oracle;
  AnalyzeTypes analyze;
  Ablate ablate;
  Compare compare;
  Gradcheck gradcheck;

  std::map<CLI::App*, std::function<int()>> handlers;
  auto add = [&](auto& command, const char* name, const char* help) {
    CLI::App* sub = app.add_subcommand(name, help);
    command.attach(sub);
    handlers[sub] = [&command]() { return command.run(); };
  };
  add(gen_synth, "gen-synth", "generate a synthetic chained-reasoning dataset");
  add(train, "train", "train a baseline or multi-step span model");
  add(predict, "predict", "decode answers with a span model");
  add(eval, "eval", "exact-match evaluation");
  add(sample, "sample-candidates", "self-sample reranker training candidates");
  add(train_reranker, "train-reranker", "train a multi-step reranker");
  add(rerank, "rerank", "pick one candidate per example with a reranker");
  add(ensemble, "ensemble", "plurality vote over reranker votes");
  add(oracle, "oracle", "oracle@k of a candidate file");
  add(analyze, "analyze-types", "label question types from constituency trees");
  add(ablate, "ablate", "module ablation table");
  add(compare, "compare", "baseline / multi-step / reranker / ensemble comparison");
  add(gradcheck, "gradcheck", "finite-difference check of the span loss");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageExit;
  }
  try {
    for (CLI::App* sub : app.get_subcommands()) return handlers.at(sub)();
  } catch (const ConfigError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsageExit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailureExit;
  }
  return 0;
}
