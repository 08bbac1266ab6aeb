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

#include "msqa/experiments.h"

#include <cstdio>
#include <numeric>

#include "msqa/checkpoint.h"
#include "msqa/errors.h"
#include "msqa/eval.h"
#include "msqa/ops.h"
#include "msqa/rng.h"

namespace msqa {
namespace {

constexpr std::uint64_t kRerankerSalt = 0x4e4;

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

void say(const ProgressFn& progress, const std::string& line) {
  if (progress) progress(line);
}

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

void require_seeds(const std::vector<std::uint64_t>& seeds) {
  if (seeds.empty()) throw ConfigError("experiment needs at least one seed");
}

TypeMixture mixture_of(double np, double vp, double adjp, double advp, double others) {
  TypeMixture m;
  m.proportions = {np / 100.0, vp / 100.0, adjp / 100.0, advp / 100.0, others / 100.0};
  // Absorb the rounding of the published percentages into NP.
  double total = 0.0;
  for (double p : m.proportions) total += p;
  m.proportions[0] += 1.0 - total;
  return m;
}

double span_model_em(SpanMode mode, const TrainConfig& config, const Vocabulary& vocab,
                     std::vector<PreparedExample>& train, std::vector<PreparedExample>& dev,
                     std::optional<LayoutConfig> layout = std::nullopt) {
  SpanModel model(mode, config, vocab.size(), layout);
  train_span_model(model, train, dev);
  return span_em(model, dev);
}

}  // namespace

TypeMixture ropes_train_mixture() { return mixture_of(84.17, 3.35, 9.20, 2.50, 0.78); }
TypeMixture ropes_dev_mixture() { return mixture_of(85.19, 1.24, 10.25, 3.32, 0.00); }
TypeMixture ropes_test_mixture() { return mixture_of(47.19, 17.37, 19.36, 10.23, 5.85); }

SystemComparison run_system_comparison(const Dataset& train, const Dataset& dev,
                                       const TrainConfig& config,
                                       const std::vector<std::uint64_t>& seeds,
                                       const ProgressFn& progress) {
  require_seeds(seeds);
  config.validate();
  const SamplingScheme scheme = SamplingScheme::parse(config.sampling_scheme);
  const Vocabulary vocab = build_vocabulary(train);
  SystemComparison out;
  std::vector<double> reranker_ems;

  for (std::uint64_t seed : seeds) {
    TrainConfig cfg = config;
    cfg.seed = seed;
    std::vector<PreparedExample> ptrain = prepare(train, vocab, cfg);
    std::vector<PreparedExample> pdev = prepare(dev, vocab, cfg);
    SystemRun run;
    run.seed = seed;

    SpanModel baseline(SpanMode::kBaseline, cfg, vocab.size());
    train_span_model(baseline, ptrain, pdev);
    run.baseline = span_em(baseline, pdev);
    say(progress, "seed " + std::to_string(seed) + " baseline " + fixed2(run.baseline));

    SpanModel multistep(SpanMode::kMultiStep, cfg, vocab.size());
    train_span_model(multistep, ptrain, pdev);
    run.multistep = span_em(multistep, pdev);
    // Rerankers start from this model's encoder and upstream modules.
    const Checkpoint span_weights = multistep.checkpoint();
    say(progress, "seed " + std::to_string(seed) + " multistep " + fixed2(run.multistep));

    const SamplingResult sampled = sample_candidates(train, vocab, scheme, cfg);
    run.train_candidate_accuracy = sampled.candidate_accuracy;
    std::vector<RerankItem> train_items;
    std::size_t skipped = 0;
    for (const auto& [index, set] : sampled.sets) {
      RerankItem item;
      item.example = &ptrain[index];
      item.candidates = set.candidates;
      item.label = gold_candidate(*ptrain[index].example, set.candidates);
      skipped += item.label ? 0 : 1;
      train_items.push_back(std::move(item));
    }
    run.reranker_skip_rate =
        train_items.empty() ? 0.0
                            : static_cast<double>(skipped) / static_cast<double>(train_items.size());

    // One designated baseline supplies the dev candidates every voter sees.
    const PredictionSet dev_predictions = predict_spans(baseline, pdev, cfg.c);
    std::vector<RerankItem> dev_items;
    std::map<std::string, CandidateSet> dev_sets;
    std::vector<CandidateSet> dev_list;
    for (PreparedExample& p : pdev) {
      RerankItem item;
      item.example = &p;
      item.candidates = dev_predictions.at(p.example->id).candidates;
      item.label = gold_candidate(*p.example, item.candidates);
      CandidateSet set{p.example->id, item.candidates, "baseline"};
      dev_sets[p.example->id] = set;
      dev_list.push_back(std::move(set));
      dev_items.push_back(std::move(item));
    }
    run.dev_oracle = oracle_at_k(dev_list, gold_answers(dev), cfg.c);

    std::vector<RerankVote> votes;
    for (std::size_t r = 0; r < cfg.ensemble_size; ++r) {
      TrainConfig rc = cfg;
      rc.seed = Rng::mix(seed, kRerankerSalt + r);
      RerankerModel reranker(rc, vocab.size());
      load_matching(span_weights, reranker.store());
      train_reranker(reranker, train_items, dev_items);
      std::size_t correct = 0;
      for (RerankItem& item : dev_items) {
        const RerankDecision d = rerank(reranker, *item.example, item.candidates);
        correct += exact_match(item.candidates[d.chosen].text, item.example->example->answer);
        votes.push_back({"reranker-" + std::to_string(r), item.example->example->id, d.chosen,
                         d.probs[d.chosen]});
      }
      const double em = 100.0 * static_cast<double>(correct) / static_cast<double>(dev.size());
      run.rerankers.push_back(em);
      reranker_ems.push_back(em);
      say(progress, "seed " + std::to_string(seed) + " reranker " + std::to_string(r) + " " +
                        fixed2(em));
    }
    const std::map<std::string, std::size_t> chosen = ensemble_vote(votes, dev_sets);
    std::size_t correct = 0;
    for (const Example& ex : dev) {
      correct += exact_match(dev_sets.at(ex.id).candidates[chosen.at(ex.id)].text, ex.answer);
    }
    run.ensemble = 100.0 * static_cast<double>(correct) / static_cast<double>(dev.size());
    say(progress, "seed " + std::to_string(seed) + " ensemble " + fixed2(run.ensemble));
    out.runs.push_back(std::move(run));
  }

  std::vector<double> b, m, e;
  for (const SystemRun& run : out.runs) {
    b.push_back(run.baseline);
    m.push_back(run.multistep);
    e.push_back(run.ensemble);
  }
  out.baseline = mean_of(b);
  out.multistep = mean_of(m);
  out.reranker = mean_of(reranker_ems);
  out.ensemble = mean_of(e);
  return out;
}

AblationTable run_ablation_suite(const Dataset& train, const Dataset& dev,
                                 const TrainConfig& config,
                                 const std::vector<std::uint64_t>& seeds,
                                 const ProgressFn& progress) {
  require_seeds(seeds);
  config.validate();
  const Vocabulary vocab = build_vocabulary(train);
  const LayoutConfig full = LayoutConfig::full(config.encoder_width, 2, config.heads);

  AblationTable table;
  table.rows.push_back({"full", std::nullopt, {}, 0.0, 0.0});
  for (ModuleId id : kAllModules) {
    table.rows.push_back({std::string("w/o ") + module_name(id), id, {}, 0.0, 0.0});
  }
  for (AblationRow& row : table.rows) {
    const LayoutConfig layout = row.removed ? ablate(full, *row.removed) : full;
    for (std::uint64_t seed : seeds) {
      TrainConfig cfg = config;
      cfg.seed = seed;
      std::vector<PreparedExample> ptrain = prepare(train, vocab, cfg);
      std::vector<PreparedExample> pdev = prepare(dev, vocab, cfg);
      row.ems.push_back(span_model_em(SpanMode::kMultiStep, cfg, vocab, ptrain, pdev, layout));
      say(progress, row.name + " seed " + std::to_string(seed) + " " + fixed2(row.ems.back()));
    }
    row.em = mean_of(row.ems);
  }
  double total = 0.0;
  for (AblationRow& row : table.rows) {
    row.delta = row.em - table.rows.front().em;
    if (row.removed) total += row.delta;
  }
  table.average_delta = total / static_cast<double>(kAllModules.size());
  return table;
}

SchemeResult run_sampling_scheme(const Dataset& train, const SamplingScheme& scheme,
                                 const TrainConfig& config,
                                 const std::vector<std::uint64_t>& seeds,
                                 const ProgressFn& progress) {
  require_seeds(seeds);
  const Vocabulary vocab = build_vocabulary(train);
  const std::map<std::string, std::string> gold = gold_answers(train);
  SchemeResult out;
  out.scheme = scheme.name();
  std::vector<double> accuracy, oracle;
  for (std::uint64_t seed : seeds) {
    TrainConfig cfg = config;
    cfg.seed = seed;
    const SamplingResult sampled = sample_candidates(train, vocab, scheme, cfg);
    std::vector<CandidateSet> sets;
    for (const auto& [index, set] : sampled.sets) sets.push_back(set);
    accuracy.push_back(sampled.candidate_accuracy);
    oracle.push_back(100.0 * oracle_at_k(sets, gold, cfg.c));
    out.labeled = sets.size();
    say(progress, scheme.name() + " seed " + std::to_string(seed) + " accuracy " +
                      fixed2(accuracy.back()));
  }
  out.candidate_accuracy = mean_of(accuracy);
  out.oracle = mean_of(oracle);
  return out;
}

ShiftResult run_type_shift(const Dataset& train, const Dataset& matched, const Dataset& shifted,
                           SpanMode mode, const TrainConfig& config,
                           const std::vector<std::uint64_t>& seeds,
                           const ProgressFn& progress) {
  require_seeds(seeds);
  const Vocabulary vocab = build_vocabulary(train);
  ShiftResult out;
  std::vector<double> m, s;
  for (std::uint64_t seed : seeds) {
    TrainConfig cfg = config;
    cfg.seed = seed;
    std::vector<PreparedExample> ptrain = prepare(train, vocab, cfg);
    std::vector<PreparedExample> pmatched = prepare(matched, vocab, cfg);
    std::vector<PreparedExample> pshifted = prepare(shifted, vocab, cfg);
    // No dev-based selection: neither evaluation set may steer training.
    SpanModel model(mode, cfg, vocab.size());
    train_span_model(model, ptrain, {});
    ShiftRun run{seed, span_em(model, pmatched), span_em(model, pshifted)};
    say(progress, "seed " + std::to_string(seed) + " matched " + fixed2(run.matched) +
                      " shifted " + fixed2(run.shifted));
    m.push_back(run.matched);
    s.push_back(run.shifted);
    out.runs.push_back(run);
  }
  out.matched = mean_of(m);
  out.shifted = mean_of(s);
  return out;
}

GradientCheckReport span_gradient_check(const Dataset& examples, SpanMode mode,
                                        const TrainConfig& config,
                                        const GradientCheckOptions& options) {
  const Vocabulary vocab = build_vocabulary(examples);
  std::vector<PreparedExample> prepared = prepare(examples, vocab, config);
  std::erase_if(prepared, [](const PreparedExample& p) { return !p.gold; });
  if (prepared.empty()) throw InputError("gradient check: no example has a gold span");
  SpanModel model(mode, config, vocab.size());
  auto loss = [&]() {
    Tensor total = model.loss(prepared[0]);
    for (std::size_t k = 1; k < prepared.size(); ++k) total = add(total, model.loss(prepared[k]));
    return total;
  };
  return gradient_check(loss, model.store(), options);
}

}  // namespace msqa
