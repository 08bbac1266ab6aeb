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

#include "msqa/rerank.h"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <set>

#include "msqa/errors.h"
#include "msqa/eval.h"
#include "msqa/rng.h"

namespace msqa {
namespace {

constexpr std::uint64_t kPartitionSalt = 0xf01d;
constexpr std::uint64_t kGeneratorSalt = 0x9e4;

}  // namespace

SamplingScheme SamplingScheme::parse(std::string_view name) {
  SamplingScheme out;
  std::string_view digits = name;
  if (name.ends_with("fold")) {
    out.turn = false;
    digits.remove_suffix(4);
  } else if (name.ends_with("turn")) {
    out.turn = true;
    digits.remove_suffix(4);
  } else {
    throw ConfigError("sampling scheme \"" + std::string(name) + "\" must be <k>fold or <k>turn");
  }
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), out.k);
  if (ec != std::errc() || ptr != digits.data() + digits.size() || out.k < 2) {
    throw ConfigError("sampling scheme \"" + std::string(name) + "\": k must be an integer >= 2");
  }
  return out;
}

std::string SamplingScheme::name() const {
  return std::to_string(k) + (turn ? "turn" : "fold");
}

std::vector<std::vector<std::size_t>> partition(std::size_t n, std::size_t k,
                                                std::uint64_t seed) {
  if (k < 2) throw ConfigError("partition: k must be at least 2");
  if (k > n) {
    throw ConfigError("partition: k = " + std::to_string(k) + " exceeds dataset size " +
                      std::to_string(n));
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(Rng::mix(seed, kPartitionSalt));
  rng.shuffle(std::span<std::size_t>(order));
  std::vector<std::vector<std::size_t>> parts(k);
  for (std::size_t p = 0, begin = 0; p < k; ++p) {
    const std::size_t size = n / k + (p < n % k ? 1 : 0);
    parts[p].assign(order.begin() + static_cast<std::ptrdiff_t>(begin),
                    order.begin() + static_cast<std::ptrdiff_t>(begin + size));
    std::sort(parts[p].begin(), parts[p].end());
    begin += size;
  }
  return parts;
}

SamplingResult sample_candidates(const Dataset& train, const Vocabulary& vocab,
                                 const SamplingScheme& scheme, const TrainConfig& config,
                                 const GeneratorCallback& on_generator) {
  config.validate();
  SamplingResult result;
  result.scheme = scheme;
  result.parts = partition(train.size(), scheme.k, config.seed);

  // Each generator labels one part after training on its source parts.
  std::vector<GeneratorInfo> plan;
  for (std::size_t p = 0; p < scheme.k; ++p) {
    GeneratorInfo info;
    if (scheme.turn) {
      if (p == 0) continue;
      info.training_parts = {p - 1};
    } else {
      for (std::size_t q = 0; q < scheme.k; ++q) {
        if (q != p) info.training_parts.push_back(q);
      }
    }
    info.labeled_part = p;
    info.tag = scheme.name() + "/g" + std::to_string(plan.size());
    plan.push_back(std::move(info));
  }

  std::size_t labeled = 0, correct = 0;
  for (std::size_t g = 0; g < plan.size(); ++g) {
    const GeneratorInfo& info = plan[g];
    Dataset part_train, part_label;
    for (std::size_t q : info.training_parts) {
      for (std::size_t i : result.parts[q]) part_train.push_back(train[i]);
    }
    for (std::size_t i : result.parts[info.labeled_part]) part_label.push_back(train[i]);

    TrainConfig gen_config = config;
    gen_config.seed = Rng::mix(config.seed, kGeneratorSalt + g);
    std::vector<PreparedExample> prepared_train = prepare(part_train, vocab, gen_config);
    std::vector<PreparedExample> prepared_label = prepare(part_label, vocab, gen_config);
    SpanModel model(SpanMode::kBaseline, gen_config, vocab.size());
    const TrainReport report = train_span_model(model, prepared_train, {});
    const PredictionSet predictions = predict_spans(model, prepared_label, config.c);

    const std::vector<std::size_t>& members = result.parts[info.labeled_part];
    for (std::size_t m = 0; m < members.size(); ++m) {
      const Example& ex = train[members[m]];
      CandidateSet set;
      set.example_id = ex.id;
      set.generator = info.tag;
      set.candidates = predictions.at(ex.id).candidates;
      ++labeled;
      correct += exact_match(set.candidates.front().text, ex.answer);
      result.sets[members[m]] = std::move(set);
    }
    if (on_generator) on_generator(info, report);
  }
  result.generators = std::move(plan);
  if (labeled > 0) {
    result.candidate_accuracy =
        100.0 * static_cast<double>(correct) / static_cast<double>(labeled);
  }
  return result;
}

SamplingResult kfold_candidates(const Dataset& train, const Vocabulary& vocab, std::size_t k,
                                const TrainConfig& config) {
  return sample_candidates(train, vocab, SamplingScheme{false, k}, config);
}

SamplingResult kturn_candidates(const Dataset& train, const Vocabulary& vocab, std::size_t k,
                                const TrainConfig& config) {
  return sample_candidates(train, vocab, SamplingScheme{true, k}, config);
}

std::map<std::string, std::size_t> ensemble_vote(
    const std::vector<RerankVote>& votes, const std::map<std::string, CandidateSet>& sets) {
  std::set<std::string> voters;
  std::map<std::string, std::vector<const RerankVote*>> by_example;
  for (const RerankVote& v : votes) {
    voters.insert(v.reranker);
    by_example[v.example_id].push_back(&v);
  }
  std::map<std::string, std::size_t> out;
  for (const auto& [id, ballots] : by_example) {
    auto set = sets.find(id);
    if (set == sets.end()) throw InputError("ensemble: no candidate list for " + id);
    const std::size_t c = set->second.candidates.size();
    std::vector<std::size_t> count(c, 0);
    std::vector<double> mass(c, 0.0);
    std::set<std::string> seen;
    for (const RerankVote* v : ballots) {
      if (!seen.insert(v->reranker).second) {
        throw InputError("ensemble: " + v->reranker + " voted twice on " + id);
      }
      if (v->index >= c) {
        throw InputError("ensemble: " + v->reranker + " voted for candidate " +
                         std::to_string(v->index) + " of " + id + ", which has " +
                         std::to_string(c));
      }
      ++count[v->index];
      mass[v->index] += v->probability;
    }
    if (seen.size() != voters.size()) {
      throw InputError("ensemble: " + std::to_string(voters.size() - seen.size()) +
                       " reranker(s) did not vote on " + id);
    }
    std::size_t best = 0;
    for (std::size_t k = 1; k < c; ++k) {
      if (count[k] > count[best] || (count[k] == count[best] && mass[k] > mass[best])) {
        best = k;
      }
    }
    out[id] = best;
  }
  return out;
}

double oracle_at_k(const std::vector<CandidateSet>& sets,
                   const std::map<std::string, std::string>& gold, std::size_t k) {
  if (k == 0) throw InputError("oracle: k must be at least 1");
  if (sets.empty()) return 0.0;
  std::size_t hits = 0;
  for (const CandidateSet& set : sets) {
    auto it = gold.find(set.example_id);
    if (it == gold.end()) throw InputError("oracle: no gold answer for " + set.example_id);
    const std::string target = normalize_answer(it->second);
    const std::size_t limit = std::min(k, set.candidates.size());
    for (std::size_t r = 0; r < limit; ++r) {
      if (normalize_answer(set.candidates[r].text) == target) {
        ++hits;
        break;
      }
    }
  }
  return static_cast<double>(hits) / static_cast<double>(sets.size());
}

std::map<std::string, std::string> gold_answers(const Dataset& dataset) {
  std::map<std::string, std::string> out;
  for (const Example& ex : dataset) out[ex.id] = ex.answer;
  return out;
}

}  // namespace msqa
