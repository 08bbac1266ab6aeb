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

// Candidate generation by self-sampling, voting ensembles and oracle@k.

#ifndef MSQA_RERANK_H_
#define MSQA_RERANK_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "msqa/data.h"
#include "msqa/decode.h"
#include "msqa/train.h"

namespace msqa {

struct CandidateSet {
  std::string example_id;
  std::vector<SpanCandidate> candidates;  // best first
  std::string generator;                  // which fold/turn model produced them
};

// "10fold", "5fold", "2fold", "3turn", or any "<k>fold" / "<k>turn".
struct SamplingScheme {
  bool turn = true;
  std::size_t k = 3;

  static SamplingScheme parse(std::string_view name);
  std::string name() const;
};

// Seeded split of [0, n) into k near-equal parts (sizes differ by at most 1).
std::vector<std::vector<std::size_t>> partition(std::size_t n, std::size_t k,
                                                std::uint64_t seed);

struct GeneratorInfo {
  std::string tag;
  std::vector<std::size_t> training_parts;
  std::size_t labeled_part = 0;
};

struct SamplingResult {
  SamplingScheme scheme;
  std::vector<std::vector<std::size_t>> parts;  // dataset indices per part
  std::vector<GeneratorInfo> generators;
  // Dataset index to its candidate set; examples in an unlabeled part (part 1
  // of a k-turn run) are absent.
  std::map<std::size_t, CandidateSet> sets;
  double candidate_accuracy = 0.0;  // top-1 EM over labeled examples, percent
};

using GeneratorCallback = std::function<void(const GeneratorInfo&, const TrainReport&)>;

// k-fold: every part is labeled by a baseline trained on the other k-1 parts.
// k-turn: part i+1 is labeled by a baseline trained on part i; part 1 gets
// nothing. Generator seeds derive from config.seed.
SamplingResult sample_candidates(const Dataset& train, const Vocabulary& vocab,
                                 const SamplingScheme& scheme, const TrainConfig& config,
                                 const GeneratorCallback& on_generator = {});
SamplingResult kfold_candidates(const Dataset& train, const Vocabulary& vocab, std::size_t k,
                                const TrainConfig& config);
SamplingResult kturn_candidates(const Dataset& train, const Vocabulary& vocab, std::size_t k,
                                const TrainConfig& config);

struct RerankVote {
  std::string reranker;
  std::string example_id;
  std::size_t index = 0;
  double probability = 0.0;
};

// Plurality vote per example over a shared candidate list; ties go to the
// larger summed probability, then to the better baseline rank. Every reranker
// must vote exactly once on every example, within the list's bounds.
std::map<std::string, std::size_t> ensemble_vote(
    const std::vector<RerankVote>& votes, const std::map<std::string, CandidateSet>& sets);

// Fraction of sets whose first k candidates contain the normalized gold answer.
double oracle_at_k(const std::vector<CandidateSet>& sets,
                   const std::map<std::string, std::string>& gold, std::size_t k);

std::map<std::string, std::string> gold_answers(const Dataset& dataset);

}  // namespace msqa

#endif  // MSQA_RERANK_H_
