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

// Drivers for the comparison studies: systems (baseline, multi-step,
// reranker, ensemble), module ablations, self-sampling schemes, question-type
// shift and oracle@k. Each averages over the given seeds.

#ifndef MSQA_EXPERIMENTS_H_
#define MSQA_EXPERIMENTS_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "msqa/data.h"
#include "msqa/nmn.h"
#include "msqa/optim.h"
#include "msqa/rerank.h"
#include "msqa/train.h"

namespace msqa {

using ProgressFn = std::function<void(const std::string&)>;

// Table 2 columns (percent, NP/VP/ADJP/ADVP/Others).
TypeMixture ropes_train_mixture();
TypeMixture ropes_dev_mixture();
TypeMixture ropes_test_mixture();

struct SystemRun {
  std::uint64_t seed = 0;
  double baseline = 0.0;
  double multistep = 0.0;
  std::vector<double> rerankers;
  double ensemble = 0.0;
  double train_candidate_accuracy = 0.0;
  double reranker_skip_rate = 0.0;  // fraction of candidate sets without gold
  double dev_oracle = 0.0;          // oracle@c of the dev candidates
};

struct SystemComparison {
  std::vector<SystemRun> runs;
  double baseline = 0.0;
  double multistep = 0.0;
  double reranker = 0.0;  // mean over seeds and rerankers
  double ensemble = 0.0;
};

// Per seed: baseline and multi-step span models; reranker training
// candidates from config.sampling_scheme; dev candidates (top config.c) from
// that seed's baseline, shared by config.ensemble_size rerankers that differ
// only in seed; their plurality vote. Each reranker is warm-started from the
// seed's multi-step span model (encoder, Q-SELECT, B-SELECT, B-CHAIN).
SystemComparison run_system_comparison(const Dataset& train, const Dataset& dev,
                                       const TrainConfig& config,
                                       const std::vector<std::uint64_t>& seeds,
                                       const ProgressFn& progress = {});

struct AblationRow {
  std::string name;  // "full" or "w/o <module>"
  std::optional<ModuleId> removed;
  std::vector<double> ems;  // per seed
  double em = 0.0;
  double delta = 0.0;  // against the full layout
};

struct AblationTable {
  std::vector<AblationRow> rows;  // full first, then one per module
  double average_delta = 0.0;     // over the ablation rows
};

// Same seeds and data order for every row; only the layout changes.
AblationTable run_ablation_suite(const Dataset& train, const Dataset& dev,
                                 const TrainConfig& config,
                                 const std::vector<std::uint64_t>& seeds,
                                 const ProgressFn& progress = {});

struct SchemeResult {
  std::string scheme;
  double candidate_accuracy = 0.0;  // mean over seeds, percent
  double oracle = 0.0;              // oracle@c over labeled examples
  std::size_t labeled = 0;
};

SchemeResult run_sampling_scheme(const Dataset& train, const SamplingScheme& scheme,
                                 const TrainConfig& config,
                                 const std::vector<std::uint64_t>& seeds,
                                 const ProgressFn& progress = {});

struct ShiftRun {
  std::uint64_t seed = 0;
  double matched = 0.0;  // EM on held-out data drawn like the training data
  double shifted = 0.0;  // EM on the shifted-mixture set
};

struct ShiftResult {
  std::vector<ShiftRun> runs;
  double matched = 0.0;
  double shifted = 0.0;
};

// Trains one span model per seed on `train` and scores both evaluation sets.
ShiftResult run_type_shift(const Dataset& train, const Dataset& matched,
                           const Dataset& shifted, SpanMode mode, const TrainConfig& config,
                           const std::vector<std::uint64_t>& seeds,
                           const ProgressFn& progress = {});

// Central-difference check of the summed span loss of `examples` (those with
// gold) under a freshly initialized model.
GradientCheckReport span_gradient_check(const Dataset& examples, SpanMode mode,
                                        const TrainConfig& config,
                                        const GradientCheckOptions& options);

}  // namespace msqa

#endif  // MSQA_EXPERIMENTS_H_
