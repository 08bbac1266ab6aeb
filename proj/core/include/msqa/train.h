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

// Training configuration, the span models (baseline and multi-step), the
// candidate reranker, and their training loops.

#ifndef MSQA_TRAIN_H_
#define MSQA_TRAIN_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "msqa/checkpoint.h"
#include "msqa/data.h"
#include "msqa/decode.h"
#include "msqa/encoder.h"
#include "msqa/eval.h"
#include "msqa/nmn.h"
#include "msqa/optim.h"
#include "msqa/text.h"

namespace msqa {

enum class SpanMode { kBaseline, kMultiStep };

const char* mode_name(SpanMode mode);  // "baseline" / "multistep"
SpanMode parse_mode(std::string_view name);

struct TrainConfig {
  double learning_rate = 1e-3;
  double weight_decay = 0.01;
  std::size_t batch_size = 32;
  std::size_t epochs = 100;
  std::uint64_t seed = 1;
  std::size_t encoder_depth = 2;
  std::size_t encoder_width = 64;
  std::size_t heads = 4;
  std::size_t max_answer_len = kDefaultMaxAnswerLength;
  // "situation+question" (default) or "all".
  std::string answer_regions = "situation+question";
  std::size_t c = 3;
  std::string sampling_scheme = "3turn";
  std::size_t ensemble_size = 3;
  // Stop after this many epochs without a dev improvement; 0 never stops early.
  std::size_t patience = 0;
  std::size_t max_length = 512;
  // Train EM is logged on at most this many training examples per epoch.
  std::size_t train_eval_limit = 256;

  static TrainConfig toy();
  static TrainConfig paper();
  static TrainConfig preset(std::string_view name);

  void validate() const;
  std::vector<Region> regions() const;
  EncoderConfig encoder(std::size_t vocab_size) const;
  AssembleOptions assemble_options() const;

  // Field name to value, in declaration order.
  std::vector<std::pair<std::string, std::string>> entries() const;
  // Throws ConfigError for an unknown key or malformed value.
  void set(const std::string& key, const std::string& value);
  // key = value lines; "#" starts a comment. A "preset" key must come first.
  static TrainConfig parse(std::string_view text);
  static TrainConfig load(const std::string& path);
  std::string to_text() const;
};

// Input assembled once per example, with the answer mask and gold span.
struct PreparedExample {
  const Example* example = nullptr;
  EncodedInput input;
  std::vector<bool> allowed;
  std::optional<std::pair<std::size_t, std::size_t>> gold;  // global token indices
};

Vocabulary build_vocabulary(const Dataset& dataset);

// Examples without a gold span (or whose gold falls outside the mask) keep
// gold unset; they are evaluated but never trained on.
std::vector<PreparedExample> prepare(const Dataset& dataset, const Vocabulary& vocab,
                                     const TrainConfig& config);

class SpanModel {
 public:
  // layout applies to kMultiStep; defaults to the full layout (r = 2).
  SpanModel(SpanMode mode, const TrainConfig& config, std::size_t vocab_size,
            std::optional<LayoutConfig> layout = std::nullopt);

  // Encodes in place and scores every token.
  SpanScores scores(PreparedExample& example, InferenceTrace* trace = nullptr) const;
  Tensor loss(PreparedExample& example) const;  // requires gold

  SpanMode mode() const { return mode_; }
  const TrainConfig& config() const { return config_; }
  const LayoutConfig& layout() const { return layout_; }
  std::size_t vocab_size() const { return vocab_size_; }
  ParameterStore& store() { return store_; }
  const ParameterStore& store() const { return store_; }

  Checkpoint checkpoint() const;
  static SpanModel from_checkpoint(const Checkpoint& checkpoint);

 private:
  SpanMode mode_;
  TrainConfig config_;
  LayoutConfig layout_;
  std::size_t vocab_size_;
  ParameterStore store_;
  std::optional<Encoder> encoder_;
  std::optional<QaScoreHead> head_;
  std::optional<MultiStepInference> inference_;
};

struct EpochLog {
  std::size_t epoch = 0;  // 1-based
  double mean_loss = 0.0;
  double train_em = 0.0;
  std::optional<double> dev_em;
};

struct TrainReport {
  std::vector<EpochLog> epochs;
  std::size_t best_epoch = 0;
  std::optional<double> best_dev_em;
  std::size_t trained_examples = 0;
  std::size_t skipped_examples = 0;
};

using EpochCallback = std::function<void(const EpochLog&)>;

// Minibatch Adam on start + end cross-entropy. With a dev set the best-dev
// parameters are restored at the end; otherwise the last epoch's are kept.
TrainReport train_span_model(SpanModel& model, std::span<PreparedExample> train,
                             std::span<PreparedExample> dev, const EpochCallback& on_epoch = {});

// Best span per example plus the top-c list (c from the model's config).
PredictionSet predict_spans(const SpanModel& model, std::span<PreparedExample> examples,
                            std::size_t c = 1);
double span_em(const SpanModel& model, std::span<PreparedExample> examples);

// Candidate reranker: same encoder family, layout with r = 1 over [x_i; x_j].
class RerankerModel {
 public:
  RerankerModel(const TrainConfig& config, std::size_t vocab_size,
                std::optional<LayoutConfig> layout = std::nullopt);

  // Raw scores [c] for candidates of an example; encodes in place.
  Tensor scores(PreparedExample& example, std::span<const SpanCandidate> candidates,
                InferenceTrace* trace = nullptr) const;

  const TrainConfig& config() const { return config_; }
  const LayoutConfig& layout() const { return layout_; }
  std::size_t vocab_size() const { return vocab_size_; }
  ParameterStore& store() { return store_; }
  const ParameterStore& store() const { return store_; }

  Checkpoint checkpoint() const;
  static RerankerModel from_checkpoint(const Checkpoint& checkpoint);

 private:
  TrainConfig config_;
  LayoutConfig layout_;
  std::size_t vocab_size_;
  ParameterStore store_;
  std::optional<Encoder> encoder_;
  std::optional<MultiStepInference> inference_;
};

struct RerankDecision {
  std::size_t chosen = 0;
  std::vector<double> probs;
};

// Softmax over the candidates' scores; argmax with ties to the earlier
// (better baseline-ranked) candidate.
RerankDecision rerank(const RerankerModel& model, PreparedExample& example,
                      std::span<const SpanCandidate> candidates);
RerankDecision choose(std::span<const double> raw_scores);

struct RerankItem {
  PreparedExample* example = nullptr;
  std::vector<SpanCandidate> candidates;
  std::optional<std::size_t> label;  // first candidate matching gold
};

std::optional<std::size_t> gold_candidate(const Example& example,
                                          std::span<const SpanCandidate> candidates);

TrainReport train_reranker(RerankerModel& model, std::span<RerankItem> train,
                           std::span<RerankItem> dev, const EpochCallback& on_epoch = {});

double rerank_em(const RerankerModel& model, std::span<RerankItem> items);

}  // namespace msqa

#endif  // MSQA_TRAIN_H_
