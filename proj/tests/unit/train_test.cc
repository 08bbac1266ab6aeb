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

#include <cmath>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "msqa/checkpoint.h"
#include "msqa/data.h"
#include "msqa/errors.h"
#include "msqa/rng.h"
#include "msqa/tensor.h"
#include "msqa/train.h"

namespace msqa {
namespace {

TEST(Config, ParseAndRoundTrip) {
  const TrainConfig c = TrainConfig::parse(
      "preset = paper\n# comment\nepochs = 7  # trailing\nsampling_scheme = 5fold\n");
  EXPECT_EQ(c.epochs, 7u);
  EXPECT_EQ(c.batch_size, 8u);
  EXPECT_DOUBLE_EQ(c.learning_rate, 1e-5);
  EXPECT_EQ(c.sampling_scheme, "5fold");
  const TrainConfig back = TrainConfig::parse(c.to_text());
  EXPECT_EQ(back.entries(), c.entries());
}

TEST(Config, Errors) {
  TrainConfig c;
  EXPECT_THROW(c.set("epochz", "3"), ConfigError);
  EXPECT_THROW(c.set("epochs", "three"), ConfigError);
  EXPECT_THROW(c.set("epochs", "-1"), ConfigError);
  EXPECT_THROW(c.set("learning_rate", "1e-3x"), ConfigError);
  EXPECT_THROW(TrainConfig::parse("epochs = 3\npreset = toy\n"), ConfigError);
  EXPECT_THROW(TrainConfig::parse("no equals sign\n"), ConfigError);
  EXPECT_THROW(TrainConfig::preset("huge"), ConfigError);
  c.learning_rate = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = TrainConfig{};
  c.encoder_width = 30;
  c.heads = 4;
  EXPECT_THROW(c.validate(), ConfigError);
}

TrainConfig small() {
  TrainConfig c;
  c.encoder_width = 16;
  c.encoder_depth = 1;
  c.heads = 2;
  c.batch_size = 10;
  c.epochs = 2;
  return c;
}

// Filler words plus one color; the answer is the color.
Dataset separable(std::size_t n, std::uint64_t seed) {
  const std::vector<std::string> fill = {"stone", "river", "cloud", "field", "wind",
                                         "grass", "sand", "hill", "lake", "tree"};
  const std::vector<std::string> colors = {"red", "green", "blue"};
  Rng rng(seed);
  Dataset d;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t at = rng.below(6);
    const std::string color = colors[rng.below(colors.size())];
    std::string s;
    for (std::size_t k = 0; k < 6; ++k) {
      if (!s.empty()) s += ' ';
      s += k == at ? color : fill[rng.below(fill.size())];
    }
    Example e;
    e.id = "sep" + std::to_string(i);
    e.background = "colors are bright .";
    e.situation = s + " .";
    e.question = "which color is there ?";
    e.answer = color;
    d.push_back(e);
  }
  localize_all(d);
  return d;
}

TEST(Train, InitialLossIsNearUniform) {
  const Dataset d = separable(20, 3);
  const Vocabulary vocab = build_vocabulary(d);
  for (SpanMode mode : {SpanMode::kBaseline, SpanMode::kMultiStep}) {
    const TrainConfig c = small();
    std::vector<PreparedExample> ex = prepare(d, vocab, c);
    SpanModel model(mode, c, vocab.size());
    double loss = 0, expected = 0;
    for (PreparedExample& e : ex) {
      NoGradGuard g;
      loss += model.loss(e).item();
      std::size_t allowed = 0;
      for (bool b : e.allowed) allowed += b;
      expected += 2 * std::log(static_cast<double>(allowed));
    }
    EXPECT_NEAR(loss / expected, 1.0, 0.2) << mode_name(mode);
  }
}

TEST(Train, SameSeedSameParameters) {
  const Dataset d = separable(30, 4);
  const Vocabulary vocab = build_vocabulary(d);
  auto run = [&](std::uint64_t seed) {
    TrainConfig c = small();
    c.seed = seed;
    std::vector<PreparedExample> ex = prepare(d, vocab, c);
    SpanModel model(SpanMode::kMultiStep, c, vocab.size());
    train_span_model(model, ex, {});
    return encode_checkpoint(model.checkpoint());
  };
  EXPECT_EQ(run(11), run(11));
  EXPECT_NE(run(11), run(12));
}

TEST(Train, CheckpointRestoresPredictions) {
  const Dataset d = separable(20, 6);
  const Vocabulary vocab = build_vocabulary(d);
  const TrainConfig c = small();
  std::vector<PreparedExample> ex = prepare(d, vocab, c);
  SpanModel model(SpanMode::kMultiStep, c, vocab.size());
  train_span_model(model, ex, {});
  const SpanModel back =
      SpanModel::from_checkpoint(decode_checkpoint(encode_checkpoint(model.checkpoint())));
  const PredictionSet a = predict_spans(model, ex);
  const PredictionSet b = predict_spans(back, ex);
  ASSERT_EQ(a.size(), b.size());
  for (const auto& [id, p] : a) {
    EXPECT_EQ(p.answer, b.at(id).answer);
    EXPECT_EQ(p.score, b.at(id).score);
  }
}

TEST(Train, LearnsSeparableData) {
  const Dataset d = separable(50, 7);
  const Vocabulary vocab = build_vocabulary(d);
  for (SpanMode mode : {SpanMode::kBaseline, SpanMode::kMultiStep}) {
    TrainConfig c = TrainConfig::toy();
    c.epochs = 50;
    c.batch_size = 10;
    std::vector<PreparedExample> ex = prepare(d, vocab, c);
    SpanModel model(mode, c, vocab.size());
    const TrainReport r = train_span_model(model, ex, {});
    EXPECT_EQ(r.trained_examples, 50u);
    EXPECT_GE(span_em(model, ex), 95.0) << mode_name(mode);
  }
}

TEST(Train, SkipsExamplesWithoutGold) {
  Dataset d = separable(10, 8);
  d[0].gold.reset();
  const Vocabulary vocab = build_vocabulary(d);
  const TrainConfig c = small();
  std::vector<PreparedExample> ex = prepare(d, vocab, c);
  SpanModel model(SpanMode::kBaseline, c, vocab.size());
  const TrainReport r = train_span_model(model, ex, {});
  EXPECT_EQ(r.trained_examples, 9u);
  EXPECT_EQ(r.skipped_examples, 1u);
  EXPECT_THROW(model.loss(ex[0]), InputError);
}

TEST(Rerank, ChooseBreaksTiesEarly) {
  const std::vector<double> s = {0.5, 2.0, 2.0};
  const RerankDecision d = choose(s);
  EXPECT_EQ(d.chosen, 1u);
  double sum = 0;
  for (double p : d.probs) sum += p;
  EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(Rerank, SameSeedRerankersAgree) {
  const Dataset d = separable(24, 9);
  const Vocabulary vocab = build_vocabulary(d);
  TrainConfig c = small();
  std::vector<PreparedExample> ex = prepare(d, vocab, c);
  std::vector<RerankItem> items;
  for (PreparedExample& e : ex) {
    RerankItem it;
    it.example = &e;
    it.candidates = {{e.gold->first, e.gold->second, e.example->answer, 1.0},
                     {0, 0, "x", 0.5}};
    it.label = gold_candidate(*e.example, it.candidates);
    items.push_back(it);
  }
  RerankerModel a(c, vocab.size()), b(c, vocab.size());
  train_reranker(a, items, {});
  train_reranker(b, items, {});
  for (RerankItem& it : items) {
    const RerankDecision x = rerank(a, *it.example, it.candidates);
    const RerankDecision y = rerank(b, *it.example, it.candidates);
    EXPECT_EQ(x.chosen, y.chosen);
    EXPECT_EQ(x.probs, y.probs);
  }
}

}  // namespace
}  // namespace msqa
