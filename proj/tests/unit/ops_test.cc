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
#include <limits>
#include <numeric>

#include <gtest/gtest.h>

#include "msqa/errors.h"
#include "msqa/ops.h"
#include "msqa/rng.h"
#include "test_util.h"

namespace msqa {
namespace {

using testing::max_grad_error;
using testing::probe;
using testing::random_tensor;

constexpr double kPrimitiveTol = 1e-5;

TEST(Ops, MatmulValues) {
  const Tensor a = Tensor::matrix(2, 3, {1, 2, 3, 4, 5, 6});
  const Tensor b = Tensor::matrix(3, 2, {7, 8, 9, 10, 11, 12});
  const Tensor c = matmul(a, b);
  EXPECT_EQ(c.shape(), (Shape{2, 2}));
  EXPECT_DOUBLE_EQ(c.at(0, 0), 58);
  EXPECT_DOUBLE_EQ(c.at(0, 1), 64);
  EXPECT_DOUBLE_EQ(c.at(1, 0), 139);
  EXPECT_DOUBLE_EQ(c.at(1, 1), 154);
}

TEST(Ops, MatmulShapeMismatchThrows) {
  EXPECT_THROW(matmul(Tensor::zeros({2, 3}), Tensor::zeros({2, 3})), DimensionError);
}

TEST(OpsGrad, Matmul) {
  Rng rng(1);
  Tensor a = random_tensor({3, 4}, rng), b = random_tensor({4, 2}, rng);
  EXPECT_LT(max_grad_error([&] { return probe(matmul(a, b)); }, {a, b}), kPrimitiveTol);
}

TEST(OpsGrad, LinearRank1AndRank2) {
  Rng rng(2);
  Tensor x1 = random_tensor({4}, rng), x2 = random_tensor({3, 4}, rng);
  Tensor w = random_tensor({4, 5}, rng), b = random_tensor({5}, rng);
  EXPECT_EQ(linear(x1, w, b).shape(), (Shape{5}));
  EXPECT_LT(max_grad_error([&] { return probe(linear(x1, w, b)); }, {x1, w, b}), kPrimitiveTol);
  EXPECT_LT(max_grad_error([&] { return probe(linear(x2, w, b)); }, {x2, w, b}), kPrimitiveTol);
}

TEST(OpsGrad, Elementwise) {
  Rng rng(3);
  Tensor a = random_tensor({2, 3}, rng), b = random_tensor({2, 3}, rng);
  EXPECT_LT(max_grad_error([&] { return probe(add(a, b)); }, {a, b}), kPrimitiveTol);
  EXPECT_LT(max_grad_error([&] { return probe(sub(a, b)); }, {a, b}), kPrimitiveTol);
  EXPECT_LT(max_grad_error([&] { return probe(mul(a, b)); }, {a, b}), kPrimitiveTol);
  EXPECT_LT(max_grad_error([&] { return probe(scale(a, -2.5)); }, {a}), kPrimitiveTol);
  EXPECT_LT(max_grad_error([&] { return probe(tanh(a)); }, {a}), kPrimitiveTol);
}

TEST(OpsGrad, ReluAwayFromKink) {
  Tensor a = Tensor::vector({-1.5, -0.2, 0.3, 2.0}, true);
  EXPECT_LT(max_grad_error([&] { return probe(relu(a)); }, {a}), kPrimitiveTol);
  const Tensor r = relu(a);
  EXPECT_EQ(r.at(0), 0.0);
  EXPECT_EQ(r.at(3), 2.0);
}

TEST(OpsGrad, SoftmaxFamily) {
  Rng rng(4);
  Tensor v = random_tensor({6}, rng, -3, 3);
  Tensor m = random_tensor({3, 5}, rng, -3, 3);
  EXPECT_LT(max_grad_error([&] { return probe(softmax(v)); }, {v}), kPrimitiveTol);
  EXPECT_LT(max_grad_error([&] { return probe(softmax(m)); }, {m}), kPrimitiveTol);
  EXPECT_LT(max_grad_error([&] { return probe(log_softmax(v)); }, {v}), kPrimitiveTol);
  EXPECT_LT(max_grad_error([&] { return cross_entropy(v, 2); }, {v}), kPrimitiveTol);
  const std::vector<bool> allowed = {false, true, true, false, true, true};
  EXPECT_LT(max_grad_error([&] { return masked_cross_entropy(v, 4, allowed); }, {v}),
            kPrimitiveTol);
}

TEST(Ops, SoftmaxRowsSumToOneAndSurviveLargeLogits) {
  const Tensor p = softmax(Tensor::vector({1000.0, 1001.0, 999.0}));
  double total = 0.0;
  for (double x : p.data()) total += x;
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_GT(p.at(1), p.at(0));
}

TEST(Ops, MaskedCrossEntropyMatchesHandValue) {
  // Masked positions must not contribute: logits {1, 9, 2} with slot 1 masked.
  const Tensor logits = Tensor::vector({1.0, 9.0, 2.0});
  const double got = masked_cross_entropy(logits, 2, {true, false, true}).item();
  const double want = -std::log(std::exp(2.0) / (std::exp(1.0) + std::exp(2.0)));
  EXPECT_NEAR(got, want, 1e-12);
}

TEST(Ops, MaskedCrossEntropyRejectsMaskedTarget) {
  EXPECT_THROW(masked_cross_entropy(Tensor::vector({1.0, 2.0}), 0, {false, true}), Error);
}

TEST(OpsGrad, LayerNorm) {
  Rng rng(5);
  Tensor x = random_tensor({3, 6}, rng, -2, 2), g = random_tensor({6}, rng, 0.5, 1.5), b = random_tensor({6}, rng);
  EXPECT_LT(max_grad_error([&] { return probe(layer_norm(x, g, b)); }, {x, g, b}),
            kPrimitiveTol);
}

TEST(Ops, LayerNormNormalizesRows) {
  const Tensor x = Tensor::matrix(1, 4, {1, 2, 3, 4});
  const Tensor y = layer_norm(x, Tensor::filled({4}, 1.0), Tensor::zeros({4}));
  double mean = 0.0, var = 0.0;
  for (double v : y.data()) mean += v / 4;
  for (double v : y.data()) var += (v - mean) * (v - mean) / 4;
  EXPECT_NEAR(mean, 0.0, 1e-12);
  EXPECT_NEAR(var, 1.0, 1e-4);
}

TEST(OpsGrad, AttentionMultiHead) {
  Rng rng(6);
  Tensor q = random_tensor({2, 4}, rng), k = random_tensor({5, 4}, rng), v = random_tensor({5, 6}, rng);
  EXPECT_LT(max_grad_error([&] { return probe(attention(q, k, v, 2)); }, {q, k, v}),
            kPrimitiveTol);
}

TEST(Ops, AttentionSingleHeadMatchesHandComputation) {
  Rng rng(7);
  const Tensor q = random_tensor({1, 2}, rng), k = random_tensor({3, 2}, rng), v = random_tensor({3, 2}, rng);
  std::vector<double> weights;
  const Tensor out = attention(q, k, v, 1, &weights);
  std::vector<double> s(3);
  for (std::size_t j = 0; j < 3; ++j) {
    s[j] = (q.at(0, 0) * k.at(j, 0) + q.at(0, 1) * k.at(j, 1)) / std::sqrt(2.0);
  }
  const double mx = std::max({s[0], s[1], s[2]});
  double z = 0.0;
  for (double& x : s) z += (x = std::exp(x - mx));
  for (std::size_t c = 0; c < 2; ++c) {
    double want = 0.0;
    for (std::size_t j = 0; j < 3; ++j) want += s[j] / z * v.at(j, c);
    EXPECT_NEAR(out.at(0, c), want, 1e-12);
  }
  ASSERT_EQ(weights.size(), 3u);
  EXPECT_NEAR(std::accumulate(weights.begin(), weights.end(), 0.0), 1.0, 1e-12);
}

TEST(Ops, AttentionRejectsIndivisibleHeads) {
  EXPECT_THROW(attention(Tensor::zeros({1, 3}), Tensor::zeros({2, 3}), Tensor::zeros({2, 3}), 2),
               Error);
}

TEST(OpsGrad, StructuralOps) {
  Rng rng(8);
  Tensor a = random_tensor({1, 3}, rng), b = random_tensor({4, 2}, rng), x = random_tensor({4, 3}, rng);
  const Tensor parts[] = {a, b};
  EXPECT_EQ(concat_features(parts).shape(), (Shape{4, 5}));
  EXPECT_LT(max_grad_error([&] { return probe(concat_features(parts)); }, {a, b}),
            kPrimitiveTol);
  const std::vector<std::size_t> idx = {3, 0, 3};
  EXPECT_LT(max_grad_error([&] { return probe(gather_rows(x, idx)); }, {x}), kPrimitiveTol);
  EXPECT_LT(max_grad_error([&] { return probe(reshape(x, {2, 6})); }, {x}), kPrimitiveTol);
  EXPECT_LT(max_grad_error([&] { return mean(x); }, {x}), kPrimitiveTol);
}

TEST(Ops, NonFiniteOutputRaisesNumericError) {
  const Tensor big = Tensor::vector({1e308, 1e308});
  EXPECT_THROW(add(big, big), NumericError);
  EXPECT_THROW(Tensor::vector({std::numeric_limits<double>::quiet_NaN()}), NumericError);
}

TEST(Tensor, NoGradGuardStopsRecording) {
  Tensor a = Tensor::vector({1.0, 2.0}, true);
  {
    NoGradGuard guard;
    EXPECT_FALSE(grad_mode_enabled());
    EXPECT_FALSE(scale(a, 2.0).requires_grad());
  }
  EXPECT_TRUE(grad_mode_enabled());
  EXPECT_TRUE(scale(a, 2.0).requires_grad());
}

TEST(Tensor, GradientsAccumulateAcrossBackwardCalls) {
  Tensor a = Tensor::vector({1.0, 2.0}, true);
  sum(scale(a, 3.0)).backward();
  sum(scale(a, 3.0)).backward();
  EXPECT_DOUBLE_EQ(a.grad()[0], 6.0);
  EXPECT_DOUBLE_EQ(a.grad()[1], 6.0);
}

}  // namespace
}  // namespace msqa
