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

// Differentiable operations. Every op checks its output for non-finite
// values and throws NumericError instead of letting NaN/Inf propagate.
// Shapes are exact: the only broadcasting is a rank-1 bias over rows and the
// single-row expansion in concat_features.

#ifndef MSQA_OPS_H_
#define MSQA_OPS_H_

#include <cstddef>
#include <span>
#include <vector>

#include "msqa/tensor.h"

namespace msqa {

// [m,k] x [k,n] -> [m,n].
Tensor matmul(const Tensor& a, const Tensor& b);

// y = xW + b for x of shape [D_in] or [m, D_in]; output keeps x's rank.
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);
Tensor relu(const Tensor& a);
Tensor tanh(const Tensor& a);

// Softmax over the last dimension, max-subtracted.
Tensor softmax(const Tensor& v);
Tensor log_softmax(const Tensor& v);

// -log softmax(logits restricted to allowed positions)[target], a scalar.
// logits is rank-1; allowed has one flag per logit and must admit target.
Tensor masked_cross_entropy(const Tensor& logits, std::size_t target,
                            const std::vector<bool>& allowed);
Tensor cross_entropy(const Tensor& logits, std::size_t target);

// Row-wise layer normalization with learned gain and bias.
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                  double eps = 1e-5);

// Multi-head scaled dot-product attention. Q:[m,d_k] K:[n,d_k] V:[n,d_v].
// Head h uses columns [h*d_k/H, (h+1)*d_k/H) of Q and K and the matching
// slice of V; each head is scaled by 1/sqrt(d_k/H) and outputs are
// concatenated. When mean_weights is given it receives the [m,n] attention
// distribution averaged over heads (every row sums to 1).
Tensor attention(const Tensor& q, const Tensor& k, const Tensor& v,
                 std::size_t heads, std::vector<double>* mean_weights = nullptr);

// Concatenates along the last dimension. Parts are [rows, d_i]; a part with
// a single row is repeated to the common row count.
Tensor concat_features(std::span<const Tensor> parts);

// Rows of x selected by index, in order (duplicates allowed). x is [n, D].
Tensor gather_rows(const Tensor& x, std::span<const std::size_t> indices);

Tensor reshape(const Tensor& x, Shape shape);
Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);

}  // namespace msqa

#endif  // MSQA_OPS_H_
