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

#include "msqa/encoder.h"

#include <cmath>

#include "msqa/errors.h"
#include "msqa/ops.h"

namespace msqa {

Encoder::Encoder(const EncoderConfig& config, ParameterStore& store, Rng& rng,
                 const std::string& prefix)
    : config_(config) {
  if (config.vocab_size < Vocabulary::kReservedCount) {
    throw ConfigError("encoder: vocabulary size " + std::to_string(config.vocab_size) +
                      " is smaller than the reserved block");
  }
  if (config.width == 0 || config.width % 2 != 0) {
    throw ConfigError("encoder: width must be positive and even");
  }
  if (config.depth > 0 && (config.heads == 0 || config.width % config.heads != 0)) {
    throw ConfigError("encoder: heads=" + std::to_string(config.heads) +
                      " must divide width=" + std::to_string(config.width));
  }
  const std::size_t d = config.width;
  token_embedding_ = store.add_uniform(prefix + "/token_embedding", {config.vocab_size, d}, 1.0, rng);
  if (config.segment_embedding) {
    segment_embedding_ = store.add_uniform(prefix + "/segment_embedding", {2, d}, 1.0, rng);
  }
  positions_.resize(config.max_length * d);
  for (std::size_t pos = 0; pos < config.max_length; ++pos) {
    for (std::size_t i = 0; i < d / 2; ++i) {
      const double freq = std::pow(10000.0, -2.0 * static_cast<double>(i) / static_cast<double>(d));
      positions_[pos * d + 2 * i] = std::sin(static_cast<double>(pos) * freq);
      positions_[pos * d + 2 * i + 1] = std::cos(static_cast<double>(pos) * freq);
    }
  }
  for (std::size_t l = 0; l < config.depth; ++l) {
    const std::string p = prefix + "/block" + std::to_string(l);
    Block b;
    b.ln1_gain = store.add_filled(p + "/ln1/gain", {d}, 1.0);
    b.ln1_bias = store.add_zeros(p + "/ln1/bias", {d});
    b.wq = store.add_weight(p + "/attn/wq", d, d, rng);
    b.bq = store.add_zeros(p + "/attn/bq", {d});
    b.wk = store.add_weight(p + "/attn/wk", d, d, rng);
    b.bk = store.add_zeros(p + "/attn/bk", {d});
    b.wv = store.add_weight(p + "/attn/wv", d, d, rng);
    b.bv = store.add_zeros(p + "/attn/bv", {d});
    b.wo = store.add_weight(p + "/attn/wo", d, d, rng);
    b.bo = store.add_zeros(p + "/attn/bo", {d});
    b.ln2_gain = store.add_filled(p + "/ln2/gain", {d}, 1.0);
    b.ln2_bias = store.add_zeros(p + "/ln2/bias", {d});
    b.w1 = store.add_weight(p + "/ff/w1", d, config.ff_width, rng);
    b.b1 = store.add_zeros(p + "/ff/b1", {config.ff_width});
    b.w2 = store.add_weight(p + "/ff/w2", config.ff_width, d, rng);
    b.b2 = store.add_zeros(p + "/ff/b2", {d});
    blocks_.push_back(std::move(b));
  }
  if (config.depth > 0) {
    final_gain_ = store.add_filled(prefix + "/final_ln/gain", {d}, 1.0);
    final_bias_ = store.add_zeros(prefix + "/final_ln/bias", {d});
  }
}

Tensor Encoder::encode(const EncodedInput& input) const {
  const std::size_t n = input.ids.size();
  const std::size_t d = config_.width;
  if (n == 0) throw InputError("encode: empty input");
  if (n > config_.max_length) {
    throw InputError("encode: " + std::to_string(n) + " tokens exceed max length " +
                     std::to_string(config_.max_length));
  }
  std::vector<std::size_t> ids(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto id = input.ids[k];
    if (id < 0 || static_cast<std::size_t>(id) >= config_.vocab_size) {
      throw StateError("encode: token id " + std::to_string(id) +
                       " outside vocabulary of size " + std::to_string(config_.vocab_size));
    }
    ids[k] = static_cast<std::size_t>(id);
  }
  Tensor x = gather_rows(token_embedding_, ids);
  if (config_.segment_embedding) {
    std::vector<std::size_t> segs(input.segments.begin(), input.segments.end());
    x = add(x, gather_rows(segment_embedding_, segs));
  }
  std::vector<double> pos(positions_.begin(), positions_.begin() + static_cast<std::ptrdiff_t>(n * d));
  x = add(x, Tensor::matrix(n, d, std::move(pos)));
  for (const Block& b : blocks_) {
    Tensor h = layer_norm(x, b.ln1_gain, b.ln1_bias);
    Tensor a = attention(linear(h, b.wq, b.bq), linear(h, b.wk, b.bk),
                         linear(h, b.wv, b.bv), config_.heads);
    x = add(x, linear(a, b.wo, b.bo));
    h = layer_norm(x, b.ln2_gain, b.ln2_bias);
    x = add(x, linear(relu(linear(h, b.w1, b.b1)), b.w2, b.b2));
  }
  if (!blocks_.empty()) x = layer_norm(x, final_gain_, final_bias_);
  return x;
}

}  // namespace msqa
