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

// Small trainable contextual encoder: token + segment embedding plus
// sinusoidal positions, followed by pre-norm self-attention/feed-forward
// blocks. Everything downstream only sees EncodedInput::vectors.

#ifndef MSQA_ENCODER_H_
#define MSQA_ENCODER_H_

#include <cstddef>
#include <string>
#include <vector>

#include "msqa/optim.h"
#include "msqa/rng.h"
#include "msqa/tensor.h"
#include "msqa/text.h"

namespace msqa {

struct EncoderConfig {
  std::size_t vocab_size = 0;
  std::size_t width = 64;
  std::size_t depth = 2;
  std::size_t heads = 4;
  std::size_t ff_width = 128;
  std::size_t max_length = 512;
  bool segment_embedding = true;
};

class Encoder {
 public:
  Encoder(const EncoderConfig& config, ParameterStore& store, Rng& rng,
          const std::string& prefix = "encoder");

  // [tokens, width] contextual vectors for an assembled input.
  Tensor encode(const EncodedInput& input) const;
  void encode_in_place(EncodedInput& input) const { input.vectors = encode(input); }

  const EncoderConfig& config() const { return config_; }

 private:
  struct Block {
    Tensor ln1_gain, ln1_bias;
    Tensor wq, bq, wk, bk, wv, bv, wo, bo;
    Tensor ln2_gain, ln2_bias;
    Tensor w1, b1, w2, b2;
  };

  EncoderConfig config_;
  Tensor token_embedding_;    // [vocab, width]
  Tensor segment_embedding_;  // [2, width]
  std::vector<double> positions_;  // [max_length, width], constant
  std::vector<Block> blocks_;
  Tensor final_gain_, final_bias_;
};

}  // namespace msqa

#endif  // MSQA_ENCODER_H_
