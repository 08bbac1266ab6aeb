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

// Baseline span scorer and the span decoders.
//
// Decoding turns start/end logits into probabilities with a softmax over the
// whole sequence and maximizes s_i + e_j over feasible pairs. A pair (i, j)
// is feasible when i <= j, j - i + 1 <= max_len and every token in [i, j] is
// allowed by the mask (markers are never allowed, so a feasible span never
// leaves its passage). Ties go to the smaller i, then the smaller j.

#ifndef MSQA_DECODE_H_
#define MSQA_DECODE_H_

#include <cstddef>
#include <string>
#include <vector>

#include "msqa/optim.h"
#include "msqa/rng.h"
#include "msqa/tensor.h"
#include "msqa/text.h"

namespace msqa {

enum class CandidateSource { kBaseline, kReranker };

struct SpanCandidate {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string text;
  double score = 0.0;
  CandidateSource source = CandidateSource::kBaseline;

  bool same_span(const SpanCandidate& other) const {
    return start == other.start && end == other.end;
  }
};

struct SpanScores {
  Tensor start;               // [n] logits
  Tensor end;                 // [n] logits
  std::vector<bool> allowed;  // [n]
};

inline constexpr std::size_t kDefaultMaxAnswerLength = 8;

// Regions whose tokens may be answers. The default follows the task
// guarantee that answers come from the situation or the question.
std::vector<Region> default_answer_regions();
std::vector<Region> all_answer_regions();
std::vector<bool> answer_mask(const EncodedInput& input,
                              const std::vector<Region>& regions);

// qa_score: one linear map from a token vector to (start, end) logits.
class QaScoreHead {
 public:
  QaScoreHead(std::size_t width, ParameterStore& store, Rng& rng,
              const std::string& prefix = "qa_score");

  SpanScores score(const EncodedInput& input, std::vector<bool> allowed) const;

  const Tensor& weight() const { return weight_; }
  const Tensor& bias() const { return bias_; }

 private:
  Tensor weight_;  // [width, 2]
  Tensor bias_;    // [2]
};

// Splits [n, 2] logits into start/end vectors.
SpanScores split_span_logits(const Tensor& logits, std::vector<bool> allowed);

// Full-sequence softmax of a logit vector (values only).
std::vector<double> span_probabilities(const Tensor& logits);

SpanCandidate best_span(const SpanScores& scores, std::size_t max_len);

// Highest-scoring distinct feasible spans, best first, at most c of them.
std::vector<SpanCandidate> top_c(const SpanScores& scores, std::size_t c,
                                 std::size_t max_len);

// Fills SpanCandidate::text from the input's source passages.
void attach_text(const EncodedInput& input, std::vector<SpanCandidate>& candidates);

}  // namespace msqa

#endif  // MSQA_DECODE_H_
