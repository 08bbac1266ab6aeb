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

#include "msqa/decode.h"

#include <algorithm>
#include <cmath>

#include "msqa/errors.h"
#include "msqa/ops.h"

namespace msqa {
namespace {

struct Feasible {
  std::size_t start;
  std::size_t end;
  double score;
};

void check_scores(const SpanScores& scores) {
  if (!scores.start.defined() || !scores.end.defined()) {
    throw InputError("span scores are not populated");
  }
  const std::size_t n = scores.start.numel();
  if (scores.end.numel() != n || scores.allowed.size() != n) {
    throw DimensionError("span scores: start/end/allowed lengths " + std::to_string(n) +
                         "/" + std::to_string(scores.end.numel()) + "/" +
                         std::to_string(scores.allowed.size()) + " differ");
  }
}

// Calls visit(i, j, score) for every feasible pair in (i, j) order.
template <typename Visit>
void for_each_feasible(const SpanScores& scores, std::size_t max_len, Visit visit) {
  check_scores(scores);
  const std::vector<double> ps = span_probabilities(scores.start);
  const std::vector<double> pe = span_probabilities(scores.end);
  const std::size_t n = ps.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (!scores.allowed[i]) continue;
    for (std::size_t j = i; j < n && j - i < max_len; ++j) {
      if (!scores.allowed[j]) break;
      visit(i, j, ps[i] + pe[j]);
    }
  }
}

bool ranks_before(const Feasible& a, const Feasible& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.start != b.start) return a.start < b.start;
  return a.end < b.end;
}

}  // namespace

std::vector<Region> default_answer_regions() {
  return {Region::kSituation, Region::kQuestion};
}

std::vector<Region> all_answer_regions() {
  return {Region::kBackground, Region::kSituation, Region::kQuestion};
}

std::vector<bool> answer_mask(const EncodedInput& input,
                              const std::vector<Region>& regions) {
  std::vector<bool> mask(input.size(), false);
  for (std::size_t k = 0; k < input.size(); ++k) {
    mask[k] = std::find(regions.begin(), regions.end(), input.regions[k]) != regions.end() &&
              !is_marker(input.regions[k]);
  }
  return mask;
}

QaScoreHead::QaScoreHead(std::size_t width, ParameterStore& store, Rng& rng,
                         const std::string& prefix) {
  weight_ = store.add_weight(prefix + "/weight", width, 2, rng);
  bias_ = store.add_zeros(prefix + "/bias", {2});
}

SpanScores QaScoreHead::score(const EncodedInput& input, std::vector<bool> allowed) const {
  if (!input.vectors.defined()) throw StateError("qa_score: input is not encoded");
  return split_span_logits(linear(input.vectors, weight_, bias_), std::move(allowed));
}

SpanScores split_span_logits(const Tensor& logits, std::vector<bool> allowed) {
  if (logits.rank() != 2 || logits.dim(1) != 2) {
    throw DimensionError("span logits must be [n, 2], got " + shape_string(logits.shape()));
  }
  const std::size_t n = logits.dim(0);
  std::vector<std::size_t> col0(n), col1(n);
  SpanScores out;
  const Tensor flat = reshape(logits, {2 * n, 1});
  for (std::size_t k = 0; k < n; ++k) {
    col0[k] = 2 * k;
    col1[k] = 2 * k + 1;
  }
  out.start = reshape(gather_rows(flat, col0), {n});
  out.end = reshape(gather_rows(flat, col1), {n});
  out.allowed = std::move(allowed);
  return out;
}

std::vector<double> span_probabilities(const Tensor& logits) {
  NoGradGuard guard;
  const Tensor p = softmax(reshape(logits, {logits.numel()}));
  return {p.data().begin(), p.data().end()};
}

SpanCandidate best_span(const SpanScores& scores, std::size_t max_len) {
  bool found = false;
  Feasible best{0, 0, 0.0};
  for_each_feasible(scores, max_len, [&](std::size_t i, std::size_t j, double s) {
    if (!found || s > best.score) {
      best = {i, j, s};
      found = true;
    }
  });
  if (!found) throw DecodeError("best_span: no feasible span under the mask and length cap");
  SpanCandidate out;
  out.start = best.start;
  out.end = best.end;
  out.score = best.score;
  return out;
}

std::vector<SpanCandidate> top_c(const SpanScores& scores, std::size_t c,
                                 std::size_t max_len) {
  if (c == 0) throw InputError("top_c: c must be at least 1");
  std::vector<Feasible> all;
  for_each_feasible(scores, max_len, [&](std::size_t i, std::size_t j, double s) {
    all.push_back({i, j, s});
  });
  const std::size_t keep = std::min(c, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep), all.end(),
                    ranks_before);
  std::vector<SpanCandidate> out(keep);
  for (std::size_t r = 0; r < keep; ++r) {
    out[r].start = all[r].start;
    out[r].end = all[r].end;
    out[r].score = all[r].score;
  }
  return out;
}

void attach_text(const EncodedInput& input, std::vector<SpanCandidate>& candidates) {
  for (SpanCandidate& c : candidates) c.text = detokenize(input, c.start, c.end);
}

}  // namespace msqa
