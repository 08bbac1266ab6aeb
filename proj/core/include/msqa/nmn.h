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

// Neural modules for chained inference and their fixed composition.
//
//   q_sel   = Select(Q)
//   b_sel   = Select(B)
//   b_chain = Chain({q_sel}, B)
//   s_chain = Chain({b_sel, b_chain, q_sel, x}, S)
//   scores  = Predict([b_sel, b_chain, q_sel, x, s_chain], r)
//
// x is a token vector (r = 2, start/end scores) or a span's end-point
// representation [x_i; x_j] (r = 1, one candidate score). Ablated modules
// drop out of every concatenation they would have fed.

#ifndef MSQA_NMN_H_
#define MSQA_NMN_H_

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "msqa/decode.h"
#include "msqa/optim.h"
#include "msqa/rng.h"
#include "msqa/tensor.h"
#include "msqa/text.h"

namespace msqa {

enum class ModuleId { kQSelect = 0, kBSelect = 1, kBChain = 2, kSChain = 3 };

inline constexpr std::array<ModuleId, 4> kAllModules = {
    ModuleId::kQSelect, ModuleId::kBSelect, ModuleId::kBChain, ModuleId::kSChain};

const char* module_name(ModuleId id);  // "Q-SELECT", ...
std::optional<ModuleId> parse_module(std::string_view name);

struct ModuleOutput {
  Tensor vector;  // [1, D]
  ModuleId source;
};

struct LayoutConfig {
  std::array<bool, 4> requested = {true, true, true, true};
  std::size_t heads = 8;
  std::size_t r = 2;
  std::size_t width = 64;
  // B-CHAIN query g([b_sel; q_sel]) instead of g(q_sel).
  bool bchain_query_includes_bselect = false;

  static LayoutConfig full(std::size_t width, std::size_t r, std::size_t heads);
  // Every module ablated: scores come from Predict([x]) alone.
  static LayoutConfig bare(std::size_t width, std::size_t r, std::size_t heads);

  // Effective state after dependency closure: B-CHAIN needs its query
  // source(s), S-CHAIN needs at least one upstream module.
  bool enabled(ModuleId id) const;
  std::vector<ModuleId> enabled_modules() const;
  // Requested but disabled by the closure.
  std::vector<ModuleId> transitively_disabled() const;
  std::size_t enabled_count() const { return enabled_modules().size(); }

  std::size_t bchain_query_width() const;
  std::size_t schain_query_width(std::size_t x_width) const;
  std::size_t predict_width(std::size_t x_width) const;

  void validate() const;
  std::string describe() const;
};

// Removes a module; throws ConfigError if it is not enabled or if nothing
// would be left feeding Predict besides x.
LayoutConfig ablate(const LayoutConfig& layout, ModuleId id);
LayoutConfig restore(const LayoutConfig& layout, ModuleId id);

struct AttentionRecord {
  ModuleId module;
  std::size_t query = 0;               // row of the query (S-CHAIN: per x)
  std::vector<std::size_t> token_indices;
  std::vector<double> weights;         // sums to 1
};

struct InferenceTrace {
  std::vector<AttentionRecord> records;
  std::vector<ModuleId> absent;  // replaced by zeros (empty background)
};

// y = sum_k softmax(f(X))_k x_k with f a learned linear map to a scalar.
class SelectModule {
 public:
  SelectModule(const std::string& prefix, std::size_t width, ParameterStore& store, Rng& rng);
  ModuleOutput forward(ModuleId id, const Tensor& rows,
                       std::vector<double>* weights = nullptr) const;
  Tensor& weight() { return weight_; }
  Tensor& bias() { return bias_; }

 private:
  Tensor weight_;  // [D, 1]
  Tensor bias_;    // [1]
};

// y = attention(g([x_0; ...; x_n]), z, z), multi-head.
class ChainModule {
 public:
  ChainModule(const std::string& prefix, std::size_t query_width, std::size_t z_width,
              std::size_t heads, ParameterStore& store, Rng& rng);
  ModuleOutput forward(ModuleId id, std::span<const Tensor> inputs, const Tensor& z,
                       std::vector<double>* weights = nullptr) const;
  // One query per row of query_inputs ([m, query_width]); returns [m, D_z].
  Tensor forward_rows(const Tensor& query_inputs, const Tensor& z,
                      std::vector<double>* weights = nullptr) const;
  Tensor& weight() { return weight_; }
  Tensor& bias() { return bias_; }
  std::size_t query_width() const { return query_width_; }

 private:
  std::size_t query_width_;
  std::size_t heads_;
  Tensor weight_;  // [query_width, D_z]
  Tensor bias_;    // [D_z]
};

// s = score([y_0; ...; y_l]) with score a learned linear map to r values.
class PredictModule {
 public:
  PredictModule(const std::string& prefix, std::size_t input_width, std::size_t r,
                ParameterStore& store, Rng& rng);
  // Parts are [1, d] or [m, d]; the result is [m, r].
  Tensor forward(std::span<const Tensor> parts) const;
  Tensor& weight() { return weight_; }
  Tensor& bias() { return bias_; }
  std::size_t input_width() const { return input_width_; }

 private:
  std::size_t input_width_;
  Tensor weight_;  // [input_width, r]
  Tensor bias_;    // [r]
};

class MultiStepInference {
 public:
  // x_width is D for token scoring and 2D for span end-point inputs.
  MultiStepInference(const LayoutConfig& layout, std::size_t x_width,
                     ParameterStore& store, Rng& rng, const std::string& prefix = "ms");

  // Scores [m, r] for the rows of xs ([m, x_width]) in one batched pass.
  Tensor score(const EncodedInput& input, const Tensor& xs,
               InferenceTrace* trace = nullptr) const;
  // Same function evaluated one row at a time through the module API.
  Tensor score_per_row(const EncodedInput& input, const Tensor& xs) const;

  const LayoutConfig& layout() const { return layout_; }
  std::size_t x_width() const { return x_width_; }
  const std::optional<SelectModule>& q_select() const { return q_select_; }
  const std::optional<SelectModule>& b_select() const { return b_select_; }
  const std::optional<ChainModule>& b_chain() const { return b_chain_; }
  const std::optional<ChainModule>& s_chain() const { return s_chain_; }
  const PredictModule& predict() const { return predict_; }

 private:
  struct Context {
    std::optional<Tensor> q_sel, b_sel, b_chain;
    Tensor situation;
  };
  Context context(const EncodedInput& input, InferenceTrace* trace) const;

  LayoutConfig layout_;
  std::size_t x_width_;
  std::optional<SelectModule> q_select_, b_select_;
  std::optional<ChainModule> b_chain_, s_chain_;
  PredictModule predict_;
};

struct SpanLogits {
  Tensor start;  // [n]
  Tensor end;    // [n]
};

// Per-token start/end scores through the layout (r = 2).
SpanLogits ms_span_scores(const EncodedInput& input, const MultiStepInference& model,
                          InferenceTrace* trace = nullptr);

// End-point representations [x_i; x_j] of each candidate, [c, 2D].
Tensor span_representations(const EncodedInput& input,
                            std::span<const SpanCandidate> candidates);

// One raw score per candidate (r = 1), shape [c].
Tensor ms_rerank_scores(const EncodedInput& input,
                        std::span<const SpanCandidate> candidates,
                        const MultiStepInference& model, InferenceTrace* trace = nullptr);

}  // namespace msqa

#endif  // MSQA_NMN_H_
