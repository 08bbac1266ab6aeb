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

#include "msqa/nmn.h"

#include <sstream>

#include "msqa/errors.h"
#include "msqa/ops.h"

namespace msqa {
namespace {

std::size_t index_of(ModuleId id) { return static_cast<std::size_t>(id); }

const LayoutConfig& checked(const LayoutConfig& layout) {
  layout.validate();
  return layout;
}

void record(InferenceTrace* trace, ModuleId module, const std::vector<std::size_t>& indices,
            const std::vector<double>& weights) {
  if (!trace) return;
  const std::size_t n = indices.size();
  const std::size_t rows = n == 0 ? 0 : weights.size() / n;
  for (std::size_t q = 0; q < rows; ++q) {
    AttentionRecord rec;
    rec.module = module;
    rec.query = q;
    rec.token_indices = indices;
    rec.weights.assign(weights.begin() + static_cast<std::ptrdiff_t>(q * n),
                       weights.begin() + static_cast<std::ptrdiff_t>((q + 1) * n));
    trace->records.push_back(std::move(rec));
  }
}

}  // namespace

const char* module_name(ModuleId id) {
  switch (id) {
    case ModuleId::kQSelect: return "Q-SELECT";
    case ModuleId::kBSelect: return "B-SELECT";
    case ModuleId::kBChain: return "B-CHAIN";
    case ModuleId::kSChain: return "S-CHAIN";
  }
  return "?";
}

std::optional<ModuleId> parse_module(std::string_view name) {
  for (ModuleId id : kAllModules) {
    if (name == module_name(id)) return id;
  }
  return std::nullopt;
}

LayoutConfig LayoutConfig::full(std::size_t width, std::size_t r, std::size_t heads) {
  LayoutConfig layout;
  layout.width = width;
  layout.r = r;
  layout.heads = heads;
  return layout;
}

LayoutConfig LayoutConfig::bare(std::size_t width, std::size_t r, std::size_t heads) {
  LayoutConfig layout = full(width, r, heads);
  layout.requested.fill(false);
  return layout;
}

bool LayoutConfig::enabled(ModuleId id) const {
  const bool q = requested[index_of(ModuleId::kQSelect)];
  const bool b = requested[index_of(ModuleId::kBSelect)];
  switch (id) {
    case ModuleId::kQSelect: return q;
    case ModuleId::kBSelect: return b;
    case ModuleId::kBChain:
      return requested[index_of(ModuleId::kBChain)] &&
             (q || (bchain_query_includes_bselect && b));
    case ModuleId::kSChain:
      return requested[index_of(ModuleId::kSChain)] &&
             (q || b || enabled(ModuleId::kBChain));
  }
  return false;
}

std::vector<ModuleId> LayoutConfig::enabled_modules() const {
  std::vector<ModuleId> out;
  for (ModuleId id : kAllModules) {
    if (enabled(id)) out.push_back(id);
  }
  return out;
}

std::vector<ModuleId> LayoutConfig::transitively_disabled() const {
  std::vector<ModuleId> out;
  for (ModuleId id : kAllModules) {
    if (requested[index_of(id)] && !enabled(id)) out.push_back(id);
  }
  return out;
}

std::size_t LayoutConfig::bchain_query_width() const {
  std::size_t w = 0;
  if (bchain_query_includes_bselect && enabled(ModuleId::kBSelect)) w += width;
  if (enabled(ModuleId::kQSelect)) w += width;
  return w;
}

std::size_t LayoutConfig::schain_query_width(std::size_t x_width) const {
  std::size_t w = x_width;
  for (ModuleId id : {ModuleId::kBSelect, ModuleId::kBChain, ModuleId::kQSelect}) {
    if (enabled(id)) w += width;
  }
  return w;
}

std::size_t LayoutConfig::predict_width(std::size_t x_width) const {
  std::size_t w = schain_query_width(x_width);
  if (enabled(ModuleId::kSChain)) w += width;
  return w;
}

void LayoutConfig::validate() const {
  if (r != 1 && r != 2) throw ConfigError("layout: r must be 1 or 2, got " + std::to_string(r));
  if (width == 0) throw ConfigError("layout: width must be positive");
  if (heads == 0 || width % heads != 0) {
    throw ConfigError("layout: heads=" + std::to_string(heads) + " must divide width=" +
                      std::to_string(width));
  }
}

std::string LayoutConfig::describe() const {
  std::ostringstream out;
  out << "r=" << r << " width=" << width << " heads=" << heads << " modules=";
  bool first = true;
  for (ModuleId id : enabled_modules()) {
    out << (first ? "" : ",") << module_name(id);
    first = false;
  }
  if (first) out << "none";
  return out.str();
}

LayoutConfig ablate(const LayoutConfig& layout, ModuleId id) {
  if (!layout.enabled(id)) {
    throw ConfigError(std::string("ablate: ") + module_name(id) + " is not enabled");
  }
  LayoutConfig out = layout;
  out.requested[index_of(id)] = false;
  if (out.enabled_count() == 0) {
    throw ConfigError(std::string("ablate: removing ") + module_name(id) +
                      " leaves no module feeding Predict");
  }
  return out;
}

LayoutConfig restore(const LayoutConfig& layout, ModuleId id) {
  LayoutConfig out = layout;
  out.requested[index_of(id)] = true;
  return out;
}

SelectModule::SelectModule(const std::string& prefix, std::size_t width,
                           ParameterStore& store, Rng& rng) {
  weight_ = store.add_weight(prefix + "/f/weight", width, 1, rng);
  bias_ = store.add_zeros(prefix + "/f/bias", {1});
}

ModuleOutput SelectModule::forward(ModuleId id, const Tensor& rows,
                                   std::vector<double>* weights) const {
  if (rows.rank() != 2 || rows.dim(0) == 0) {
    throw EmptyRegionError(std::string(module_name(id)) + ": nothing to select from");
  }
  const std::size_t n = rows.dim(0);
  const Tensor w = reshape(linear(rows, weight_, bias_), {1, n});
  const Tensor a = softmax(w);
  if (weights) weights->assign(a.data().begin(), a.data().end());
  return {matmul(a, rows), id};
}

ChainModule::ChainModule(const std::string& prefix, std::size_t query_width,
                         std::size_t z_width, std::size_t heads, ParameterStore& store,
                         Rng& rng)
    : query_width_(query_width), heads_(heads) {
  if (query_width == 0) throw ConfigError(prefix + ": chain query has no inputs");
  weight_ = store.add_weight(prefix + "/g/weight", query_width, z_width, rng);
  bias_ = store.add_zeros(prefix + "/g/bias", {z_width});
}

Tensor ChainModule::forward_rows(const Tensor& query_inputs, const Tensor& z,
                                 std::vector<double>* weights) const {
  if (z.rank() != 2 || z.dim(0) == 0) {
    throw EmptyRegionError("chain: nothing to attend over");
  }
  const Tensor q = linear(query_inputs, weight_, bias_);
  return attention(q.rank() == 1 ? reshape(q, {1, q.numel()}) : q, z, z, heads_, weights);
}

ModuleOutput ChainModule::forward(ModuleId id, std::span<const Tensor> inputs,
                                  const Tensor& z, std::vector<double>* weights) const {
  if (inputs.empty()) throw ConfigError(std::string(module_name(id)) + ": no query inputs");
  if (z.rank() != 2 || z.dim(0) == 0) {
    throw EmptyRegionError(std::string(module_name(id)) + ": nothing to attend over");
  }
  return {forward_rows(concat_features(inputs), z, weights), id};
}

PredictModule::PredictModule(const std::string& prefix, std::size_t input_width,
                             std::size_t r, ParameterStore& store, Rng& rng)
    : input_width_(input_width) {
  weight_ = store.add_weight(prefix + "/score/weight", input_width, r, rng);
  bias_ = store.add_zeros(prefix + "/score/bias", {r});
}

Tensor PredictModule::forward(std::span<const Tensor> parts) const {
  if (parts.empty()) throw DimensionError("predict: no inputs");
  Tensor joined = concat_features(parts);
  if (joined.cols() != input_width_) {
    throw DimensionError("predict: input width " + std::to_string(joined.cols()) +
                         " does not match score() width " + std::to_string(input_width_));
  }
  if (joined.rank() == 1) joined = reshape(joined, {1, joined.numel()});
  return linear(joined, weight_, bias_);
}

MultiStepInference::MultiStepInference(const LayoutConfig& layout, std::size_t x_width,
                                       ParameterStore& store, Rng& rng,
                                       const std::string& prefix)
    : layout_(checked(layout)),
      x_width_(x_width),
      predict_(prefix + "/predict", layout.predict_width(x_width), layout.r, store, rng) {
  const std::size_t d = layout.width;
  if (layout.enabled(ModuleId::kQSelect)) q_select_.emplace(prefix + "/q_select", d, store, rng);
  if (layout.enabled(ModuleId::kBSelect)) b_select_.emplace(prefix + "/b_select", d, store, rng);
  if (layout.enabled(ModuleId::kBChain)) {
    b_chain_.emplace(prefix + "/b_chain", layout.bchain_query_width(), d, layout.heads, store, rng);
  }
  if (layout.enabled(ModuleId::kSChain)) {
    s_chain_.emplace(prefix + "/s_chain", layout.schain_query_width(x_width), d,
                     layout.heads, store, rng);
  }
}

MultiStepInference::Context MultiStepInference::context(const EncodedInput& input,
                                                        InferenceTrace* trace) const {
  if (!input.vectors.defined()) throw StateError("multi-step inference: input is not encoded");
  if (input.vectors.dim(1) != layout_.width) {
    throw DimensionError("multi-step inference: vectors have width " +
                         std::to_string(input.vectors.dim(1)) + ", layout expects " +
                         std::to_string(layout_.width));
  }
  const std::size_t d = layout_.width;
  std::vector<double> weights;
  std::vector<double>* w = trace ? &weights : nullptr;
  Context ctx;
  const RegionView background = region_view(input, Region::kBackground);
  if (q_select_) {
    const RegionView question = region_view(input, Region::kQuestion);
    if (question.empty()) throw InputError("multi-step inference: empty question region");
    ctx.q_sel = q_select_->forward(ModuleId::kQSelect, question.rows, w).vector;
    record(trace, ModuleId::kQSelect, question.indices, weights);
  }
  if (b_select_) {
    if (background.empty()) {
      ctx.b_sel = Tensor::zeros({1, d});
      if (trace) trace->absent.push_back(ModuleId::kBSelect);
    } else {
      ctx.b_sel = b_select_->forward(ModuleId::kBSelect, background.rows, w).vector;
      record(trace, ModuleId::kBSelect, background.indices, weights);
    }
  }
  if (b_chain_) {
    if (background.empty()) {
      ctx.b_chain = Tensor::zeros({1, d});
      if (trace) trace->absent.push_back(ModuleId::kBChain);
    } else {
      std::vector<Tensor> query;
      if (layout_.bchain_query_includes_bselect && ctx.b_sel) query.push_back(*ctx.b_sel);
      if (ctx.q_sel) query.push_back(*ctx.q_sel);
      ctx.b_chain = b_chain_->forward(ModuleId::kBChain, query, background.rows, w).vector;
      record(trace, ModuleId::kBChain, background.indices, weights);
    }
  }
  if (s_chain_) {
    const RegionView situation = region_view(input, Region::kSituation);
    if (situation.empty()) {
      throw InputError("multi-step inference: empty situation region, S-CHAIN has nothing to attend over");
    }
    ctx.situation = situation.rows;
  }
  return ctx;
}

Tensor MultiStepInference::score(const EncodedInput& input, const Tensor& xs,
                                 InferenceTrace* trace) const {
  if (xs.rank() != 2 || xs.dim(1) != x_width_) {
    throw DimensionError("multi-step inference: x must be [m, " + std::to_string(x_width_) +
                         "], got " + shape_string(xs.shape()));
  }
  const Context ctx = context(input, trace);
  std::vector<Tensor> parts;
  if (ctx.b_sel) parts.push_back(*ctx.b_sel);
  if (ctx.b_chain) parts.push_back(*ctx.b_chain);
  if (ctx.q_sel) parts.push_back(*ctx.q_sel);
  parts.push_back(xs);
  if (s_chain_) {
    std::vector<double> weights;
    const Tensor query = concat_features(parts);
    const Tensor chained = s_chain_->forward_rows(query, ctx.situation, trace ? &weights : nullptr);
    if (trace) {
      record(trace, ModuleId::kSChain, input.region_indices(Region::kSituation), weights);
    }
    parts.push_back(chained);
  }
  return predict_.forward(parts);
}

Tensor MultiStepInference::score_per_row(const EncodedInput& input, const Tensor& xs) const {
  const Context ctx = context(input, nullptr);
  const std::size_t m = xs.dim(0);
  std::vector<double> out;
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t row[] = {k};
    const Tensor x = gather_rows(xs, row);
    std::vector<Tensor> upstream;
    if (ctx.b_sel) upstream.push_back(*ctx.b_sel);
    if (ctx.b_chain) upstream.push_back(*ctx.b_chain);
    if (ctx.q_sel) upstream.push_back(*ctx.q_sel);
    upstream.push_back(x);
    std::vector<Tensor> parts = upstream;
    if (s_chain_) {
      parts.push_back(s_chain_->forward(ModuleId::kSChain, upstream, ctx.situation).vector);
    }
    const Tensor s = predict_.forward(parts);
    out.insert(out.end(), s.data().begin(), s.data().end());
  }
  return Tensor::matrix(m, layout_.r, std::move(out));
}

SpanLogits ms_span_scores(const EncodedInput& input, const MultiStepInference& model,
                          InferenceTrace* trace) {
  if (model.layout().r != 2) throw ConfigError("ms_span_scores: layout must have r=2");
  const SpanScores s = split_span_logits(model.score(input, input.vectors, trace), {});
  return {s.start, s.end};
}

Tensor span_representations(const EncodedInput& input,
                            std::span<const SpanCandidate> candidates) {
  std::vector<std::size_t> starts, ends;
  for (const SpanCandidate& c : candidates) {
    if (c.start > c.end || c.end >= input.size()) {
      throw InputError("candidate span (" + std::to_string(c.start) + ", " +
                       std::to_string(c.end) + ") is out of bounds for " +
                       std::to_string(input.size()) + " tokens");
    }
    starts.push_back(c.start);
    ends.push_back(c.end);
  }
  const Tensor parts[] = {gather_rows(input.vectors, starts), gather_rows(input.vectors, ends)};
  return concat_features(parts);
}

Tensor ms_rerank_scores(const EncodedInput& input, std::span<const SpanCandidate> candidates,
                        const MultiStepInference& model, InferenceTrace* trace) {
  if (model.layout().r != 1) throw ConfigError("ms_rerank_scores: layout must have r=1");
  if (candidates.empty()) throw InputError("ms_rerank_scores: no candidates");
  const Tensor scores = model.score(input, span_representations(input, candidates), trace);
  return reshape(scores, {candidates.size()});
}

}  // namespace msqa
