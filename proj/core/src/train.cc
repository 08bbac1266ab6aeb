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

#include "msqa/train.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "msqa/errors.h"
#include "msqa/ops.h"
#include "msqa/rng.h"

namespace msqa {
namespace {

constexpr std::uint64_t kInitSalt = 11;
constexpr std::uint64_t kOrderSalt = 0x7000;

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::size_t parse_count(const std::string& key, const std::string& value) {
  std::size_t out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError(key + ": expected a non-negative integer, got \"" + value + "\"");
  }
  return out;
}

double parse_real(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double out = std::stod(value, &used);
    if (used == value.size() && std::isfinite(out)) return out;
  } catch (const std::exception&) {
  }
  throw ConfigError(key + ": expected a number, got \"" + value + "\"");
}

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string layout_flags(const LayoutConfig& layout) {
  std::string out;
  for (bool b : layout.requested) out += b ? '1' : '0';
  return out;
}

void put_layout(std::map<std::string, std::string>& meta, const LayoutConfig& layout) {
  meta["layout.requested"] = layout_flags(layout);
  meta["layout.heads"] = std::to_string(layout.heads);
  meta["layout.r"] = std::to_string(layout.r);
  meta["layout.width"] = std::to_string(layout.width);
  meta["layout.bchain_query_includes_bselect"] =
      layout.bchain_query_includes_bselect ? "1" : "0";
}

LayoutConfig get_layout(const std::map<std::string, std::string>& meta) {
  auto need = [&](const std::string& key) -> const std::string& {
    auto it = meta.find(key);
    if (it == meta.end()) throw StateError("checkpoint metadata lacks " + key);
    return it->second;
  };
  LayoutConfig layout;
  const std::string& flags = need("layout.requested");
  if (flags.size() != 4) throw StateError("checkpoint layout flags malformed");
  for (std::size_t k = 0; k < 4; ++k) layout.requested[k] = flags[k] == '1';
  layout.heads = parse_count("layout.heads", need("layout.heads"));
  layout.r = parse_count("layout.r", need("layout.r"));
  layout.width = parse_count("layout.width", need("layout.width"));
  layout.bchain_query_includes_bselect = need("layout.bchain_query_includes_bselect") == "1";
  return layout;
}

TrainConfig config_from_meta(const std::map<std::string, std::string>& meta) {
  TrainConfig config;
  for (const auto& [key, value] : meta) {
    if (key.rfind("config.", 0) == 0) config.set(key.substr(7), value);
  }
  return config;
}

std::size_t meta_count(const std::map<std::string, std::string>& meta, const std::string& key) {
  auto it = meta.find(key);
  if (it == meta.end()) throw StateError("checkpoint metadata lacks " + key);
  return parse_count(key, it->second);
}

std::map<std::string, std::string> config_meta(const TrainConfig& config) {
  std::map<std::string, std::string> meta;
  for (const auto& [key, value] : config.entries()) meta["config." + key] = value;
  return meta;
}

// Every parameter gets a gradient buffer (zeros when a batch never reached it,
// e.g. an input without background), so one Adam step covers the whole store.
void fill_missing_grads(ParameterStore& store) {
  for (Parameter& p : store.parameters()) p.tensor.mutable_grad();
}

struct LoopHooks {
  std::function<Tensor(std::size_t)> loss;  // over the usable index space
  std::function<double()> train_em;
  std::function<std::optional<double>()> dev_em;
};

TrainReport run_loop(ParameterStore& store, const TrainConfig& config, std::size_t usable,
                     const LoopHooks& hooks, const EpochCallback& on_epoch) {
  TrainReport report;
  report.trained_examples = usable;
  AdamOptions adam;
  adam.learning_rate = config.learning_rate;
  adam.weight_decay = config.weight_decay;

  std::vector<std::size_t> order(usable);
  std::iota(order.begin(), order.end(), 0);
  std::optional<std::vector<std::vector<double>>> best;
  std::size_t since_best = 0;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    Rng rng(Rng::mix(config.seed, kOrderSalt + epoch));
    rng.shuffle(std::span<std::size_t>(order));
    double total = 0.0;
    for (std::size_t begin = 0; begin < usable; begin += config.batch_size) {
      const std::size_t end = std::min(usable, begin + config.batch_size);
      const double inv = 1.0 / static_cast<double>(end - begin);
      for (std::size_t k = begin; k < end; ++k) {
        const Tensor loss = hooks.loss(order[k]);
        total += loss.item();
        scale(loss, inv).backward();
      }
      fill_missing_grads(store);
      adam_step(store, adam);
    }
    EpochLog log;
    log.epoch = epoch;
    log.mean_loss = total / static_cast<double>(usable);
    log.train_em = hooks.train_em();
    log.dev_em = hooks.dev_em();
    report.epochs.push_back(log);
    if (log.dev_em) {
      if (!report.best_dev_em || *log.dev_em > *report.best_dev_em) {
        report.best_dev_em = log.dev_em;
        report.best_epoch = epoch;
        best = store.snapshot();
        since_best = 0;
      } else {
        ++since_best;
      }
    } else {
      report.best_epoch = epoch;
    }
    if (on_epoch) on_epoch(log);
    if (config.patience > 0 && since_best >= config.patience) break;
  }
  if (best) store.restore(*best);
  return report;
}

}  // namespace

const char* mode_name(SpanMode mode) {
  return mode == SpanMode::kBaseline ? "baseline" : "multistep";
}

SpanMode parse_mode(std::string_view name) {
  if (name == "baseline") return SpanMode::kBaseline;
  if (name == "multistep") return SpanMode::kMultiStep;
  throw ConfigError("unknown mode \"" + std::string(name) + "\" (baseline|multistep)");
}

TrainConfig TrainConfig::toy() { return TrainConfig{}; }

TrainConfig TrainConfig::paper() {
  TrainConfig config;
  config.learning_rate = 1e-5;
  config.weight_decay = 0.1;
  config.batch_size = 8;
  config.heads = 8;
  config.encoder_width = 1024;
  return config;
}

TrainConfig TrainConfig::preset(std::string_view name) {
  if (name == "toy") return toy();
  if (name == "paper") return paper();
  throw ConfigError("unknown preset \"" + std::string(name) + "\" (toy|paper)");
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be non-negative");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (epochs == 0) throw ConfigError("epochs must be positive");
  if (encoder_width == 0) throw ConfigError("encoder_width must be positive");
  if (heads == 0 || encoder_width % heads != 0) {
    throw ConfigError("heads (" + std::to_string(heads) + ") must divide encoder_width (" +
                      std::to_string(encoder_width) + ")");
  }
  if (max_answer_len == 0) throw ConfigError("max_answer_len must be positive");
  if (c == 0) throw ConfigError("c must be positive");
  if (ensemble_size == 0) throw ConfigError("ensemble_size must be positive");
  if (max_length < 8) throw ConfigError("max_length must be at least 8");
  regions();
}

std::vector<Region> TrainConfig::regions() const {
  if (answer_regions == "situation+question") return default_answer_regions();
  if (answer_regions == "all") return all_answer_regions();
  throw ConfigError("answer_regions must be situation+question or all, got \"" +
                    answer_regions + "\"");
}

EncoderConfig TrainConfig::encoder(std::size_t vocab_size) const {
  EncoderConfig out;
  out.vocab_size = vocab_size;
  out.width = encoder_width;
  out.depth = encoder_depth;
  out.heads = heads;
  out.ff_width = 2 * encoder_width;
  out.max_length = max_length;
  return out;
}

AssembleOptions TrainConfig::assemble_options() const {
  AssembleOptions out;
  out.max_length = max_length;
  return out;
}

std::vector<std::pair<std::string, std::string>> TrainConfig::entries() const {
  return {
      {"learning_rate", format_real(learning_rate)},
      {"weight_decay", format_real(weight_decay)},
      {"batch_size", std::to_string(batch_size)},
      {"epochs", std::to_string(epochs)},
      {"seed", std::to_string(seed)},
      {"encoder_depth", std::to_string(encoder_depth)},
      {"encoder_width", std::to_string(encoder_width)},
      {"heads", std::to_string(heads)},
      {"max_answer_len", std::to_string(max_answer_len)},
      {"answer_regions", answer_regions},
      {"c", std::to_string(c)},
      {"sampling_scheme", sampling_scheme},
      {"ensemble_size", std::to_string(ensemble_size)},
      {"patience", std::to_string(patience)},
      {"max_length", std::to_string(max_length)},
      {"train_eval_limit", std::to_string(train_eval_limit)},
  };
}

void TrainConfig::set(const std::string& key, const std::string& raw) {
  const std::string value = trim(raw);
  if (key == "learning_rate") learning_rate = parse_real(key, value);
  else if (key == "weight_decay") weight_decay = parse_real(key, value);
  else if (key == "batch_size") batch_size = parse_count(key, value);
  else if (key == "epochs") epochs = parse_count(key, value);
  else if (key == "seed") seed = parse_count(key, value);
  else if (key == "encoder_depth") encoder_depth = parse_count(key, value);
  else if (key == "encoder_width") encoder_width = parse_count(key, value);
  else if (key == "heads") heads = parse_count(key, value);
  else if (key == "max_answer_len") max_answer_len = parse_count(key, value);
  else if (key == "answer_regions") answer_regions = value;
  else if (key == "c") c = parse_count(key, value);
  else if (key == "sampling_scheme") sampling_scheme = value;
  else if (key == "ensemble_size") ensemble_size = parse_count(key, value);
  else if (key == "patience") patience = parse_count(key, value);
  else if (key == "max_length") max_length = parse_count(key, value);
  else if (key == "train_eval_limit") train_eval_limit = parse_count(key, value);
  else throw ConfigError("unknown config key \"" + key + "\"");
}

TrainConfig TrainConfig::parse(std::string_view text) {
  TrainConfig config;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  bool seen_key = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key == "preset") {
      if (seen_key) throw ConfigError("config line " + std::to_string(line_no) +
                                      ": preset must precede other keys");
      config = preset(value);
    } else {
      config.set(key, value);
    }
    seen_key = true;
  }
  config.validate();
  return config;
}

TrainConfig TrainConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

std::string TrainConfig::to_text() const {
  std::string out;
  for (const auto& [key, value] : entries()) out += key + " = " + value + "\n";
  return out;
}

Vocabulary build_vocabulary(const Dataset& dataset) {
  std::vector<std::string> texts;
  texts.reserve(3 * dataset.size());
  for (const Example& ex : dataset) {
    texts.push_back(ex.background);
    texts.push_back(ex.situation);
    texts.push_back(ex.question);
  }
  return Vocabulary::build(texts);
}

std::vector<PreparedExample> prepare(const Dataset& dataset, const Vocabulary& vocab,
                                     const TrainConfig& config) {
  const std::vector<Region> regions = config.regions();
  std::vector<PreparedExample> out;
  out.reserve(dataset.size());
  for (const Example& ex : dataset) {
    PreparedExample p;
    p.example = &ex;
    p.input = assemble(ex.background, ex.situation, ex.question, vocab,
                       config.assemble_options());
    p.allowed = answer_mask(p.input, regions);
    if (ex.gold) {
      const auto span = global_span(p.input, *ex.gold);
      if (p.allowed[span.first] && p.allowed[span.second]) p.gold = span;
    }
    out.push_back(std::move(p));
  }
  return out;
}

SpanModel::SpanModel(SpanMode mode, const TrainConfig& config, std::size_t vocab_size,
                     std::optional<LayoutConfig> layout)
    : mode_(mode), config_(config), vocab_size_(vocab_size) {
  config_.validate();
  layout_ = layout.value_or(LayoutConfig::full(config_.encoder_width, 2, config_.heads));
  if (layout_.width != config_.encoder_width || layout_.r != 2) {
    throw ConfigError("span layout must have width " + std::to_string(config_.encoder_width) +
                      " and r = 2");
  }
  Rng rng(Rng::mix(config_.seed, kInitSalt));
  encoder_.emplace(config_.encoder(vocab_size), store_, rng);
  if (mode_ == SpanMode::kBaseline) {
    head_.emplace(config_.encoder_width, store_, rng);
  } else {
    inference_.emplace(layout_, config_.encoder_width, store_, rng);
  }
}

SpanScores SpanModel::scores(PreparedExample& example, InferenceTrace* trace) const {
  encoder_->encode_in_place(example.input);
  SpanScores out;
  if (head_) {
    out = head_->score(example.input, example.allowed);
  } else {
    SpanLogits logits = ms_span_scores(example.input, *inference_, trace);
    out.start = logits.start;
    out.end = logits.end;
    out.allowed = example.allowed;
  }
  // The graph stays reachable from the scores; the cached vectors would only
  // keep it alive longer.
  example.input.vectors = Tensor();
  return out;
}

Tensor SpanModel::loss(PreparedExample& example) const {
  if (!example.gold) throw InputError("example has no usable gold span");
  const SpanScores s = scores(example);
  return add(masked_cross_entropy(s.start, example.gold->first, s.allowed),
             masked_cross_entropy(s.end, example.gold->second, s.allowed));
}

Checkpoint SpanModel::checkpoint() const {
  std::map<std::string, std::string> meta = config_meta(config_);
  meta["kind"] = "span";
  meta["mode"] = mode_name(mode_);
  meta["vocab_size"] = std::to_string(vocab_size_);
  put_layout(meta, layout_);
  return make_checkpoint(store_, config_.seed, std::move(meta));
}

SpanModel SpanModel::from_checkpoint(const Checkpoint& checkpoint) {
  auto kind = checkpoint.metadata.find("kind");
  if (kind == checkpoint.metadata.end() || kind->second != "span") {
    throw StateError("checkpoint is not a span model");
  }
  auto mode = checkpoint.metadata.find("mode");
  if (mode == checkpoint.metadata.end()) throw StateError("checkpoint metadata lacks mode");
  SpanModel model(parse_mode(mode->second), config_from_meta(checkpoint.metadata),
                  meta_count(checkpoint.metadata, "vocab_size"),
                  get_layout(checkpoint.metadata));
  load_parameters(checkpoint, model.store_);
  return model;
}

TrainReport train_span_model(SpanModel& model, std::span<PreparedExample> train,
                             std::span<PreparedExample> dev, const EpochCallback& on_epoch) {
  std::vector<PreparedExample*> usable;
  for (PreparedExample& p : train) {
    if (p.gold) usable.push_back(&p);
  }
  if (usable.empty()) throw InputError("no trainable examples (none has a usable gold span)");
  const TrainConfig& config = model.config();
  const std::size_t limit = std::min(config.train_eval_limit, usable.size());

  LoopHooks hooks;
  hooks.loss = [&](std::size_t k) { return model.loss(*usable[k]); };
  hooks.train_em = [&]() {
    if (limit == 0) return 0.0;
    std::size_t correct = 0;
    NoGradGuard guard;
    for (std::size_t k = 0; k < limit; ++k) {
      const SpanScores s = model.scores(*usable[k]);
      const SpanCandidate best = best_span(s, config.max_answer_len);
      correct += exact_match(detokenize(usable[k]->input, best.start, best.end),
                             usable[k]->example->answer);
    }
    return 100.0 * static_cast<double>(correct) / static_cast<double>(limit);
  };
  hooks.dev_em = [&]() -> std::optional<double> {
    if (dev.empty()) return std::nullopt;
    return span_em(model, dev);
  };
  TrainReport report = run_loop(model.store(), config, usable.size(), hooks, on_epoch);
  report.skipped_examples = train.size() - usable.size();
  return report;
}

PredictionSet predict_spans(const SpanModel& model, std::span<PreparedExample> examples,
                            std::size_t c) {
  NoGradGuard guard;
  PredictionSet out;
  for (PreparedExample& p : examples) {
    const SpanScores s = model.scores(p);
    std::vector<SpanCandidate> candidates = top_c(s, std::max<std::size_t>(c, 1),
                                                  model.config().max_answer_len);
    attach_text(p.input, candidates);
    Prediction pred;
    pred.answer = candidates.front().text;
    pred.score = candidates.front().score;
    pred.candidates = std::move(candidates);
    out[p.example->id] = std::move(pred);
  }
  return out;
}

double span_em(const SpanModel& model, std::span<PreparedExample> examples) {
  if (examples.empty()) return 0.0;
  NoGradGuard guard;
  std::size_t correct = 0;
  for (PreparedExample& p : examples) {
    const SpanCandidate best = best_span(model.scores(p), model.config().max_answer_len);
    correct += exact_match(detokenize(p.input, best.start, best.end), p.example->answer);
  }
  return 100.0 * static_cast<double>(correct) / static_cast<double>(examples.size());
}

RerankerModel::RerankerModel(const TrainConfig& config, std::size_t vocab_size,
                             std::optional<LayoutConfig> layout)
    : config_(config), vocab_size_(vocab_size) {
  config_.validate();
  layout_ = layout.value_or(LayoutConfig::full(config_.encoder_width, 1, config_.heads));
  if (layout_.width != config_.encoder_width || layout_.r != 1) {
    throw ConfigError("reranker layout must have width " +
                      std::to_string(config_.encoder_width) + " and r = 1");
  }
  Rng rng(Rng::mix(config_.seed, kInitSalt));
  encoder_.emplace(config_.encoder(vocab_size), store_, rng);
  inference_.emplace(layout_, 2 * config_.encoder_width, store_, rng);
}

Tensor RerankerModel::scores(PreparedExample& example, std::span<const SpanCandidate> candidates,
                             InferenceTrace* trace) const {
  if (candidates.empty()) throw InputError("rerank: empty candidate list");
  encoder_->encode_in_place(example.input);
  Tensor out = ms_rerank_scores(example.input, candidates, *inference_, trace);
  example.input.vectors = Tensor();
  return out;
}

Checkpoint RerankerModel::checkpoint() const {
  std::map<std::string, std::string> meta = config_meta(config_);
  meta["kind"] = "reranker";
  meta["vocab_size"] = std::to_string(vocab_size_);
  put_layout(meta, layout_);
  return make_checkpoint(store_, config_.seed, std::move(meta));
}

RerankerModel RerankerModel::from_checkpoint(const Checkpoint& checkpoint) {
  auto kind = checkpoint.metadata.find("kind");
  if (kind == checkpoint.metadata.end() || kind->second != "reranker") {
    throw StateError("checkpoint is not a reranker");
  }
  RerankerModel model(config_from_meta(checkpoint.metadata),
                      meta_count(checkpoint.metadata, "vocab_size"),
                      get_layout(checkpoint.metadata));
  load_parameters(checkpoint, model.store_);
  return model;
}

RerankDecision choose(std::span<const double> raw_scores) {
  if (raw_scores.empty()) throw InputError("rerank: empty candidate list");
  RerankDecision out;
  for (std::size_t k = 1; k < raw_scores.size(); ++k) {
    if (raw_scores[k] > raw_scores[out.chosen]) out.chosen = k;
  }
  const double top = raw_scores[out.chosen];
  double z = 0.0;
  out.probs.resize(raw_scores.size());
  for (std::size_t k = 0; k < raw_scores.size(); ++k) {
    out.probs[k] = std::exp(raw_scores[k] - top);
    z += out.probs[k];
  }
  for (double& p : out.probs) p /= z;
  return out;
}

RerankDecision rerank(const RerankerModel& model, PreparedExample& example,
                      std::span<const SpanCandidate> candidates) {
  NoGradGuard guard;
  const Tensor raw = model.scores(example, candidates);
  return choose(raw.data());
}

std::optional<std::size_t> gold_candidate(const Example& example,
                                          std::span<const SpanCandidate> candidates) {
  const std::string gold = normalize_answer(example.answer);
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    if (normalize_answer(candidates[k].text) == gold) return k;
  }
  return std::nullopt;
}

double rerank_em(const RerankerModel& model, std::span<RerankItem> items) {
  if (items.empty()) return 0.0;
  std::size_t correct = 0;
  for (RerankItem& item : items) {
    const RerankDecision d = rerank(model, *item.example, item.candidates);
    correct += exact_match(item.candidates[d.chosen].text, item.example->example->answer);
  }
  return 100.0 * static_cast<double>(correct) / static_cast<double>(items.size());
}

TrainReport train_reranker(RerankerModel& model, std::span<RerankItem> train,
                           std::span<RerankItem> dev, const EpochCallback& on_epoch) {
  std::vector<RerankItem*> usable;
  for (RerankItem& item : train) {
    if (item.label) usable.push_back(&item);
  }
  if (usable.empty()) throw InputError("reranker: no example has a gold-matching candidate");
  const TrainConfig& config = model.config();
  const std::size_t limit = std::min(config.train_eval_limit, usable.size());

  LoopHooks hooks;
  hooks.loss = [&](std::size_t k) {
    RerankItem& item = *usable[k];
    return cross_entropy(model.scores(*item.example, item.candidates), *item.label);
  };
  hooks.train_em = [&]() {
    std::vector<RerankItem> head;
    for (std::size_t k = 0; k < limit; ++k) head.push_back(*usable[k]);
    return rerank_em(model, head);
  };
  hooks.dev_em = [&]() -> std::optional<double> {
    if (dev.empty()) return std::nullopt;
    return rerank_em(model, dev);
  };
  TrainReport report = run_loop(model.store(), config, usable.size(), hooks, on_epoch);
  report.skipped_examples = train.size() - usable.size();
  return report;
}

}  // namespace msqa
