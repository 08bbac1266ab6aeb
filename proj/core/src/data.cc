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

#include "msqa/data.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "msqa/errors.h"
#include "msqa/rng.h"

namespace msqa {
namespace {

using nlohmann::json;

const json& member(const json& node, const char* key, const std::string& path) {
  if (!node.is_object()) throw ParseError(path + ": expected an object");
  auto it = node.find(key);
  if (it == node.end()) throw ParseError(path + ": missing \"" + key + "\"");
  return *it;
}

const json& array_member(const json& node, const char* key, const std::string& path) {
  const json& value = member(node, key, path);
  if (!value.is_array()) throw ParseError(path + "." + key + ": expected an array");
  return value;
}

std::string string_member(const json& node, const char* key, const std::string& path) {
  const json& value = member(node, key, path);
  if (!value.is_string()) throw ParseError(path + "." + key + ": expected a string");
  return value.get<std::string>();
}

std::string indexed(const std::string& path, const char* key, std::size_t i) {
  return path + "." + key + "[" + std::to_string(i) + "]";
}

// Token-aligned occurrences of `needle` in `hay`, by start index.
std::vector<std::size_t> occurrences(const std::vector<Token>& hay,
                                     const std::vector<Token>& needle) {
  std::vector<std::size_t> out;
  if (needle.empty() || needle.size() > hay.size()) return out;
  for (std::size_t i = 0; i + needle.size() <= hay.size(); ++i) {
    bool match = true;
    for (std::size_t k = 0; k < needle.size() && match; ++k) {
      match = hay[i + k].text == needle[k].text;
    }
    if (match) out.push_back(i);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic templates. Everything is lowercase ASCII from a closed list.

constexpr const char* kGroupNouns[] = {"group", "village", "team",   "city",  "farm",
                                       "colony", "region", "island", "plant", "tank"};
constexpr const char* kLetters[] = {"b", "c", "d", "e", "f", "g", "h", "j", "k", "m",
                                    "n", "p", "q", "r", "s", "t", "v", "w", "x", "z"};
constexpr const char* kTraits[] = {
    "wings",  "fur",    "scales", "roots",  "leaves",   "spines", "feathers", "shells",
    "gills",  "horns",  "claws",  "seeds",  "flowers",  "pollen", "moss",     "algae",
    "salt",   "sand",   "clay",   "iron",   "copper",   "zinc",   "sulfur",   "chalk",
    "wax",    "bark",   "thorns", "fins",   "whiskers", "tusks",  "antlers",  "hooves",
    "lichen", "fungus", "coral",  "silt",   "pebbles",  "ash",    "resin",    "nectar"};
constexpr const char* kQuantities[] = {
    "heat",   "water",   "energy", "light",  "pressure", "acid",   "oil",    "dust",
    "smoke",  "noise",   "growth", "speed",  "strength", "weight", "yield",  "risk",
    "erosion", "stress", "damage", "income", "warmth",   "rain",   "sugar",  "protein",
    "fat",    "oxygen",  "carbon", "nitrogen", "friction", "drag",  "mass",   "volume"};

std::vector<std::string> entity_labels(const SynthConfig& config, Rng& rng) {
  if (!config.entity_names.empty()) return config.entity_names;
  const std::string noun = kGroupNouns[rng.below(std::size(kGroupNouns))];
  std::vector<std::string> out;
  out.reserve(config.entity_pool);
  for (std::size_t k = 0; k < config.entity_pool; ++k) out.push_back(noun + " " + kLetters[k]);
  return out;
}

// Draws `n` distinct indices below `pool`.
std::vector<std::size_t> distinct(Rng& rng, std::size_t pool, std::size_t n) {
  std::vector<std::size_t> all(pool);
  std::iota(all.begin(), all.end(), 0);
  rng.shuffle(std::span<std::size_t>(all));
  all.resize(n);
  return all;
}

const char* direction(int sign) { return sign > 0 ? "more" : "less"; }

std::vector<QuestionType> type_quota(const TypeMixture& mixture, std::size_t count, Rng& rng) {
  // Largest-remainder apportionment, then a seeded shuffle.
  std::array<std::size_t, 5> take{};
  std::array<double, 5> remainder{};
  std::size_t assigned = 0;
  for (std::size_t t = 0; t < 5; ++t) {
    const double exact = mixture.proportions[t] * static_cast<double>(count);
    take[t] = static_cast<std::size_t>(std::floor(exact));
    remainder[t] = exact - static_cast<double>(take[t]);
    assigned += take[t];
  }
  std::array<std::size_t, 5> order{0, 1, 2, 3, 4};
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; assigned < count; ++k, ++assigned) ++take[order[k % 5]];
  std::vector<QuestionType> out;
  out.reserve(count);
  for (std::size_t t = 0; t < 5; ++t) {
    out.insert(out.end(), take[t], static_cast<QuestionType>(t));
  }
  rng.shuffle(std::span<QuestionType>(out));
  return out;
}

Example make_example(const SynthConfig& config, QuestionType type, std::size_t index,
                     Rng& rng) {
  const std::vector<std::string> labels = entity_labels(config, rng);
  const std::vector<std::size_t> pair = distinct(rng, labels.size(), 2);
  const std::string& holder = labels[pair[0]];
  const std::string& other = labels[pair[1]];

  const std::size_t rules = config.distractor_rules;
  const std::size_t facts = config.distractor_facts;
  // Traits: [0] the real one, then one per distractor rule, then distractor facts.
  const std::vector<std::size_t> traits = distinct(rng, std::size(kTraits), 1 + rules + facts);
  // Quantities: [0] outcome, [1] mediator (hop 2), then fresh ones for distractors.
  const std::vector<std::size_t> quantities = distinct(rng, std::size(kQuantities), 2 + rules);
  const std::string trait = kTraits[traits[0]];
  const std::string outcome = kQuantities[quantities[0]];
  const std::string mediator = kQuantities[quantities[1]];

  PolarityChain chain;
  std::vector<std::string> background;
  const int s1 = rng.coin() ? 1 : -1;
  chain.signs.push_back(s1);
  if (config.hops == 1) {
    background.push_back("things that have " + trait + " tend to have " + direction(s1) + " " +
                         outcome + " .");
  } else {
    const int s2 = rng.coin() ? 1 : -1;
    chain.signs.push_back(s2);
    background.push_back("things that have " + trait + " tend to have " + direction(s1) + " " +
                         mediator + " .");
    background.push_back("things with more " + mediator + " have " + direction(s2) + " " +
                         outcome + " .");
  }
  // Distractor rules share one attribute with the real chain so that only the
  // matching link leads anywhere.
  for (std::size_t k = 0; k < rules; ++k) {
    const std::string dtrait = kTraits[traits[1 + k]];
    const std::string fresh = kQuantities[quantities[2 + k]];
    const char* dir = direction(rng.coin() ? 1 : -1);
    if (config.hops == 2 && rng.coin()) {
      background.push_back("things with more " + fresh + " have " + dir + " " + outcome + " .");
    } else if (config.hops == 2) {
      background.push_back("things that have " + dtrait + " tend to have " + dir + " " +
                           mediator + " .");
    } else {
      background.push_back("things that have " + dtrait + " tend to have " + dir + " " +
                           outcome + " .");
    }
  }
  rng.shuffle(std::span<std::string>(background));

  std::vector<std::string> situation;
  if (rng.coin()) {
    situation.push_back(holder + " has " + trait + " .");
    situation.push_back(other + " does not have " + trait + " .");
  } else {
    situation.push_back(other + " does not have " + trait + " .");
    situation.push_back(holder + " has " + trait + " .");
  }
  for (std::size_t k = 0; k < facts; ++k) {
    const std::string& who = rng.coin() ? holder : other;
    situation.push_back(who + " has " + std::string(kTraits[traits[1 + rules + k]]) + " .");
  }
  rng.shuffle(std::span<std::string>(situation));

  // p is the entity the question asks about, q the comparison.
  const bool ask_holder = rng.coin();
  const std::string& p = ask_holder ? holder : other;
  const std::string& q = ask_holder ? other : holder;
  const bool p_more = (chain.net() > 0) == ask_holder;

  Example ex;
  ex.type = type;
  switch (type) {
    case QuestionType::kNP: {
      // "which group has ..." when both labels share a head word.
      const std::string head = holder.substr(0, holder.find(' '));
      const bool shared = holder.find(' ') != std::string::npos &&
                          other.compare(0, head.size() + 1, head + " ") == 0;
      ex.question = "which " + (shared ? head : std::string("one")) + " has more " +
                    outcome + " ?";
      ex.answer = chain.net() > 0 ? holder : other;
      break;
    }
    case QuestionType::kADJP:
      ex.question = "would " + p + " have higher or lower " + outcome + " than " + q + " ?";
      ex.answer = p_more ? "higher" : "lower";
      break;
    case QuestionType::kVP:
      ex.question =
          "would " + outcome + " increase or decrease for " + p + " compared to " + q + " ?";
      ex.answer = p_more ? "increase" : "decrease";
      break;
    case QuestionType::kADVP:
      ex.question = "would " + outcome + " build up more quickly or more slowly in " + p +
                    " than in " + q + " ?";
      ex.answer = p_more ? "more quickly" : "more slowly";
      break;
    case QuestionType::kOthers:
      ex.question = "does " + p + " have more " + outcome + " than " + q + " , yes or no ?";
      ex.answer = p_more ? "yes" : "no";
      break;
  }

  auto join = [](const std::vector<std::string>& parts) {
    std::string out;
    for (const std::string& s : parts) out += (out.empty() ? "" : " ") + s;
    return out;
  };
  ex.background = join(background);
  ex.situation = join(situation);
  ex.id = config.id_prefix + "-" + std::to_string(config.seed) + "-" + std::to_string(index);
  ex.gold = locate_answer(ex);
  return ex;
}

}  // namespace

const char* type_name(QuestionType type) {
  switch (type) {
    case QuestionType::kNP: return "NP";
    case QuestionType::kVP: return "VP";
    case QuestionType::kADJP: return "ADJP";
    case QuestionType::kADVP: return "ADVP";
    case QuestionType::kOthers: return "Others";
  }
  return "?";
}

std::optional<QuestionType> parse_type(std::string_view name) {
  for (QuestionType t : kAllQuestionTypes) {
    if (name == type_name(t)) return t;
  }
  return std::nullopt;
}

Dataset parse_ropes(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("$: ") + e.what());
  }
  Dataset out;
  const json& data = array_member(root, "data", "$");
  for (std::size_t a = 0; a < data.size(); ++a) {
    const std::string apath = indexed("$", "data", a);
    const std::string background = string_member(data[a], "background", apath);
    const json& paragraphs = array_member(data[a], "paragraphs", apath);
    for (std::size_t p = 0; p < paragraphs.size(); ++p) {
      const std::string ppath = indexed(apath, "paragraphs", p);
      const std::string situation = string_member(paragraphs[p], "situation", ppath);
      const json& qas = array_member(paragraphs[p], "qas", ppath);
      for (std::size_t q = 0; q < qas.size(); ++q) {
        const std::string qpath = indexed(ppath, "qas", q);
        Example ex;
        ex.background = background;
        ex.situation = situation;
        ex.id = string_member(qas[q], "id", qpath);
        ex.question = string_member(qas[q], "question", qpath);
        const json& answers = array_member(qas[q], "answers", qpath);
        if (answers.empty()) throw ParseError(qpath + ".answers: empty");
        ex.answer = string_member(answers[0], "text", indexed(qpath, "answers", 0));
        if (ex.answer.empty()) throw ParseError(indexed(qpath, "answers", 0) + ".text: empty");
        if (qas[q].contains("type")) {
          const std::string label = string_member(qas[q], "type", qpath);
          ex.type = parse_type(label);
          if (!ex.type) throw ParseError(qpath + ".type: unknown label \"" + label + "\"");
        }
        out.push_back(std::move(ex));
      }
    }
  }
  return out;
}

Dataset load_ropes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_ropes(buffer.str());
}

std::string to_ropes_json(const Dataset& dataset) {
  // One article per example keeps the round trip exact.
  json data = json::array();
  for (const Example& ex : dataset) {
    json qa = {{"id", ex.id},
               {"question", ex.question},
               {"answers", json::array({json{{"text", ex.answer}}})}};
    if (ex.type) qa["type"] = type_name(*ex.type);
    json paragraph = {{"situation", ex.situation}, {"qas", json::array({qa})}};
    data.push_back({{"background", ex.background}, {"paragraphs", json::array({paragraph})}});
  }
  json root = {{"version", "1.0"}, {"data", data}};
  return root.dump(1) + "\n";
}

void write_ropes(const std::string& path, const Dataset& dataset) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out << to_ropes_json(dataset);
}

GoldSpan locate_answer(const Example& example) {
  const std::vector<Token> answer = tokenize(example.answer);
  if (answer.empty()) throw LocalizationError(example.id + ": answer has no tokens");
  std::optional<GoldSpan> found;
  for (Region region : {Region::kSituation, Region::kQuestion}) {
    const std::string& text =
        region == Region::kSituation ? example.situation : example.question;
    const std::vector<std::size_t> hits = occurrences(tokenize(text), answer);
    if (!hits.empty()) found = GoldSpan{region, hits.back(), hits.back() + answer.size() - 1};
  }
  if (!found) {
    throw LocalizationError(example.id + ": answer \"" + example.answer +
                            "\" has no token-aligned occurrence in situation or question");
  }
  return *found;
}

LocalizationReport localize_all(Dataset& dataset) {
  LocalizationReport report;
  for (Example& ex : dataset) {
    try {
      ex.gold = locate_answer(ex);
      ++report.located;
    } catch (const LocalizationError&) {
      ex.gold.reset();
      report.failed_ids.push_back(ex.id);
    }
  }
  return report;
}

std::pair<std::size_t, std::size_t> global_span(const EncodedInput& input,
                                                const GoldSpan& gold) {
  const std::vector<std::size_t> idx = input.region_indices(gold.region);
  if (gold.start > gold.end || gold.end >= idx.size()) {
    throw InputError(std::string("gold span outside the ") + region_name(gold.region) +
                     " region");
  }
  return {idx[gold.start], idx[gold.end]};
}

TypeMixture TypeMixture::uniform() {
  TypeMixture m;
  m.proportions.fill(0.2);
  return m;
}

TypeMixture TypeMixture::only(QuestionType type) {
  TypeMixture m;
  m.proportions.fill(0.0);
  m.proportions[static_cast<std::size_t>(type)] = 1.0;
  return m;
}

int PolarityChain::net() const {
  int net = 1;
  for (int s : signs) net *= s;
  return net;
}

void SynthConfig::validate() const {
  if (count == 0) throw ConfigError("synthetic count must be positive");
  if (hops != 1 && hops != 2) throw ConfigError("hop depth must be 1 or 2");
  double total = 0.0;
  for (double p : mixture.proportions) {
    if (!(p >= 0.0)) throw ConfigError("type proportions must be non-negative");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw ConfigError("type proportions sum to " + std::to_string(total) + ", not 1");
  }
  if (entity_names.empty()) {
    if (entity_pool < 2) throw ConfigError("entity pool needs at least 2 labels");
    if (entity_pool > std::size(kLetters)) {
      throw ConfigError("entity pool is limited to " + std::to_string(std::size(kLetters)));
    }
  } else {
    if (entity_names.size() < 2) throw ConfigError("entity names need at least 2 entries");
    for (const std::string& name : entity_names) {
      if (tokenize(name).empty()) throw ConfigError("entity name without tokens");
    }
  }
  if (1 + distractor_rules + distractor_facts > std::size(kTraits) ||
      2 + distractor_rules > std::size(kQuantities)) {
    throw ConfigError("too many distractors for the template vocabulary");
  }
}

Dataset generate_synthetic(const SynthConfig& config) {
  config.validate();
  Rng rng(Rng::mix(config.seed, 0x5e7));
  const std::vector<QuestionType> types = type_quota(config.mixture, config.count, rng);
  Dataset out;
  out.reserve(config.count);
  for (std::size_t i = 0; i < config.count; ++i) {
    out.push_back(make_example(config, types[i], i, rng));
  }
  return out;
}

std::pair<Dataset, Dataset> split_train_traindev(const Dataset& train, std::size_t dev_size,
                                                 std::uint64_t seed) {
  if (dev_size == 0 || dev_size >= train.size()) {
    throw SplitError("dev size " + std::to_string(dev_size) + " must be in [1, " +
                     std::to_string(train.size()) + ")");
  }
  // Groups in first-appearance order, then shuffled.
  std::vector<std::vector<std::size_t>> groups;
  std::unordered_map<std::string, std::size_t> group_of;
  for (std::size_t i = 0; i < train.size(); ++i) {
    auto [it, inserted] = group_of.emplace(train[i].situation, groups.size());
    if (inserted) groups.emplace_back();
    groups[it->second].push_back(i);
  }
  Rng rng(Rng::mix(seed, 0x5b17));
  rng.shuffle(std::span<std::vector<std::size_t>>(groups));

  const double target = static_cast<double>(dev_size);
  const auto ceiling = static_cast<std::size_t>(std::floor(target * 1.05));
  std::vector<bool> in_dev(train.size(), false);
  std::size_t taken = 0;
  for (const auto& group : groups) {
    if (taken >= dev_size) break;
    if (taken + group.size() > ceiling) continue;
    for (std::size_t i : group) in_dev[i] = true;
    taken += group.size();
  }
  if (std::abs(static_cast<double>(taken) - target) > 0.05 * target || taken == train.size()) {
    throw SplitError("situation grouping reaches " + std::to_string(taken) +
                     " dev examples; requested " + std::to_string(dev_size) + " (+-5%)");
  }
  std::pair<Dataset, Dataset> out;
  for (std::size_t i = 0; i < train.size(); ++i) {
    (in_dev[i] ? out.second : out.first).push_back(train[i]);
  }
  return out;
}

std::map<QuestionType, double> type_distribution(const Dataset& dataset) {
  std::map<QuestionType, double> out;
  for (QuestionType t : kAllQuestionTypes) out[t] = 0.0;
  std::size_t labeled = 0;
  for (const Example& ex : dataset) {
    if (!ex.type) continue;
    out[*ex.type] += 1.0;
    ++labeled;
  }
  if (labeled == 0) return out;
  for (auto& [type, value] : out) value = 100.0 * value / static_cast<double>(labeled);
  return out;
}

}  // namespace msqa
