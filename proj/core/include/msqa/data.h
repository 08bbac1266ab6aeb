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

#ifndef MSQA_DATA_H_
#define MSQA_DATA_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "msqa/text.h"

namespace msqa {

enum class QuestionType { kNP = 0, kVP = 1, kADJP = 2, kADVP = 3, kOthers = 4 };

inline constexpr std::array<QuestionType, 5> kAllQuestionTypes = {
    QuestionType::kNP, QuestionType::kVP, QuestionType::kADJP, QuestionType::kADVP,
    QuestionType::kOthers};

const char* type_name(QuestionType type);
std::optional<QuestionType> parse_type(std::string_view name);

// Answer location: token indices are local to the region's tokenization.
struct GoldSpan {
  Region region = Region::kSituation;
  std::size_t start = 0;
  std::size_t end = 0;
};

struct Example {
  std::string id;
  std::string background;
  std::string situation;
  std::string question;
  std::string answer;
  std::optional<GoldSpan> gold;
  std::optional<QuestionType> type;
};

using Dataset = std::vector<Example>;

// ROPES JSON: {"data": [{"background", "paragraphs": [{"situation",
// "qas": [{"id", "question", "answers": [{"text"}]}]}]}]}. An optional
// per-question "type" field carries a question-type label.
Dataset load_ropes(const std::string& path);
Dataset parse_ropes(std::string_view json_text);
std::string to_ropes_json(const Dataset& dataset);
void write_ropes(const std::string& path, const Dataset& dataset);

// Last token-aligned occurrence of the answer, scanning the situation and
// then the question (their order in the assembled sequence).
GoldSpan locate_answer(const Example& example);

struct LocalizationReport {
  std::size_t located = 0;
  std::vector<std::string> failed_ids;
};
// Sets Example::gold where possible; failures stay unset and are reported.
LocalizationReport localize_all(Dataset& dataset);

// Global token index range of a gold span inside an assembled input.
std::pair<std::size_t, std::size_t> global_span(const EncodedInput& input,
                                                const GoldSpan& gold);

struct TypeMixture {
  std::array<double, 5> proportions = {1.0, 0.0, 0.0, 0.0, 0.0};  // by QuestionType

  static TypeMixture uniform();
  static TypeMixture only(QuestionType type);
  double at(QuestionType type) const { return proportions[static_cast<std::size_t>(type)]; }
};

struct SynthConfig {
  std::size_t count = 1000;
  int hops = 2;
  TypeMixture mixture;
  std::size_t distractor_rules = 1;
  std::size_t distractor_facts = 1;
  // Distinct entity labels drawn from for each example (at least 2).
  std::size_t entity_pool = 8;
  std::uint64_t seed = 1;
  std::string id_prefix = "synth";
  // Overrides the generated entity names when non-empty (at least two).
  std::vector<std::string> entity_names;

  void validate() const;
};

// One polarity-chaining fact pattern; the generator's internal state exposed
// so the answer rule can be checked independently.
struct PolarityChain {
  std::vector<int> signs;  // one +1/-1 per hop
  int net() const;
};

// Templated examples whose answers require chaining rule polarities from the
// background through the situation. Every answer is token-aligned and the
// gold span is filled in.
Dataset generate_synthetic(const SynthConfig& config);

// Seeded split grouped by situation text: no situation appears on both sides.
std::pair<Dataset, Dataset> split_train_traindev(const Dataset& train, std::size_t dev_size,
                                                 std::uint64_t seed);

// Percentage of each label (types with zero count included as 0).
std::map<QuestionType, double> type_distribution(const Dataset& dataset);

}  // namespace msqa

#endif  // MSQA_DATA_H_
