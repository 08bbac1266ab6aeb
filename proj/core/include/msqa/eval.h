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

#ifndef MSQA_EVAL_H_
#define MSQA_EVAL_H_

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "msqa/data.h"
#include "msqa/decode.h"

namespace msqa {

struct Prediction {
  std::string answer;
  double score = 0.0;
  std::vector<SpanCandidate> candidates;  // optional ranked list
};

// Example id to prediction; ordered so files and reports are stable.
using PredictionSet = std::map<std::string, Prediction>;

// Lowercase, drop ASCII punctuation, drop the articles a/an/the, collapse
// whitespace.
std::string normalize_answer(std::string_view text);
bool exact_match(std::string_view prediction, std::string_view gold);

struct EmReport {
  double em = 0.0;  // percentage
  std::size_t correct = 0;
  std::size_t total = 0;
  std::vector<std::string> missing;  // ids with no prediction (counted wrong)
};

EmReport evaluate_em(const PredictionSet& predictions, const Dataset& dataset);

struct TypeRow {
  QuestionType type;
  std::size_t count = 0;
  double em = 0.0;
};

// Rows for the labels present in the dataset, in NP, VP, ADJP, ADVP order;
// Others is reported too when include_others is set.
std::vector<TypeRow> em_by_type(const PredictionSet& predictions, const Dataset& dataset,
                                bool include_others = false);

}  // namespace msqa

#endif  // MSQA_EVAL_H_
