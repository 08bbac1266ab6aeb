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

#include "msqa/eval.h"

#include <cctype>
#include <sstream>

namespace msqa {

std::string normalize_answer(std::string_view text) {
  std::string cleaned;
  cleaned.reserve(text.size());
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if (u < 0x80 && std::ispunct(u)) continue;
    cleaned.push_back(u < 0x80 ? static_cast<char>(std::tolower(u)) : c);
  }
  std::istringstream words(cleaned);
  std::string word, out;
  while (words >> word) {
    if (word == "a" || word == "an" || word == "the") continue;
    if (!out.empty()) out.push_back(' ');
    out += word;
  }
  return out;
}

bool exact_match(std::string_view prediction, std::string_view gold) {
  return normalize_answer(prediction) == normalize_answer(gold);
}

EmReport evaluate_em(const PredictionSet& predictions, const Dataset& dataset) {
  EmReport report;
  report.total = dataset.size();
  for (const Example& ex : dataset) {
    auto it = predictions.find(ex.id);
    if (it == predictions.end()) {
      report.missing.push_back(ex.id);
      continue;
    }
    if (exact_match(it->second.answer, ex.answer)) ++report.correct;
  }
  if (report.total > 0) {
    report.em = 100.0 * static_cast<double>(report.correct) / static_cast<double>(report.total);
  }
  return report;
}

std::vector<TypeRow> em_by_type(const PredictionSet& predictions, const Dataset& dataset,
                                bool include_others) {
  std::vector<TypeRow> rows;
  for (QuestionType type : kAllQuestionTypes) {
    if (type == QuestionType::kOthers && !include_others) continue;
    Dataset subset;
    for (const Example& ex : dataset) {
      if (ex.type == type) subset.push_back(ex);
    }
    if (subset.empty()) continue;
    rows.push_back({type, subset.size(), evaluate_em(predictions, subset).em});
  }
  return rows;
}

}  // namespace msqa
