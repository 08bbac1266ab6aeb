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

#include <string>

#include <gtest/gtest.h>

#include "msqa/eval.h"

namespace msqa {
namespace {

TEST(Normalize, CaseArticlesPunctuation) {
  EXPECT_TRUE(exact_match("Category B", "category B"));
  EXPECT_TRUE(exact_match("the Kiss", "The Kiss"));
  EXPECT_TRUE(exact_match("  Kiss. ", "the kiss"));
  EXPECT_FALSE(exact_match("Day 2", "Day 1"));
  EXPECT_FALSE(exact_match("more", "less"));
  EXPECT_EQ(normalize_answer("An  Apple,  a day!"), "apple day");
  EXPECT_EQ(normalize_answer(""), "");
}

TEST(Normalize, Idempotent) {
  for (const char* s : {"The Kiss", "Town  A.", "a an the", "x\ty\nz", "Day 1!", "THEATRE"}) {
    const std::string once = normalize_answer(s);
    EXPECT_EQ(normalize_answer(once), once) << s;
  }
}

TEST(Normalize, ArticlesOnlyAsWords) {
  // "theatre" and "banana" keep their letters.
  EXPECT_EQ(normalize_answer("the theatre"), "theatre");
  EXPECT_EQ(normalize_answer("a banana"), "banana");
}

Dataset typed(std::initializer_list<std::tuple<const char*, const char*, QuestionType>> rows) {
  Dataset d;
  for (const auto& [id, answer, type] : rows) {
    Example e;
    e.id = id;
    e.answer = answer;
    e.type = type;
    d.push_back(e);
  }
  return d;
}

TEST(Em, MissingPredictionsCountAsWrong) {
  const Dataset d = typed({{"a", "Town A", QuestionType::kNP},
                           {"b", "lower", QuestionType::kADJP},
                           {"c", "increase", QuestionType::kVP},
                           {"d", "yes", QuestionType::kOthers}});
  PredictionSet p;
  p["a"].answer = "town a";
  p["b"].answer = "higher";
  p["d"].answer = "Yes";
  const EmReport r = evaluate_em(p, d);
  EXPECT_EQ(r.correct, 2u);
  EXPECT_EQ(r.total, 4u);
  EXPECT_DOUBLE_EQ(r.em, 50.0);
  EXPECT_EQ(r.missing, (std::vector<std::string>{"c"}));
}

TEST(Em, PredictionsForUnknownIdsAreIgnored) {
  const Dataset d = typed({{"a", "x", QuestionType::kNP}});
  PredictionSet p;
  p["a"].answer = "x";
  p["zzz"].answer = "x";
  EXPECT_DOUBLE_EQ(evaluate_em(p, d).em, 100.0);
}

TEST(Em, ByTypeMatchesRecount) {
  const Dataset d = typed({{"1", "Town C", QuestionType::kNP},
                           {"2", "Town D", QuestionType::kNP},
                           {"3", "Town C", QuestionType::kNP},
                           {"4", "higher", QuestionType::kADJP},
                           {"5", "more slowly", QuestionType::kADVP},
                           {"6", "yes", QuestionType::kOthers}});
  // Predictor that swaps the two words of each answer; single words stay.
  PredictionSet p;
  for (const Example& e : d) {
    const std::string& a = e.answer;
    const std::size_t sp = a.find(' ');
    p[e.id].answer = sp == std::string::npos ? a : a.substr(sp + 1) + " " + a.substr(0, sp);
  }
  const std::vector<TypeRow> rows = em_by_type(p, d);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].type, QuestionType::kNP);
  EXPECT_EQ(rows[0].count, 3u);
  EXPECT_DOUBLE_EQ(rows[0].em, 0.0);
  EXPECT_EQ(rows[1].type, QuestionType::kADJP);
  EXPECT_DOUBLE_EQ(rows[1].em, 100.0);
  EXPECT_EQ(rows[2].type, QuestionType::kADVP);
  EXPECT_DOUBLE_EQ(rows[2].em, 0.0);

  const std::vector<TypeRow> all = em_by_type(p, d, true);
  ASSERT_EQ(all.size(), 4u);
  EXPECT_EQ(all[3].type, QuestionType::kOthers);
  EXPECT_DOUBLE_EQ(all[3].em, 100.0);

  // Count-weighted row EMs give back the overall EM.
  double weighted = 0;
  std::size_t n = 0;
  for (const TypeRow& r : all) {
    weighted += r.em * r.count;
    n += r.count;
  }
  EXPECT_NEAR(weighted / n, evaluate_em(p, d).em, 1e-9);
}

}  // namespace
}  // namespace msqa
