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
#include <vector>

#include <gtest/gtest.h>

#include "msqa/data.h"
#include "msqa/errors.h"
#include "msqa/trees.h"
#include "oracles.h"
#include "test_util.h"

namespace msqa {
namespace {

using testing::load_typed_spans;
using testing::scan_lowest;
using testing::TypedSpan;

TEST(Trees, ParsesLeavesAndSpans) {
  const ConstituencyTree t = parse_tree("( (S (NP (DT The) (NN cat)) (VP (VBD sat))))");
  EXPECT_EQ(t.label, "S");
  EXPECT_EQ(t.leaves(), (std::vector<std::string>{"The", "cat", "sat"}));
  EXPECT_EQ(t.children[1].first, 2u);
  EXPECT_EQ(t.children[1].last, 2u);
  EXPECT_TRUE(t.children[1].children[0].is_preterminal());
  EXPECT_EQ(parse_tree(t.to_string()).to_string(), t.to_string());
}

TEST(Trees, RejectsMalformed) {
  EXPECT_THROW(parse_tree("(S (NP (DT The)"), ParseError);
  EXPECT_THROW(parse_tree("(S (NP (DT The))) extra"), ParseError);
  EXPECT_THROW(parse_tree(""), ParseError);
}

TEST(Trees, HandTracedFixture) {
  const std::vector<TypedSpan> rows = load_typed_spans();
  ASSERT_EQ(rows.size(), 20u);
  for (const TypedSpan& row : rows) {
    const ConstituencyTree t = parse_tree(row.tree);
    EXPECT_STREQ(type_name(classify_question_type(t, row.first, row.last)),
                 row.expected.c_str())
        << row.tree << " [" << row.first << ", " << row.last << "]";
  }
}

TEST(Trees, CoveringNodeMatchesExhaustiveScan) {
  for (const TypedSpan& row : load_typed_spans()) {
    const ConstituencyTree t = parse_tree(row.tree);
    const std::size_t n = t.leaf_count();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i; j < n; ++j) {
        const ConstituencyTree* got = covering_node(t, i, j);
        ASSERT_NE(got, nullptr);
        EXPECT_EQ(got, scan_lowest(t, i, j)) << row.tree << " [" << i << ", " << j << "]";
      }
    }
  }
}

TEST(Trees, LabelFunctionTagsAreStripped) {
  EXPECT_EQ(type_from_label("NP-SBJ"), QuestionType::kNP);
  EXPECT_EQ(type_from_label("ADVP-TMP"), QuestionType::kADVP);
  EXPECT_EQ(type_from_label("PP"), QuestionType::kOthers);
  EXPECT_EQ(type_from_label("-NONE-"), QuestionType::kOthers);
}

TEST(Trees, SpansCrossingSentencesAreOthers) {
  const std::vector<ConstituencyTree> trees = {
      parse_tree("(S (NP (NN rain)) (VP (VBD fell)))"),
      parse_tree("(S (NP (NNP Town) (NNP A)) (VP (VBD flooded)))")};
  EXPECT_EQ(classify_question_type(trees, 2, 3), QuestionType::kNP);
  EXPECT_EQ(classify_question_type(trees, 1, 2), QuestionType::kOthers);
  EXPECT_THROW(classify_question_type(trees, 9, 9), InputError);
}

TEST(Trees, LabelTypesUsesLastOccurrence) {
  Dataset d(2);
  d[0].id = "a";
  d[0].answer = "rain";
  d[1].id = "b";
  d[1].answer = "snow";
  std::map<std::string, std::vector<ConstituencyTree>> trees;
  // "rain" is an NP in the first sentence and a verb in the second.
  trees["a"] = {parse_tree("(S (NP (NN rain)) (VP (VBD fell)))"),
                parse_tree("(S (NP (PRP it)) (VP (VB rain)))")};
  const TypeAnalysis a = label_types(d, trees);
  EXPECT_EQ(a.labeled, 1u);
  EXPECT_EQ(a.skipped, (std::vector<std::string>{"b"}));
  EXPECT_EQ(d[0].type, QuestionType::kVP);
  EXPECT_FALSE(d[1].type.has_value());
}

TEST(Trees, LoadsRepeatedIdsInOrder) {
  const auto trees = parse_trees("x\t(S (NN a))\nx\t(S (NN b))\ny\t(S (NN c))\n");
  ASSERT_EQ(trees.size(), 2u);
  ASSERT_EQ(trees.at("x").size(), 2u);
  EXPECT_EQ(trees.at("x")[1].leaves()[0], "b");
}

}  // namespace
}  // namespace msqa
