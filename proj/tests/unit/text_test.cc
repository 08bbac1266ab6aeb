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

#include <gtest/gtest.h>

#include "msqa/encoder.h"
#include "msqa/errors.h"
#include "msqa/text.h"

namespace msqa {
namespace {

std::vector<std::string> texts(const std::vector<Token>& tokens) {
  std::vector<std::string> out;
  for (const Token& t : tokens) out.push_back(t.text);
  return out;
}

TEST(Tokenize, LowercasesAndSplitsPunctuation) {
  const auto tokens = tokenize("Village A, has MORE rain.");
  EXPECT_EQ(texts(tokens),
            (std::vector<std::string>{"village", "a", ",", "has", "more", "rain", "."}));
}

TEST(Tokenize, OffsetsPointIntoTheSource) {
  const std::string text = "  Day 2 crash";
  for (const Token& t : tokenize(text)) {
    std::string surface = text.substr(t.begin, t.end - t.begin);
    for (char& c : surface) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    EXPECT_EQ(surface, t.text);
  }
}

TEST(Vocabulary, ReservedTokensComeFirstAndUnknownMapsToUnk) {
  const Vocabulary v = Vocabulary::build({"b a", "c a"});
  EXPECT_EQ(v.token(Vocabulary::kPad), kPadToken);
  EXPECT_EQ(v.token(Vocabulary::kCls), kClsToken);
  EXPECT_EQ(v.size(), Vocabulary::kReservedCount + 3);
  EXPECT_EQ(v.id("a"), static_cast<std::int32_t>(Vocabulary::kReservedCount));
  EXPECT_EQ(v.id("zebra"), Vocabulary::kUnk);
}

TEST(Vocabulary, LinesRoundTrip) {
  const Vocabulary v = Vocabulary::build({"x y z"});
  const Vocabulary w = Vocabulary::from_lines(v.tokens());
  EXPECT_EQ(w.tokens(), v.tokens());
}

TEST(Assemble, LayoutAndRegions) {
  const Vocabulary v = Vocabulary::build({"b1 b2", "s1", "q1 q2"});
  const EncodedInput in = assemble("b1 b2", "s1", "q1 q2", v);
  const std::vector<std::string> want = {std::string(kClsToken), "b1", "b2",
                                         std::string(kSituationMarkToken), "s1",
                                         std::string(kSepToken), std::string(kSepToken),
                                         std::string(kQuestionMarkToken), "q1", "q2",
                                         std::string(kSepToken)};
  EXPECT_EQ(in.tokens, want);
  EXPECT_EQ(in.regions[1], Region::kBackground);
  EXPECT_EQ(in.regions[4], Region::kSituation);
  EXPECT_EQ(in.regions[8], Region::kQuestion);
  EXPECT_EQ(in.segments[4], 0);
  EXPECT_EQ(in.segments[8], 1);
  EXPECT_TRUE(is_marker(in.regions[3]));
  EXPECT_EQ(detokenize(in, 8, 9), "q1 q2");
}

TEST(Assemble, OverLongInputIsRejectedUnlessTruncating) {
  const Vocabulary v = Vocabulary::build({"w"});
  std::string background;
  for (int i = 0; i < 20; ++i) background += "w ";
  AssembleOptions strict;
  strict.max_length = 12;
  EXPECT_THROW(assemble(background, "w", "w", v, strict), InputError);
  AssembleOptions cut = strict;
  cut.truncate = true;
  const EncodedInput in = assemble(background, "w", "w", v, cut);
  EXPECT_EQ(in.size(), 12u);
  EXPECT_EQ(in.tokens.back(), kSepToken);
}

TEST(Assemble, DetokenizeAcrossRegionsThrows) {
  const Vocabulary v = Vocabulary::build({"a b c"});
  const EncodedInput in = assemble("a", "b", "c", v);
  EXPECT_THROW(detokenize(in, 1, 4), Error);
}

TEST(Encoder, OutputShapeAndDeterminism) {
  const Vocabulary v = Vocabulary::build({"a b c"});
  EncodedInput in = assemble("a", "b", "c", v);
  EncoderConfig cfg;
  cfg.vocab_size = v.size();
  cfg.width = 8;
  cfg.heads = 2;
  cfg.ff_width = 16;
  cfg.depth = 1;
  ParameterStore s1, s2;
  Rng r1(9), r2(9);
  const Encoder e1(cfg, s1, r1), e2(cfg, s2, r2);
  const Tensor a = e1.encode(in), b = e2.encode(in);
  EXPECT_EQ(a.shape(), (Shape{in.size(), 8}));
  for (std::size_t k = 0; k < a.numel(); ++k) EXPECT_EQ(a.data()[k], b.data()[k]);
}

TEST(RegionView, SelectsRowsOfOneRegion) {
  const Vocabulary v = Vocabulary::build({"a b c d"});
  EncodedInput in = assemble("a b", "c", "d", v);
  in.vectors = Tensor::zeros({in.size(), 2});
  const RegionView view = region_view(in, Region::kBackground);
  EXPECT_EQ(view.indices, (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(view.rows.shape(), (Shape{2, 2}));
  EncodedInput bare = assemble("", "c", "d", v);
  bare.vectors = Tensor::zeros({bare.size(), 2});
  EXPECT_TRUE(region_view(bare, Region::kBackground).empty());
}

}  // namespace
}  // namespace msqa
