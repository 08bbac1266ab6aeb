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

#ifndef MSQA_TEXT_H_
#define MSQA_TEXT_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "msqa/tensor.h"

namespace msqa {

struct Token {
  std::string text;   // lowercased surface form
  std::size_t begin;  // byte offsets into the source string
  std::size_t end;
};

// Lowercased word/punctuation tokenization. Runs of ASCII alphanumerics (and
// any non-ASCII bytes) form words; every other non-space ASCII character is
// a token of its own. Offsets index the original string.
std::vector<Token> tokenize(std::string_view text);

enum class Region : std::uint8_t {
  kCls,
  kBackground,
  kSituationMark,
  kSituation,
  kSep,
  kQuestionMark,
  kQuestion,
};

const char* region_name(Region region);
bool is_marker(Region region);
// Regions whose tokens come from a source passage.
inline constexpr Region kTextRegions[] = {Region::kBackground, Region::kSituation,
                                          Region::kQuestion};

inline constexpr std::string_view kPadToken = "[PAD]";
inline constexpr std::string_view kUnkToken = "[UNK]";
inline constexpr std::string_view kClsToken = "[CLS]";
inline constexpr std::string_view kSepToken = "[SEP]";
inline constexpr std::string_view kSituationMarkToken = "S:";
inline constexpr std::string_view kQuestionMarkToken = "Q:";

class Vocabulary {
 public:
  static constexpr std::int32_t kPad = 0;
  static constexpr std::int32_t kUnk = 1;
  static constexpr std::int32_t kCls = 2;
  static constexpr std::int32_t kSep = 3;
  static constexpr std::int32_t kSituationMark = 4;
  static constexpr std::int32_t kQuestionMark = 5;
  static constexpr std::size_t kReservedCount = 6;

  // Reserved tokens only.
  Vocabulary();

  // Reserved tokens followed by every distinct token of `texts` (min
  // frequency 1) in lexicographic order.
  static Vocabulary build(const std::vector<std::string>& texts);

  // One token per line; line number is the id; reserved tokens first.
  static Vocabulary load(const std::string& path);
  void save(const std::string& path) const;
  static Vocabulary from_lines(const std::vector<std::string>& lines);

  std::int32_t id(std::string_view token) const;  // kUnk when absent
  const std::string& token(std::int32_t id) const;
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  void append(std::string token);
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::int32_t> index_;
};

struct AssembleOptions {
  std::size_t max_length = 512;
  // When set, over-long inputs lose background tokens from the end instead
  // of being rejected.
  bool truncate = false;
};

// One QA instance laid out as [CLS] B S: S [SEP] [SEP] Q: Q [SEP].
struct EncodedInput {
  std::vector<std::string> tokens;
  std::vector<std::int32_t> ids;
  std::vector<Region> regions;
  // 0 for [CLS] B S: S [SEP], 1 for [SEP] Q: Q [SEP].
  std::vector<std::uint8_t> segments;
  // Byte offsets into the passage named by regions[k]; {0,0} for markers.
  std::vector<std::pair<std::size_t, std::size_t>> char_offsets;
  std::string background;
  std::string situation;
  std::string question;
  Tensor vectors;  // [tokens, D] once encoded

  std::size_t size() const { return tokens.size(); }
  const std::string& source(Region region) const;
  // Token indices belonging to a region, in order.
  std::vector<std::size_t> region_indices(Region region) const;
};

EncodedInput assemble(const std::string& background, const std::string& situation,
                      const std::string& question, const Vocabulary& vocab,
                      const AssembleOptions& options = {});

// Source text covered by tokens [i, j]; all tokens must share one region.
std::string detokenize(const EncodedInput& input, std::size_t i, std::size_t j);

struct RegionView {
  Tensor rows;                        // [count, D]
  std::vector<std::size_t> indices;   // original token index of each row
  bool empty() const { return indices.empty(); }
};

// Rows of input.vectors for one region. An absent region gives an empty view.
RegionView region_view(const EncodedInput& input, Region region);

}  // namespace msqa

#endif  // MSQA_TEXT_H_
