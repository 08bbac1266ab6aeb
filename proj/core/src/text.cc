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

#include "msqa/text.h"

#include <algorithm>
#include <fstream>
#include <set>

#include "msqa/errors.h"
#include "msqa/ops.h"

namespace msqa {
namespace {

bool is_word_byte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') ||
         (c >= 'A' && c <= 'Z') || c >= 0x80;
}

bool is_space_byte(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

}  // namespace

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (is_space_byte(c)) {
      ++i;
    } else if (is_word_byte(c)) {
      std::size_t j = i;
      while (j < text.size() && is_word_byte(static_cast<unsigned char>(text[j]))) ++j;
      tokens.push_back({lower(text.substr(i, j - i)), i, j});
      i = j;
    } else {
      tokens.push_back({std::string(1, text[i]), i, i + 1});
      ++i;
    }
  }
  return tokens;
}

const char* region_name(Region region) {
  switch (region) {
    case Region::kCls: return "CLS";
    case Region::kBackground: return "BACKGROUND";
    case Region::kSituationMark: return "S-MARK";
    case Region::kSituation: return "SITUATION";
    case Region::kSep: return "SEP";
    case Region::kQuestionMark: return "Q-MARK";
    case Region::kQuestion: return "QUESTION";
  }
  return "?";
}

bool is_marker(Region region) {
  return region != Region::kBackground && region != Region::kSituation &&
         region != Region::kQuestion;
}

Vocabulary::Vocabulary() {
  append(std::string(kPadToken));
  append(std::string(kUnkToken));
  append(std::string(kClsToken));
  append(std::string(kSepToken));
  append(std::string(kSituationMarkToken));
  append(std::string(kQuestionMarkToken));
}

void Vocabulary::append(std::string token) {
  if (index_.count(token)) throw InputError("duplicate vocabulary token: " + token);
  index_.emplace(token, static_cast<std::int32_t>(tokens_.size()));
  tokens_.push_back(std::move(token));
}

Vocabulary Vocabulary::build(const std::vector<std::string>& texts) {
  std::set<std::string> words;
  for (const std::string& text : texts) {
    for (Token& t : tokenize(text)) words.insert(std::move(t.text));
  }
  Vocabulary vocab;
  for (const std::string& w : words) {
    if (!vocab.index_.count(w)) vocab.append(w);
  }
  return vocab;
}

Vocabulary Vocabulary::from_lines(const std::vector<std::string>& lines) {
  Vocabulary vocab;
  if (lines.size() < kReservedCount) {
    throw ParseError("vocabulary file shorter than the reserved block");
  }
  for (std::size_t i = 0; i < kReservedCount; ++i) {
    if (lines[i] != vocab.tokens_[i]) {
      throw ParseError("vocabulary line " + std::to_string(i + 1) + " must be " +
                       vocab.tokens_[i] + ", found " + lines[i]);
    }
  }
  for (std::size_t i = kReservedCount; i < lines.size(); ++i) vocab.append(lines[i]);
  return vocab;
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open vocabulary: " + path);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return from_lines(lines);
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open for writing: " + path);
  for (const std::string& t : tokens_) out << t << '\n';
}

std::int32_t Vocabulary::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token(std::int32_t id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw StateError("token id " + std::to_string(id) + " outside vocabulary of size " +
                     std::to_string(tokens_.size()));
  }
  return tokens_[static_cast<std::size_t>(id)];
}

const std::string& EncodedInput::source(Region region) const {
  switch (region) {
    case Region::kBackground: return background;
    case Region::kSituation: return situation;
    case Region::kQuestion: return question;
    default: break;
  }
  throw InputError(std::string("marker region has no source text: ") + region_name(region));
}

std::vector<std::size_t> EncodedInput::region_indices(Region region) const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < regions.size(); ++k) {
    if (regions[k] == region) out.push_back(k);
  }
  return out;
}

EncodedInput assemble(const std::string& background, const std::string& situation,
                      const std::string& question, const Vocabulary& vocab,
                      const AssembleOptions& options) {
  std::vector<Token> b = tokenize(background);
  const std::vector<Token> s = tokenize(situation);
  const std::vector<Token> q = tokenize(question);
  if (q.empty()) throw InputError("assemble: question is empty");
  if (s.empty()) throw InputError("assemble: situation is empty");
  constexpr std::size_t kMarkers = 6;
  std::size_t total = b.size() + s.size() + q.size() + kMarkers;
  if (total > options.max_length) {
    const std::size_t excess = total - options.max_length;
    if (!options.truncate || excess > b.size()) {
      throw InputError("assemble: " + std::to_string(total) +
                       " tokens exceed the maximum sequence length of " +
                       std::to_string(options.max_length));
    }
    b.resize(b.size() - excess);
    total = options.max_length;
  }

  EncodedInput out;
  out.background = background;
  out.situation = situation;
  out.question = question;
  out.tokens.reserve(total);
  auto push_marker = [&](std::string_view token, std::int32_t id, Region region,
                         std::uint8_t segment) {
    out.tokens.emplace_back(token);
    out.ids.push_back(id);
    out.regions.push_back(region);
    out.segments.push_back(segment);
    out.char_offsets.emplace_back(0, 0);
  };
  auto push_text = [&](const std::vector<Token>& tokens, Region region,
                       std::uint8_t segment) {
    for (const Token& t : tokens) {
      out.tokens.push_back(t.text);
      out.ids.push_back(vocab.id(t.text));
      out.regions.push_back(region);
      out.segments.push_back(segment);
      out.char_offsets.emplace_back(t.begin, t.end);
    }
  };
  push_marker(kClsToken, Vocabulary::kCls, Region::kCls, 0);
  push_text(b, Region::kBackground, 0);
  push_marker(kSituationMarkToken, Vocabulary::kSituationMark, Region::kSituationMark, 0);
  push_text(s, Region::kSituation, 0);
  push_marker(kSepToken, Vocabulary::kSep, Region::kSep, 0);
  push_marker(kSepToken, Vocabulary::kSep, Region::kSep, 1);
  push_marker(kQuestionMarkToken, Vocabulary::kQuestionMark, Region::kQuestionMark, 1);
  push_text(q, Region::kQuestion, 1);
  push_marker(kSepToken, Vocabulary::kSep, Region::kSep, 1);
  return out;
}

std::string detokenize(const EncodedInput& input, std::size_t i, std::size_t j) {
  if (i > j || j >= input.size()) {
    throw InputError("detokenize: bad span (" + std::to_string(i) + ", " +
                     std::to_string(j) + ")");
  }
  const Region region = input.regions[i];
  for (std::size_t k = i; k <= j; ++k) {
    if (input.regions[k] != region || is_marker(region)) {
      throw InputError("detokenize: span (" + std::to_string(i) + ", " +
                       std::to_string(j) + ") crosses a region boundary or marker");
    }
  }
  const std::string& text = input.source(region);
  const std::size_t begin = input.char_offsets[i].first;
  const std::size_t end = input.char_offsets[j].second;
  return text.substr(begin, end - begin);
}

RegionView region_view(const EncodedInput& input, Region region) {
  if (!input.vectors.defined()) throw StateError("region_view: input is not encoded");
  RegionView view;
  view.indices = input.region_indices(region);
  view.rows = gather_rows(input.vectors, view.indices);
  return view;
}

}  // namespace msqa
