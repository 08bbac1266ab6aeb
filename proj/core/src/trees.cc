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

#include "msqa/trees.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "msqa/errors.h"
#include "msqa/text.h"

namespace msqa {
namespace {

class TreeParser {
 public:
  explicit TreeParser(std::string_view text) : text_(text) {}

  ConstituencyTree parse() {
    skip_space();
    ConstituencyTree tree = node();
    skip_space();
    if (pos_ != text_.size()) fail("trailing text after the tree");
    // "( (S ...))": unlabeled wrapper around a single tree.
    while (tree.label.empty() && tree.children.size() == 1 && !tree.children[0].is_leaf()) {
      ConstituencyTree inner = std::move(tree.children[0]);
      tree = std::move(inner);
    }
    if (tree.label.empty()) fail("root has no label");
    std::size_t next = 0;
    assign_spans(tree, next);
    return tree;
  }

 private:
  ConstituencyTree node() {
    expect('(');
    ConstituencyTree tree;
    skip_space();
    if (pos_ < text_.size() && text_[pos_] != '(' && text_[pos_] != ')') tree.label = atom();
    skip_space();
    while (pos_ < text_.size() && text_[pos_] != ')') {
      if (text_[pos_] == '(') {
        tree.children.push_back(node());
      } else {
        ConstituencyTree leaf;
        leaf.word = atom();
        tree.children.push_back(std::move(leaf));
      }
      skip_space();
    }
    expect(')');
    if (tree.children.empty()) fail("node \"" + tree.label + "\" has no children");
    return tree;
  }

  std::string atom() {
    const std::size_t begin = pos_;
    while (pos_ < text_.size() && text_[pos_] != '(' && text_[pos_] != ')' &&
           !std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
    return std::string(text_.substr(begin, pos_ - begin));
  }

  void expect(char c) {
    if (pos_ >= text_.size() || text_[pos_] != c) {
      fail(std::string("expected '") + c + "'");
    }
    ++pos_;
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("tree: " + what + " at offset " + std::to_string(pos_));
  }

  static void assign_spans(ConstituencyTree& tree, std::size_t& next) {
    if (tree.is_leaf()) {
      tree.first = tree.last = next++;
      return;
    }
    for (ConstituencyTree& child : tree.children) assign_spans(child, next);
    tree.first = tree.children.front().first;
    tree.last = tree.children.back().last;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

void collect_leaves(const ConstituencyTree& tree, std::vector<std::string>& out) {
  if (tree.is_leaf()) {
    out.push_back(tree.word);
    return;
  }
  for (const ConstituencyTree& child : tree.children) collect_leaves(child, out);
}

const ConstituencyTree* lowest_cover(const ConstituencyTree& tree, std::size_t first,
                                     std::size_t last) {
  if (tree.is_leaf() || first < tree.first || last > tree.last) return nullptr;
  for (const ConstituencyTree& child : tree.children) {
    if (const ConstituencyTree* hit = lowest_cover(child, first, last)) return hit;
  }
  return tree.is_preterminal() ? nullptr : &tree;
}

}  // namespace

std::vector<std::string> ConstituencyTree::leaves() const {
  std::vector<std::string> out;
  collect_leaves(*this, out);
  return out;
}

std::string ConstituencyTree::to_string() const {
  if (is_leaf()) return word;
  std::string out = "(" + label;
  for (const ConstituencyTree& child : children) out += " " + child.to_string();
  return out + ")";
}

ConstituencyTree parse_tree(std::string_view text) { return TreeParser(text).parse(); }

const ConstituencyTree* covering_node(const ConstituencyTree& tree, std::size_t first,
                                      std::size_t last) {
  if (first > last || last > tree.last) {
    throw InputError("answer span [" + std::to_string(first) + ", " + std::to_string(last) +
                     "] outside the tree's " + std::to_string(tree.leaf_count()) + " leaves");
  }
  return lowest_cover(tree, first, last);
}

QuestionType type_from_label(std::string_view label) {
  // Function tags and indices ("NP-SBJ", "NP=2") do not change the category.
  const std::size_t cut = label.find_first_of("-=");
  const std::string_view base = cut == std::string_view::npos || cut == 0 ? label : label.substr(0, cut);
  if (base == "NP") return QuestionType::kNP;
  if (base == "VP") return QuestionType::kVP;
  if (base == "ADJP") return QuestionType::kADJP;
  if (base == "ADVP") return QuestionType::kADVP;
  return QuestionType::kOthers;
}

QuestionType classify_question_type(const ConstituencyTree& tree, std::size_t first,
                                    std::size_t last) {
  const ConstituencyTree* node = covering_node(tree, first, last);
  return node == nullptr ? QuestionType::kOthers : type_from_label(node->label);
}

QuestionType classify_question_type(const std::vector<ConstituencyTree>& trees,
                                    std::size_t first, std::size_t last) {
  std::size_t offset = 0;
  for (const ConstituencyTree& tree : trees) {
    const std::size_t n = tree.leaf_count();
    if (first >= offset && first < offset + n) {
      if (last >= offset + n) return QuestionType::kOthers;
      return classify_question_type(tree, first - offset, last - offset);
    }
    offset += n;
  }
  throw InputError("answer span [" + std::to_string(first) + ", " + std::to_string(last) +
                   "] outside the " + std::to_string(offset) + " leaves of the trees");
}

std::map<std::string, std::vector<ConstituencyTree>> parse_trees(std::string_view text) {
  std::map<std::string, std::vector<ConstituencyTree>> out;
  std::size_t line_no = 0;
  std::size_t begin = 0;
  while (begin < text.size()) {
    std::size_t end = text.find('\n', begin);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(begin, end - begin);
    begin = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos || tab == 0) {
      throw ParseError("trees line " + std::to_string(line_no) + ": expected <id>\\t<tree>");
    }
    try {
      out[std::string(line.substr(0, tab))].push_back(parse_tree(line.substr(tab + 1)));
    } catch (const ParseError& e) {
      throw ParseError("trees line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::map<std::string, std::vector<ConstituencyTree>> load_trees(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_trees(buffer.str());
}

TypeAnalysis label_types(Dataset& dataset,
                         const std::map<std::string, std::vector<ConstituencyTree>>& trees) {
  TypeAnalysis analysis;
  for (Example& ex : dataset) {
    auto it = trees.find(ex.id);
    if (it == trees.end()) {
      analysis.skipped.push_back(ex.id);
      continue;
    }
    std::vector<std::string> leaves;
    for (const ConstituencyTree& tree : it->second) {
      for (std::string& w : tree.leaves()) {
        for (char& c : w) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        leaves.push_back(std::move(w));
      }
    }
    std::vector<std::string> answer;
    for (Token& t : tokenize(ex.answer)) answer.push_back(std::move(t.text));
    std::optional<std::size_t> hit;
    for (std::size_t i = 0; !answer.empty() && i + answer.size() <= leaves.size(); ++i) {
      if (std::equal(answer.begin(), answer.end(), leaves.begin() + static_cast<std::ptrdiff_t>(i))) {
        hit = i;
      }
    }
    if (!hit) {
      analysis.skipped.push_back(ex.id);
      continue;
    }
    ex.type = classify_question_type(it->second, *hit, *hit + answer.size() - 1);
    ++analysis.labeled;
  }
  return analysis;
}

}  // namespace msqa
