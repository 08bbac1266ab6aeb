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

#ifndef MSQA_TREES_H_
#define MSQA_TREES_H_

#include <cstddef>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "msqa/data.h"

namespace msqa {

// Bracketed (PTB-style) constituency tree. A preterminal is a node whose only
// child is a leaf word; leaves carry the word and no label.
struct ConstituencyTree {
  std::string label;
  std::string word;  // leaves only
  std::vector<ConstituencyTree> children;
  std::size_t first = 0;  // leaf span [first, last], set by the parser
  std::size_t last = 0;

  bool is_leaf() const { return children.empty(); }
  bool is_preterminal() const { return children.size() == 1 && children[0].is_leaf(); }
  std::size_t leaf_count() const { return last - first + 1; }
  std::vector<std::string> leaves() const;
  std::string to_string() const;
};

// Parses "(S (NP (NNP John)) (VP ...))". An unlabeled outer wrapper
// "( (S ...))" is accepted and dropped.
ConstituencyTree parse_tree(std::string_view text);

// The lowest phrase-level node whose leaf span covers [first, last];
// preterminals are skipped. Returns nullptr when only the root would do and
// the root is itself a preterminal.
const ConstituencyTree* covering_node(const ConstituencyTree& tree, std::size_t first,
                                      std::size_t last);

QuestionType type_from_label(std::string_view label);

// Label of the covering node mapped to NP/VP/ADJP/ADVP, anything else Others.
QuestionType classify_question_type(const ConstituencyTree& tree, std::size_t first,
                                    std::size_t last);

// Sentence trees of one example, in passage order; leaf indices of later trees
// continue after earlier ones. Spans crossing a tree boundary are Others.
QuestionType classify_question_type(const std::vector<ConstituencyTree>& trees,
                                    std::size_t first, std::size_t last);

// Trees file: "<example id>\t<bracketed tree>" per line; repeated ids append
// further sentence trees for the same example.
std::map<std::string, std::vector<ConstituencyTree>> load_trees(const std::string& path);
std::map<std::string, std::vector<ConstituencyTree>> parse_trees(std::string_view text);

struct TypeAnalysis {
  std::size_t labeled = 0;
  std::vector<std::string> skipped;  // no trees, or the answer is not in the leaves
};

// Labels each example by locating its answer (last occurrence) in the leaves of
// its trees and classifying the covering constituent.
TypeAnalysis label_types(Dataset& dataset,
                         const std::map<std::string, std::vector<ConstituencyTree>>& trees);

}  // namespace msqa

#endif  // MSQA_TREES_H_
