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

// Line-oriented exchange files and the run manifest.
//
//   candidates   <id> \t <generator> \t <count> { \t <i> \t <j> \t <text> \t <score> }
//   votes        <id> \t <reranker> \t <index> \t <probability>
//   predictions  <id> \t <answer> \t <score>
//
// Text fields escape backslash, tab and newline as \\, \t and \n. Scores are
// written with 17 significant digits so a read/write round trip is exact.

#ifndef MSQA_IO_H_
#define MSQA_IO_H_

#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "msqa/eval.h"
#include "msqa/nmn.h"
#include "msqa/rerank.h"

namespace msqa {

std::string escape_field(std::string_view text);
std::string unescape_field(std::string_view text);
std::string format_score(double value);

std::string format_candidates(const std::vector<CandidateSet>& sets);
std::vector<CandidateSet> parse_candidates(std::string_view text);
void write_candidates(const std::string& path, const std::vector<CandidateSet>& sets);
std::vector<CandidateSet> read_candidates(const std::string& path);

std::string format_votes(const std::vector<RerankVote>& votes);
std::vector<RerankVote> parse_votes(std::string_view text);
void write_votes(const std::string& path, const std::vector<RerankVote>& votes);
std::vector<RerankVote> read_votes(const std::string& path);

std::string format_predictions(const PredictionSet& predictions);
PredictionSet parse_predictions(std::string_view text);
void write_predictions(const std::string& path, const PredictionSet& predictions);
PredictionSet read_predictions(const std::string& path);

// One JSON object per line: example id, per-module attention weights with the
// attended tokens, and modules replaced by zeros.
std::string format_trace(const std::string& example_id, const EncodedInput& input,
                         const InferenceTrace& trace);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

// Git blob id: sha1("blob <size>\0" + contents), lowercase hex.
std::string git_blob_hash(std::string_view contents);
std::string git_blob_hash_file(const std::string& path);

// Structured run record. Sections keep insertion order so identical runs give
// byte-identical files.
class Manifest {
 public:
  explicit Manifest(std::string command);

  void config(const std::string& key, const std::string& value);
  // Files are keyed by file name (not the full path) with their content hash,
  // so the same run in another directory gives the same manifest.
  void input(const std::string& path);
  void output(const std::string& path);
  void metric(const std::string& key, double value);
  void metric_text(const std::string& key, const std::string& value);

  std::string to_json() const;
  void write(const std::string& path) const;

 private:
  std::string command_;
  std::vector<std::pair<std::string, std::string>> config_;
  std::vector<std::pair<std::string, std::string>> inputs_;
  std::vector<std::pair<std::string, std::string>> outputs_;
  std::vector<std::pair<std::string, std::string>> metrics_;  // preformatted JSON values
};

}  // namespace msqa

#endif  // MSQA_IO_H_
