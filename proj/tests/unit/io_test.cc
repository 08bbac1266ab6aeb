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

#include <filesystem>
#include <string>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "msqa/errors.h"
#include "msqa/io.h"

namespace msqa {
namespace {

TEST(Io, EscapeRoundTrip) {
  for (const char* s : {"plain", "tab\there", "line\nbreak", "back\\slash", "\\t literal", ""}) {
    EXPECT_EQ(unescape_field(escape_field(s)), s);
    EXPECT_EQ(escape_field(s).find('\t'), std::string::npos);
    EXPECT_EQ(escape_field(s).find('\n'), std::string::npos);
  }
}

TEST(Io, ScoresRoundTripExactly) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-17, 123456.789, 0.0}) {
    EXPECT_EQ(std::stod(format_score(v)), v);
  }
}

TEST(Io, CandidatesRoundTrip) {
  CandidateSet s;
  s.example_id = "q\t1";
  s.generator = "turn-2";
  s.candidates = {{3, 4, "Town\tA", 0.75}, {0, 0, "yes", -1.0 / 7.0}};
  CandidateSet empty;
  empty.example_id = "q2";
  empty.generator = "turn-2";
  const std::string text = format_candidates({s, empty});
  const std::vector<CandidateSet> back = parse_candidates(text);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].example_id, s.example_id);
  EXPECT_EQ(back[0].generator, "turn-2");
  ASSERT_EQ(back[0].candidates.size(), 2u);
  EXPECT_EQ(back[0].candidates[0].text, "Town\tA");
  EXPECT_EQ(back[0].candidates[1].score, -1.0 / 7.0);
  EXPECT_EQ(back[0].candidates[0].start, 3u);
  EXPECT_TRUE(back[1].candidates.empty());
  EXPECT_EQ(format_candidates(back), text);
}

TEST(Io, CandidatesRejectBadCounts) {
  EXPECT_THROW(parse_candidates("q\tg\t2\t0\t0\tx\t1\n"), ParseError);
  EXPECT_THROW(parse_candidates("q\tg\tmany\n"), ParseError);
}

TEST(Io, VotesAndPredictionsRoundTrip) {
  const std::vector<RerankVote> votes = {{"r1", "q1", 2, 0.5}, {"r2", "q1", 0, 1.0 / 3.0}};
  const std::vector<RerankVote> vb = parse_votes(format_votes(votes));
  ASSERT_EQ(vb.size(), 2u);
  EXPECT_EQ(vb[1].reranker, "r2");
  EXPECT_EQ(vb[1].probability, 1.0 / 3.0);
  EXPECT_EQ(vb[0].index, 2u);

  PredictionSet p;
  p["a"] = {"Town A", 0.25, {}};
  p["b"] = {"line\nbreak", -3.0, {}};
  const PredictionSet pb = parse_predictions(format_predictions(p));
  ASSERT_EQ(pb.size(), 2u);
  EXPECT_EQ(pb.at("b").answer, "line\nbreak");
  EXPECT_EQ(pb.at("a").score, 0.25);
}

TEST(Io, GitBlobHash) {
  EXPECT_EQ(git_blob_hash("hello\n"), "ce013625030ba8dba906f756967f9e9ca394464a");
  EXPECT_EQ(git_blob_hash(""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
}

TEST(Io, ManifestIsStableAndKeyedByFileName) {
  const auto dir = std::filesystem::temp_directory_path() / "msqa_io_test";
  std::filesystem::create_directories(dir / "a");
  std::filesystem::create_directories(dir / "b");
  write_file((dir / "a" / "in.txt").string(), "hello\n");
  write_file((dir / "b" / "in.txt").string(), "hello\n");
  auto build = [&](const char* sub) {
    Manifest m("train");
    m.config("epochs", "3");
    m.config("seed", "7");
    m.input((dir / sub / "in.txt").string());
    m.metric("dev_em", 61.25);
    m.metric_text("note", "ok");
    return m.to_json();
  };
  EXPECT_EQ(build("a"), build("b"));
  const auto j = nlohmann::json::parse(build("a"));
  EXPECT_EQ(j["command"], "train");
  EXPECT_EQ(j["inputs"]["in.txt"], "ce013625030ba8dba906f756967f9e9ca394464a");
  EXPECT_DOUBLE_EQ(j["metrics"]["dev_em"].get<double>(), 61.25);
  std::filesystem::remove_all(dir);
}

TEST(Io, MissingFileIsInputError) {
  EXPECT_THROW(read_file("/nonexistent/msqa/file"), InputError);
}

}  // namespace
}  // namespace msqa
