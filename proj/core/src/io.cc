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

#include "msqa/io.h"

#include <openssl/evp.h>

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "msqa/errors.h"

namespace msqa {
namespace {

std::vector<std::string> split_tabs(std::string_view line) {
  std::vector<std::string> out;
  std::size_t begin = 0;
  while (true) {
    const std::size_t tab = line.find('\t', begin);
    if (tab == std::string_view::npos) {
      out.emplace_back(line.substr(begin));
      return out;
    }
    out.emplace_back(line.substr(begin, tab - begin));
    begin = tab + 1;
  }
}

// Calls fn(line_no, fields) for every non-empty line.
template <typename Fn>
void for_each_record(std::string_view text, const char* what, Fn fn) {
  std::size_t begin = 0, line_no = 0;
  while (begin < text.size()) {
    std::size_t end = text.find('\n', begin);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(begin, end - begin);
    begin = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    try {
      fn(split_tabs(line));
    } catch (const ParseError& e) {
      throw ParseError(std::string(what) + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

std::size_t parse_index(const std::string& field) {
  std::size_t out = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw ParseError("expected an index, got \"" + field + "\"");
  }
  return out;
}

double parse_double(const std::string& field) {
  try {
    std::size_t used = 0;
    const double v = std::stod(field, &used);
    if (used == field.size()) return v;
  } catch (const std::exception&) {
  }
  throw ParseError("expected a number, got \"" + field + "\"");
}

}  // namespace

std::string escape_field(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string unescape_field(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '\\') {
      out.push_back(text[i]);
      continue;
    }
    if (++i == text.size()) throw ParseError("dangling escape");
    switch (text[i]) {
      case '\\': out.push_back('\\'); break;
      case 't': out.push_back('\t'); break;
      case 'n': out.push_back('\n'); break;
      case 'r': out.push_back('\r'); break;
      default: throw ParseError(std::string("unknown escape \\") + text[i]);
    }
  }
  return out;
}

std::string format_score(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

std::string format_candidates(const std::vector<CandidateSet>& sets) {
  std::string out;
  for (const CandidateSet& set : sets) {
    out += escape_field(set.example_id) + "\t" + escape_field(set.generator) + "\t" +
           std::to_string(set.candidates.size());
    for (const SpanCandidate& c : set.candidates) {
      out += "\t" + std::to_string(c.start) + "\t" + std::to_string(c.end) + "\t" +
             escape_field(c.text) + "\t" + format_score(c.score);
    }
    out += "\n";
  }
  return out;
}

std::vector<CandidateSet> parse_candidates(std::string_view text) {
  std::vector<CandidateSet> out;
  std::set<std::string> ids;
  for_each_record(text, "candidates", [&](const std::vector<std::string>& f) {
    if (f.size() < 3) throw ParseError("expected id, generator and count");
    CandidateSet set;
    set.example_id = unescape_field(f[0]);
    set.generator = unescape_field(f[1]);
    const std::size_t count = parse_index(f[2]);
    if (f.size() != 3 + 4 * count) {
      throw ParseError("count " + std::to_string(count) + " does not match " +
                       std::to_string(f.size() - 3) + " candidate fields");
    }
    for (std::size_t k = 0; k < count; ++k) {
      SpanCandidate c;
      c.start = parse_index(f[3 + 4 * k]);
      c.end = parse_index(f[4 + 4 * k]);
      c.text = unescape_field(f[5 + 4 * k]);
      c.score = parse_double(f[6 + 4 * k]);
      if (c.start > c.end) throw ParseError("candidate with start after end");
      set.candidates.push_back(std::move(c));
    }
    if (!ids.insert(set.example_id).second) {
      throw ParseError("duplicate example id " + set.example_id);
    }
    out.push_back(std::move(set));
  });
  return out;
}

void write_candidates(const std::string& path, const std::vector<CandidateSet>& sets) {
  write_file(path, format_candidates(sets));
}

std::vector<CandidateSet> read_candidates(const std::string& path) {
  return parse_candidates(read_file(path));
}

std::string format_votes(const std::vector<RerankVote>& votes) {
  std::string out;
  for (const RerankVote& v : votes) {
    out += escape_field(v.example_id) + "\t" + escape_field(v.reranker) + "\t" +
           std::to_string(v.index) + "\t" + format_score(v.probability) + "\n";
  }
  return out;
}

std::vector<RerankVote> parse_votes(std::string_view text) {
  std::vector<RerankVote> out;
  for_each_record(text, "votes", [&](const std::vector<std::string>& f) {
    if (f.size() != 4) throw ParseError("expected id, reranker, index, probability");
    RerankVote v;
    v.example_id = unescape_field(f[0]);
    v.reranker = unescape_field(f[1]);
    v.index = parse_index(f[2]);
    v.probability = parse_double(f[3]);
    if (!(v.probability > 0.0 && v.probability <= 1.0)) {
      throw ParseError("probability outside (0, 1]");
    }
    out.push_back(std::move(v));
  });
  return out;
}

void write_votes(const std::string& path, const std::vector<RerankVote>& votes) {
  write_file(path, format_votes(votes));
}

std::vector<RerankVote> read_votes(const std::string& path) { return parse_votes(read_file(path)); }

std::string format_predictions(const PredictionSet& predictions) {
  std::string out;
  for (const auto& [id, p] : predictions) {
    out += escape_field(id) + "\t" + escape_field(p.answer) + "\t" + format_score(p.score) + "\n";
  }
  return out;
}

PredictionSet parse_predictions(std::string_view text) {
  PredictionSet out;
  for_each_record(text, "predictions", [&](const std::vector<std::string>& f) {
    if (f.size() != 3) throw ParseError("expected id, answer, score");
    Prediction p;
    p.answer = unescape_field(f[1]);
    p.score = parse_double(f[2]);
    if (!out.emplace(unescape_field(f[0]), std::move(p)).second) {
      throw ParseError("duplicate example id " + f[0]);
    }
  });
  return out;
}

void write_predictions(const std::string& path, const PredictionSet& predictions) {
  write_file(path, format_predictions(predictions));
}

PredictionSet read_predictions(const std::string& path) {
  return parse_predictions(read_file(path));
}

std::string format_trace(const std::string& example_id, const EncodedInput& input,
                         const InferenceTrace& trace) {
  nlohmann::ordered_json root;
  root["id"] = example_id;
  nlohmann::ordered_json modules = nlohmann::ordered_json::array();
  for (const AttentionRecord& r : trace.records) {
    nlohmann::ordered_json m;
    m["module"] = module_name(r.module);
    m["query"] = r.query;
    nlohmann::ordered_json tokens = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < r.token_indices.size(); ++k) {
      const std::size_t t = r.token_indices[k];
      tokens.push_back({{"index", t},
                        {"token", input.tokens.at(t)},
                        {"region", region_name(input.regions.at(t))},
                        {"weight", r.weights.at(k)}});
    }
    m["tokens"] = std::move(tokens);
    modules.push_back(std::move(m));
  }
  root["modules"] = std::move(modules);
  nlohmann::ordered_json absent = nlohmann::ordered_json::array();
  for (ModuleId id : trace.absent) absent.push_back(module_name(id));
  root["absent"] = std::move(absent);
  return root.dump() + "\n";
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw InputError("write failed for " + path);
}

std::string git_blob_hash(std::string_view contents) {
  const std::string header = "blob " + std::to_string(contents.size()) + std::string(1, '\0');
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  const bool ok = ctx != nullptr && EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) == 1 &&
                  EVP_DigestUpdate(ctx, header.data(), header.size()) == 1 &&
                  EVP_DigestUpdate(ctx, contents.data(), contents.size()) == 1 &&
                  EVP_DigestFinal_ex(ctx, digest, &length) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok) throw StateError("sha1 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int k = 0; k < length; ++k) {
    const unsigned char b = digest[k];
    out.push_back(hex[b >> 4]);
    out.push_back(hex[b & 15]);
  }
  return out;
}

std::string git_blob_hash_file(const std::string& path) { return git_blob_hash(read_file(path)); }

Manifest::Manifest(std::string command) : command_(std::move(command)) {}

void Manifest::config(const std::string& key, const std::string& value) {
  config_.emplace_back(key, value);
}

void Manifest::input(const std::string& path) {
  inputs_.emplace_back(std::filesystem::path(path).filename().string(), git_blob_hash_file(path));
}

void Manifest::output(const std::string& path) {
  outputs_.emplace_back(std::filesystem::path(path).filename().string(),
                        git_blob_hash_file(path));
}

void Manifest::metric(const std::string& key, double value) {
  metrics_.emplace_back(key, nlohmann::json(value).dump());
}

void Manifest::metric_text(const std::string& key, const std::string& value) {
  metrics_.emplace_back(key, nlohmann::json(value).dump());
}

std::string Manifest::to_json() const {
  nlohmann::ordered_json root;
  root["command"] = command_;
  auto section = [](const std::vector<std::pair<std::string, std::string>>& items) {
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (const auto& [k, v] : items) obj[k] = v;
    return obj;
  };
  root["config"] = section(config_);
  root["inputs"] = section(inputs_);
  root["outputs"] = section(outputs_);
  nlohmann::ordered_json metrics = nlohmann::ordered_json::object();
  for (const auto& [k, v] : metrics_) metrics[k] = nlohmann::ordered_json::parse(v);
  root["metrics"] = std::move(metrics);
  return root.dump(2) + "\n";
}

void Manifest::write(const std::string& path) const { write_file(path, to_json()); }

}  // namespace msqa
