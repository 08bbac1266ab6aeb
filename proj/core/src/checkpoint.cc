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

#include "msqa/checkpoint.h"

#include <bit>
#include <fstream>
#include <sstream>

#include "msqa/errors.h"

namespace msqa {
namespace {

constexpr char kMagic[8] = {'M', 'S', 'Q', 'A', 'C', 'K', 'P', 'T'};

template <typename T>
void put(std::string& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((value >> (8 * i)) & 0xff));
  }
}

void put_string(std::string& out, const std::string& s) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out += s;
}

class Reader {
 public:
  Reader(std::string_view bytes, std::size_t pos) : bytes_(bytes), pos_(pos) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      value |= static_cast<T>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    return value;
  }

  std::string get_string() {
    const auto n = get<std::uint32_t>();
    need(n);
    std::string s(bytes_.substr(pos_, n));
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw ParseError("checkpoint: truncated data");
  }
  std::string_view bytes_;
  std::size_t pos_;
};

}  // namespace

Checkpoint make_checkpoint(const ParameterStore& store, std::uint64_t seed,
                           std::map<std::string, std::string> metadata) {
  Checkpoint ck;
  ck.seed = seed;
  ck.metadata = std::move(metadata);
  for (const Parameter& p : store.parameters()) {
    ck.entries.push_back(
        {p.name, p.tensor.shape(), {p.tensor.data().begin(), p.tensor.data().end()}});
  }
  return ck;
}

std::string encode_checkpoint(const Checkpoint& ck) {
  std::string out(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, ck.version);
  put<std::uint64_t>(out, ck.seed);
  std::string meta;
  for (const auto& [key, value] : ck.metadata) {
    if (key.find_first_of("=\n") != std::string::npos ||
        value.find('\n') != std::string::npos) {
      throw InputError("checkpoint metadata may not contain '=' in keys or newlines");
    }
    meta += key + "=" + value + "\n";
  }
  put_string(out, meta);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(ck.entries.size()));
  for (const CheckpointEntry& e : ck.entries) {
    put_string(out, e.name);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(e.shape.size()));
    for (std::size_t d : e.shape) put<std::uint64_t>(out, d);
    for (double v : e.values) put<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  }
  return out;
}

Checkpoint decode_checkpoint(const std::string& bytes) {
  if (bytes.size() < sizeof(kMagic) || bytes.compare(0, sizeof(kMagic), kMagic, sizeof(kMagic)) != 0) {
    throw ParseError("checkpoint: bad magic");
  }
  Reader in(bytes, sizeof(kMagic));
  Checkpoint ck;
  ck.version = in.get<std::uint32_t>();
  if (ck.version != kCheckpointVersion) {
    throw ParseError("checkpoint: unsupported version " + std::to_string(ck.version));
  }
  ck.seed = in.get<std::uint64_t>();
  std::istringstream meta(in.get_string());
  for (std::string line; std::getline(meta, line);) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("checkpoint: bad metadata line");
    ck.metadata[line.substr(0, eq)] = line.substr(eq + 1);
  }
  const auto count = in.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    CheckpointEntry e;
    e.name = in.get_string();
    const auto rank = in.get<std::uint32_t>();
    for (std::uint32_t r = 0; r < rank; ++r) e.shape.push_back(in.get<std::uint64_t>());
    e.values.resize(shape_numel(e.shape));
    for (double& v : e.values) v = std::bit_cast<double>(in.get<std::uint64_t>());
    ck.entries.push_back(std::move(e));
  }
  if (!in.done()) throw ParseError("checkpoint: trailing bytes");
  return ck;
}

void write_checkpoint(const std::string& path, const Checkpoint& checkpoint) {
  const std::string bytes = encode_checkpoint(checkpoint);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open for writing: " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw InputError("write failed: " + path);
}

Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open checkpoint: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return decode_checkpoint(buf.str());
}

void load_parameters(const Checkpoint& checkpoint, ParameterStore& store) {
  if (checkpoint.entries.size() != store.parameters().size()) {
    throw StateError("checkpoint has " + std::to_string(checkpoint.entries.size()) +
                     " parameters, model expects " +
                     std::to_string(store.parameters().size()));
  }
  for (const CheckpointEntry& e : checkpoint.entries) {
    Parameter& p = store.get(e.name);
    if (p.tensor.shape() != e.shape) {
      throw DimensionError("checkpoint shape " + shape_string(e.shape) + " for " +
                           e.name + " does not match model shape " +
                           shape_string(p.tensor.shape()));
    }
    auto dst = p.tensor.mutable_data();
    std::copy(e.values.begin(), e.values.end(), dst.begin());
  }
}

std::size_t load_matching(const Checkpoint& checkpoint, ParameterStore& store) {
  std::size_t copied = 0;
  for (const CheckpointEntry& e : checkpoint.entries) {
    const Parameter* found = store.find(e.name);
    if (found == nullptr || found->tensor.shape() != e.shape) continue;
    Parameter& p = store.get(e.name);
    auto dst = p.tensor.mutable_data();
    std::copy(e.values.begin(), e.values.end(), dst.begin());
    ++copied;
  }
  return copied;
}

}  // namespace msqa
