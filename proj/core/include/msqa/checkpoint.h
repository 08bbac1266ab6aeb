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

// Checkpoint container. Layout (all integers little-endian):
//
//   "MSQACKPT"              8-byte magic
//   u32 version             currently 1
//   u64 seed                run seed
//   u32 n + n bytes         metadata, "key=value" lines (model config)
//   u32 count               number of parameters, then per parameter:
//     u32 n + n bytes       name
//     u32 rank, u64 dims[rank]
//     f64 values[prod(dims)] (IEEE-754 binary64, little-endian)

#ifndef MSQA_CHECKPOINT_H_
#define MSQA_CHECKPOINT_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "msqa/optim.h"
#include "msqa/tensor.h"

namespace msqa {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointEntry {
  std::string name;
  Shape shape;
  std::vector<double> values;
};

struct Checkpoint {
  std::uint32_t version = kCheckpointVersion;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> metadata;
  std::vector<CheckpointEntry> entries;  // in store order
};

Checkpoint make_checkpoint(const ParameterStore& store, std::uint64_t seed,
                           std::map<std::string, std::string> metadata = {});
std::string encode_checkpoint(const Checkpoint& checkpoint);
Checkpoint decode_checkpoint(const std::string& bytes);

void write_checkpoint(const std::string& path, const Checkpoint& checkpoint);
Checkpoint read_checkpoint(const std::string& path);

// Copies values into an existing store; names and shapes must match exactly.
void load_parameters(const Checkpoint& checkpoint, ParameterStore& store);

// Copies only the entries whose name and shape both match a parameter of the
// store (warm starts across model kinds). Returns how many were copied.
std::size_t load_matching(const Checkpoint& checkpoint, ParameterStore& store);

}  // namespace msqa

#endif  // MSQA_CHECKPOINT_H_
