// Copyright 2026 The tfscil Authors. All Rights Reserved.
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

// Checkpoint archive, little-endian:
//
//   u32 magic, u32 version
//   u32 net count; per net: name, descriptor (u32 count, key/value
//       strings), u32 tensor count; per tensor: name, u32 rank, u64 dims,
//       row-major float32 values
//   u32 record count; per record: i32 id, i32 session, f64 U, f64 sigma,
//       f64 lambda, u32 dim, f64 mu[dim], f64 mu_ucpc[dim]
//
// Strings are a u32 length followed by bytes. Writes are atomic.

#ifndef TFSCIL_CHECKPOINT_HPP_
#define TFSCIL_CHECKPOINT_HPP_

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "tfscil/layers.hpp"
#include "tfscil/ucpc.hpp"

namespace tfscil {

struct Checkpoint {
  std::vector<std::pair<std::string, StateDict>> nets;
  std::vector<ClassRecord> records;

  const StateDict& net(const std::string& name) const;
};

std::string encode_checkpoint(const Checkpoint& ck);
Checkpoint decode_checkpoint(const std::string& bytes, const std::string& what = "checkpoint");

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace tfscil

#endif  // TFSCIL_CHECKPOINT_HPP_
