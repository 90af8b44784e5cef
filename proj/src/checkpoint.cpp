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

#include "tfscil/checkpoint.hpp"

#include <stdexcept>

#include "tfscil/binary_io.hpp"

namespace tfscil {

namespace {

constexpr std::uint32_t kCheckpointMagic = 0x4B434654;  // "TFCK"
constexpr std::uint32_t kCheckpointVersion = 1;

}  // namespace

const StateDict& Checkpoint::net(const std::string& name) const {
  for (const auto& [n, sd] : nets) {
    if (n == name) return sd;
  }
  throw std::invalid_argument("checkpoint has no network '" + name + "'");
}

std::string encode_checkpoint(const Checkpoint& ck) {
  std::string buf;
  binio::put_u32(buf, kCheckpointMagic);
  binio::put_u32(buf, kCheckpointVersion);
  binio::put_u32(buf, static_cast<std::uint32_t>(ck.nets.size()));
  for (const auto& [name, sd] : ck.nets) {
    binio::put_str(buf, name);
    binio::put_u32(buf, static_cast<std::uint32_t>(sd.descriptor.size()));
    for (const auto& [k, v] : sd.descriptor) {
      binio::put_str(buf, k);
      binio::put_str(buf, v);
    }
    binio::put_u32(buf, static_cast<std::uint32_t>(sd.tensors.size()));
    for (const auto& [tname, t] : sd.tensors) {
      binio::put_str(buf, tname);
      binio::put_u32(buf, static_cast<std::uint32_t>(t.rank()));
      for (Index d : t.shape) binio::put_u64(buf, static_cast<std::uint64_t>(d));
      for (Index i = 0; i < t.size(); ++i) binio::put_f32(buf, t[i]);
    }
  }
  binio::put_u32(buf, static_cast<std::uint32_t>(ck.records.size()));
  for (const auto& r : ck.records) {
    if (r.mu.size() != r.mu_ucpc.size()) throw std::invalid_argument("checkpoint: record dimension mismatch");
    binio::put_i32(buf, r.id);
    binio::put_i32(buf, r.session);
    binio::put_f64(buf, r.uncertainty);
    binio::put_f64(buf, r.sigma_ucpc);
    binio::put_f64(buf, r.lambda);
    binio::put_u32(buf, static_cast<std::uint32_t>(r.mu.size()));
    for (Eigen::Index i = 0; i < r.mu.size(); ++i) binio::put_f64(buf, r.mu[i]);
    for (Eigen::Index i = 0; i < r.mu_ucpc.size(); ++i) binio::put_f64(buf, r.mu_ucpc[i]);
  }
  return buf;
}

Checkpoint decode_checkpoint(const std::string& bytes, const std::string& what) {
  binio::Reader in(bytes, what);
  if (in.u32() != kCheckpointMagic) throw std::runtime_error(what + ": bad magic");
  if (in.u32() != kCheckpointVersion) throw std::runtime_error(what + ": unsupported version");
  Checkpoint ck;
  const std::uint32_t n_nets = in.u32();
  for (std::uint32_t i = 0; i < n_nets; ++i) {
    std::string name = in.str();
    StateDict sd;
    const std::uint32_t n_desc = in.u32();
    for (std::uint32_t j = 0; j < n_desc; ++j) {
      std::string k = in.str();
      sd.descriptor[k] = in.str();
    }
    const std::uint32_t n_tensors = in.u32();
    for (std::uint32_t j = 0; j < n_tensors; ++j) {
      std::string tname = in.str();
      const std::uint32_t rank = in.u32();
      Shape shape;
      for (std::uint32_t r = 0; r < rank; ++r) shape.push_back(static_cast<Index>(in.u64()));
      Tensor<float> t(shape);
      if (static_cast<std::size_t>(t.size()) * 4 > in.remaining()) throw std::runtime_error(what + ": truncated");
      for (Index e = 0; e < t.size(); ++e) t[e] = in.f32();
      sd.tensors.emplace_back(std::move(tname), std::move(t));
    }
    ck.nets.emplace_back(std::move(name), std::move(sd));
  }
  const std::uint32_t n_records = in.u32();
  for (std::uint32_t i = 0; i < n_records; ++i) {
    ClassRecord r;
    r.id = in.i32();
    r.session = in.i32();
    r.uncertainty = in.f64();
    r.sigma_ucpc = in.f64();
    r.lambda = in.f64();
    const std::uint32_t d = in.u32();
    if (static_cast<std::size_t>(d) * 16 > in.remaining()) throw std::runtime_error(what + ": truncated");
    r.mu.resize(d);
    r.mu_ucpc.resize(d);
    for (std::uint32_t e = 0; e < d; ++e) r.mu[e] = in.f64();
    for (std::uint32_t e = 0; e < d; ++e) r.mu_ucpc[e] = in.f64();
    ck.records.push_back(std::move(r));
  }
  if (in.remaining() != 0) throw std::runtime_error(what + ": trailing bytes");
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck) {
  binio::write_file(path, encode_checkpoint(ck));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(binio::read_file(path), path.string());
}

}  // namespace tfscil
