// Copyright 2026 The streamlid Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// "LIDW" checkpoint container. Layout, all little-endian:
//
//   magic "LIDW" | version u16 | kind (u16 len + UTF-8)
//   meta count u16, then per entry: key (u16 len + UTF-8), value (u32 len + bytes)
//   tensor count u32, then per record: name (u16 len + UTF-8), rows u32,
//   cols u32, rows*cols float32 values
//
// Round-trips are bit-exact: floats are copied by bit pattern, never
// reformatted. The same container stores model weights, text-encoder
// vocabularies (as meta blobs) and per-utterance feature matrices.

#pragma once

#include <cstdio>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "streamlid/common.hpp"
#include "streamlid/tensor.hpp"

namespace streamlid {

struct Checkpoint {
  static constexpr uint16_t kVersion = 1;

  std::string kind;
  std::map<std::string, std::string> meta;              // small key/value blobs
  std::vector<std::pair<std::string, Tensor2f>> tensors;  // write order preserved

  void add(const std::string& name, Tensor2f t) { tensors.emplace_back(name, std::move(t)); }

  const Tensor2f& tensor(const std::string& name) const {
    for (const auto& [n, t] : tensors)
      if (n == name) return t;
    throw DataError("checkpoint: missing tensor '" + name + "'");
  }

  bool has_tensor(const std::string& name) const {
    for (const auto& [n, t] : tensors)
      if (n == name) return true;
    return false;
  }

  const std::string& meta_value(const std::string& key) const {
    auto it = meta.find(key);
    if (it == meta.end()) throw DataError("checkpoint: missing meta '" + key + "'");
    return it->second;
  }

  std::vector<uint8_t> serialize() const {
    std::vector<uint8_t> out;
    out.insert(out.end(), {'L', 'I', 'D', 'W'});
    put_u16le(out, kVersion);
    put_u16le(out, static_cast<uint16_t>(kind.size()));
    out.insert(out.end(), kind.begin(), kind.end());
    put_u16le(out, static_cast<uint16_t>(meta.size()));
    for (const auto& [k, v] : meta) {
      put_u16le(out, static_cast<uint16_t>(k.size()));
      out.insert(out.end(), k.begin(), k.end());
      put_u32le(out, static_cast<uint32_t>(v.size()));
      out.insert(out.end(), v.begin(), v.end());
    }
    put_u32le(out, static_cast<uint32_t>(tensors.size()));
    for (const auto& [name, t] : tensors) {
      put_u16le(out, static_cast<uint16_t>(name.size()));
      out.insert(out.end(), name.begin(), name.end());
      put_u32le(out, static_cast<uint32_t>(t.rows));
      put_u32le(out, static_cast<uint32_t>(t.cols));
      for (float v : t.data) put_f32le(out, v);
    }
    return out;
  }

  static Checkpoint deserialize(const std::vector<uint8_t>& bytes) {
    ByteReader r(bytes.data(), bytes.size());
    if (r.bytes(4) != "LIDW") throw DataError("checkpoint: bad magic, not a LIDW file");
    const uint16_t version = r.u16le();
    if (version != kVersion)
      throw DataError("checkpoint: unsupported format version " + std::to_string(version));
    Checkpoint ck;
    ck.kind = r.bytes(r.u16le());
    const uint16_t nmeta = r.u16le();
    for (uint16_t i = 0; i < nmeta; ++i) {
      std::string key = r.bytes(r.u16le());
      std::string val = r.bytes(r.u32le());
      ck.meta.emplace(std::move(key), std::move(val));
    }
    const uint32_t ntensors = r.u32le();
    for (uint32_t i = 0; i < ntensors; ++i) {
      std::string name = r.bytes(r.u16le());
      const uint32_t rows = r.u32le();
      const uint32_t cols = r.u32le();
      Tensor2f t(rows, cols);
      for (auto& v : t.data) v = r.f32le();
      ck.tensors.emplace_back(std::move(name), std::move(t));
    }
    if (!r.done()) throw DataError("checkpoint: trailing bytes after last tensor record");
    return ck;
  }

  void save(const std::string& path) const {
    const std::vector<uint8_t> bytes = serialize();
    FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw DataError("checkpoint: cannot open for writing: " + path);
    const size_t written = std::fwrite(bytes.data(), 1, bytes.size(), f);
    std::fclose(f);
    if (written != bytes.size()) throw DataError("checkpoint: short write: " + path);
  }

  static Checkpoint load(const std::string& path) { return deserialize(read_file_bytes(path)); }

  uint64_t content_hash() const {
    const std::vector<uint8_t> bytes = serialize();
    return fnv1a64(bytes.data(), bytes.size());
  }

  static std::vector<uint8_t> read_file_bytes(const std::string& path) {
    FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw DataError("cannot open file: " + path);
    std::fseek(f, 0, SEEK_END);
    const long len = std::ftell(f);
    std::fseek(f, 0, SEEK_SET);
    std::vector<uint8_t> bytes(static_cast<size_t>(len));
    const size_t got = std::fread(bytes.data(), 1, bytes.size(), f);
    std::fclose(f);
    if (got != bytes.size()) throw DataError("short read: " + path);
    return bytes;
  }

  static uint64_t file_hash(const std::string& path) {
    const std::vector<uint8_t> bytes = read_file_bytes(path);
    return fnv1a64(bytes.data(), bytes.size());
  }
};

}  // namespace streamlid
