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

#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include "streamlid/common.hpp"

namespace streamlid {

struct WavAudio {
  uint32_t sample_rate = 0;
  std::vector<int16_t> samples;  // mono
};

// Minimal RIFF/WAVE reader; accepts 16-bit PCM mono only.
inline WavAudio wav_read(const std::string& path) {
  std::vector<uint8_t> bytes;
  {
    FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw DataError("wav: cannot open " + path);
    std::fseek(f, 0, SEEK_END);
    const long len = std::ftell(f);
    std::fseek(f, 0, SEEK_SET);
    bytes.resize(static_cast<size_t>(len));
    const size_t got = std::fread(bytes.data(), 1, bytes.size(), f);
    std::fclose(f);
    if (got != bytes.size()) throw DataError("wav: short read " + path);
  }
  ByteReader r(bytes.data(), bytes.size());
  if (r.bytes(4) != "RIFF") throw DataError("wav: not a RIFF file: " + path);
  r.u32le();  // riff size
  if (r.bytes(4) != "WAVE") throw DataError("wav: not a WAVE file: " + path);

  WavAudio audio;
  bool have_fmt = false;
  while (r.remaining() >= 8) {
    const std::string id = r.bytes(4);
    const uint32_t size = r.u32le();
    if (id == "fmt ") {
      if (size < 16) throw DataError("wav: truncated fmt chunk");
      const uint16_t format = r.u16le();
      const uint16_t channels = r.u16le();
      audio.sample_rate = r.u32le();
      r.u32le();  // byte rate
      r.u16le();  // block align
      const uint16_t bits = r.u16le();
      if (size > 16) r.bytes(size - 16);
      if (format != 1) throw DataError("wav: only PCM supported");
      if (channels != 1) throw DataError("wav: only mono supported");
      if (bits != 16) throw DataError("wav: only 16-bit samples supported");
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw DataError("wav: data chunk before fmt chunk");
      const size_t n = size / 2;
      audio.samples.resize(n);
      for (size_t i = 0; i < n; ++i)
        audio.samples[i] = static_cast<int16_t>(r.u16le());
      if (size % 2) r.u8();  // pad byte
    } else {
      r.bytes(size + (size % 2));  // skip unknown chunk
    }
  }
  if (!have_fmt || audio.samples.empty()) throw DataError("wav: missing fmt or data chunk: " + path);
  return audio;
}

inline void wav_write(const std::string& path, const WavAudio& audio) {
  std::vector<uint8_t> out;
  auto put_tag = [&](const char* s) { out.insert(out.end(), s, s + 4); };
  const uint32_t data_size = static_cast<uint32_t>(audio.samples.size() * 2);
  put_tag("RIFF");
  put_u32le(out, 36 + data_size);
  put_tag("WAVE");
  put_tag("fmt ");
  put_u32le(out, 16);
  put_u16le(out, 1);  // PCM
  put_u16le(out, 1);  // mono
  put_u32le(out, audio.sample_rate);
  put_u32le(out, audio.sample_rate * 2);
  put_u16le(out, 2);
  put_u16le(out, 16);
  put_tag("data");
  put_u32le(out, data_size);
  for (int16_t s : audio.samples) put_u16le(out, static_cast<uint16_t>(s));

  FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw DataError("wav: cannot open for writing: " + path);
  const size_t written = std::fwrite(out.data(), 1, out.size(), f);
  std::fclose(f);
  if (written != out.size()) throw DataError("wav: short write: " + path);
}

}  // namespace streamlid
