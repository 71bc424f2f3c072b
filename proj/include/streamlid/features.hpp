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
// Log mel-filterbank energies (LFBE) from 16-bit PCM: Hann window, radix-2
// magnitude spectrum, HTK-style mel triangles, log with a 1e-10 floor.

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "streamlid/checkpoint.hpp"
#include "streamlid/common.hpp"
#include "streamlid/tensor.hpp"

namespace streamlid {

struct FeatureSequence {
  Tensor2f frames;  // n_frames x n_mels
  int window_ms = 25;
  int hop_ms = 10;
  int64_t source_duration_ms = 0;

  size_t frame_count() const { return frames.rows; }

  // A frame's output is considered available once its window has fully
  // elapsed; the arbiter keys readiness off this.
  int64_t frame_end_ms(size_t index) const {
    return static_cast<int64_t>(index) * hop_ms + window_ms;
  }

  // Number of frames whose window ends at or before now_ms.
  size_t frames_available_at(int64_t now_ms) const {
    if (now_ms < window_ms) return 0;
    const size_t by_time = static_cast<size_t>((now_ms - window_ms) / hop_ms) + 1;
    return std::min(by_time, frames.rows);
  }
};

struct FeatureConfig {
  int window_ms = 25;
  int hop_ms = 10;
  int n_mels = 64;
  // Reads "overlap" literally: hop = window - hop_param. Off by default, the
  // conventional 10 ms hop is almost always what is meant.
  bool literal_overlap = false;

  int effective_hop_ms() const { return literal_overlap ? window_ms - hop_ms : hop_ms; }
};

inline size_t lfbe_frame_count(size_t n_samples, size_t window_samples, size_t hop_samples) {
  if (n_samples < window_samples) return 0;
  return (n_samples - window_samples) / hop_samples + 1;
}

namespace detail {

// In-place iterative radix-2 FFT, n a power of two.
inline void fft_radix2(std::vector<std::complex<double>>& a) {
  const size_t n = a.size();
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * M_PI / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

inline double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

}  // namespace detail

// Triangular mel filterbank over FFT bins [0, n_fft/2]. Peaks are unit
// height, so adjacent filters sum to one between their centers.
inline Tensor2d mel_filterbank(int n_mels, size_t n_fft, double sample_rate) {
  const size_t n_bins = n_fft / 2 + 1;
  const double mel_lo = detail::hz_to_mel(0.0);
  const double mel_hi = detail::hz_to_mel(sample_rate / 2.0);
  std::vector<double> centers_hz(static_cast<size_t>(n_mels) + 2);
  for (size_t i = 0; i < centers_hz.size(); ++i) {
    const double mel = mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) / (n_mels + 1);
    centers_hz[i] = detail::mel_to_hz(mel);
  }
  Tensor2d bank(static_cast<size_t>(n_mels), n_bins);
  for (int m = 0; m < n_mels; ++m) {
    const double left = centers_hz[static_cast<size_t>(m)];
    const double center = centers_hz[static_cast<size_t>(m) + 1];
    const double right = centers_hz[static_cast<size_t>(m) + 2];
    for (size_t b = 0; b < n_bins; ++b) {
      const double hz = static_cast<double>(b) * sample_rate / static_cast<double>(n_fft);
      double w = 0.0;
      if (hz > left && hz < center)
        w = (hz - left) / (center - left);
      else if (hz >= center && hz < right)
        w = (right - hz) / (right - center);
      bank.at(static_cast<size_t>(m), b) = w;
    }
  }
  return bank;
}

inline FeatureSequence compute_lfbe(const std::vector<int16_t>& pcm, uint32_t sample_rate,
                                    const FeatureConfig& cfg = {}) {
  if (sample_rate != 8000 && sample_rate != 16000)
    throw DataError("compute_lfbe: unsupported sample rate " + std::to_string(sample_rate));
  const size_t window = static_cast<size_t>(cfg.window_ms) * sample_rate / 1000;
  const size_t hop = static_cast<size_t>(cfg.effective_hop_ms()) * sample_rate / 1000;
  if (pcm.size() < window)
    throw DataError("compute_lfbe: signal of " + std::to_string(pcm.size()) +
                    " samples is shorter than one " + std::to_string(window) + "-sample window");

  constexpr size_t kFftSize = 512;
  constexpr double kLogFloor = 1e-10;
  static_assert(kFftSize >= 400, "window must fit in the FFT size");

  const size_t n_frames = lfbe_frame_count(pcm.size(), window, hop);
  const Tensor2d bank = mel_filterbank(cfg.n_mels, kFftSize, sample_rate);

  std::vector<double> hann(window);
  for (size_t n = 0; n < window; ++n)
    hann[n] = 0.5 - 0.5 * std::cos(2.0 * M_PI * static_cast<double>(n) / static_cast<double>(window));

  FeatureSequence seq;
  seq.window_ms = cfg.window_ms;
  seq.hop_ms = cfg.effective_hop_ms();
  seq.source_duration_ms = static_cast<int64_t>(pcm.size()) * 1000 / sample_rate;
  seq.frames = Tensor2f(n_frames, static_cast<size_t>(cfg.n_mels));

  std::vector<std::complex<double>> buf(kFftSize);
  std::vector<double> power(kFftSize / 2 + 1);
  for (size_t fr = 0; fr < n_frames; ++fr) {
    const size_t off = fr * hop;
    for (size_t n = 0; n < kFftSize; ++n) {
      const double s = n < window ? static_cast<double>(pcm[off + n]) / 32768.0 * hann[n] : 0.0;
      buf[n] = {s, 0.0};
    }
    detail::fft_radix2(buf);
    for (size_t b = 0; b < power.size(); ++b) power[b] = std::norm(buf[b]);
    for (int m = 0; m < cfg.n_mels; ++m) {
      double e = 0.0;
      const double* w = bank.row(static_cast<size_t>(m));
      for (size_t b = 0; b < power.size(); ++b) e += w[b] * power[b];
      seq.frames.at(fr, static_cast<size_t>(m)) = static_cast<float>(std::log(e + kLogFloor));
    }
  }
  require_finite(seq.frames, "compute_lfbe");
  return seq;
}

// Fixed-length chunks at the given stride; a trailing short remainder is
// dropped.
inline std::vector<Tensor2f> chunk_sequence(const Tensor2f& frames, size_t chunk_len = 36,
                                            size_t hop = 18) {
  if (chunk_len < 1 || hop < 1) throw UsageError("chunk_sequence: chunk_len and hop must be >= 1");
  std::vector<Tensor2f> chunks;
  for (size_t start = 0; start + chunk_len <= frames.rows; start += hop) {
    Tensor2f c(chunk_len, frames.cols);
    std::copy(frames.row(start), frames.row(start) + chunk_len * frames.cols, c.data.begin());
    chunks.push_back(std::move(c));
  }
  return chunks;
}

// Feature files reuse the LIDW container with a single "lfbe" tensor.
inline void save_features(const std::string& path, const FeatureSequence& seq) {
  Checkpoint ck;
  ck.kind = "features";
  ck.meta["window_ms"] = std::to_string(seq.window_ms);
  ck.meta["hop_ms"] = std::to_string(seq.hop_ms);
  ck.meta["source_duration_ms"] = std::to_string(seq.source_duration_ms);
  ck.add("lfbe", seq.frames);
  ck.save(path);
}

inline FeatureSequence load_features(const std::string& path) {
  const Checkpoint ck = Checkpoint::load(path);
  if (ck.kind != "features") throw DataError("not a feature file (kind '" + ck.kind + "'): " + path);
  FeatureSequence seq;
  seq.window_ms = std::stoi(ck.meta_value("window_ms"));
  seq.hop_ms = std::stoi(ck.meta_value("hop_ms"));
  seq.source_duration_ms = std::stoll(ck.meta_value("source_duration_ms"));
  seq.frames = ck.tensor("lfbe");
  return seq;
}

}  // namespace streamlid
