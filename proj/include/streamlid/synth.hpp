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
// Synthetic bilingual corpus generator. Each language is a small hidden-state
// process: a Markov chain over pseudo-phone states, each emitting a spectral
// bump at a state-specific mel bin, plus a character process that renders
// content as consonant-vowel structured words in a language-specific
// alphabet. Two confusability knobs drive the interesting test subsets:
//
//   accent_shift  blends the spectral bump positions toward the other
//                 language while keeping the gold language's state dynamics
//                 and text (an accented speaker: sounds like B, speaks A).
//   code_switch_prob  mixes other-language words into the content; both
//                 decoders then transcribe the same mixed string, so their
//                 hypotheses are identical and the text signal is ambiguous.
//
// With both knobs at zero, the wrong-language decoder emits unigram "garble"
// in its own alphabet, statistically distinct from genuine text.

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "streamlid/common.hpp"
#include "streamlid/features.hpp"
#include "streamlid/manifest.hpp"
#include "streamlid/rng.hpp"

namespace streamlid {

struct SyntheticLanguageProfile {
  std::string language;

  // Acoustic process: one spectral bump per state, Markov transitions.
  std::vector<double> state_centroids;           // mel bin per state
  std::vector<std::vector<double>> transition;   // row-stochastic, K x K
  double bump_width_bins = 2.5;
  double bump_gain = 4.0;
  double base_level = -2.0;
  double noise_sigma = 0.5;
  double speaker_jitter_bins = 0.8;  // per-utterance centroid offset

  // Character process. Units are UTF-8 strings so non-Latin alphabets work.
  std::vector<std::string> consonants;
  std::vector<std::string> vowels;

  double accent_shift = 0.0;
  double code_switch_prob = 0.0;

  void validate() const {
    if (consonants.empty() || vowels.empty())
      throw UsageError("profile " + language + ": alphabet must be nonempty");
    if (state_centroids.empty() || transition.size() != state_centroids.size())
      throw UsageError("profile " + language + ": transition matrix must be K x K");
    for (const auto& row : transition) {
      if (row.size() != state_centroids.size())
        throw UsageError("profile " + language + ": transition matrix must be K x K");
      double sum = 0.0;
      for (double p : row) sum += p;
      if (std::abs(sum - 1.0) > 1e-9)
        throw UsageError("profile " + language + ": transition rows must sum to 1");
    }
    if (accent_shift < 0.0 || accent_shift > 1.0 || code_switch_prob < 0.0 || code_switch_prob > 1.0)
      throw UsageError("profile " + language + ": confusability knobs must be in [0,1]");
  }
};

struct SynthUtterance {
  FeatureSequence features;
  std::string gold_language;
  std::map<std::string, HypothesisTimeline> timelines;
};

namespace detail {

inline std::vector<std::vector<double>> make_transition(size_t k, double self_prob) {
  std::vector<std::vector<double>> t(k, std::vector<double>(k, (1.0 - self_prob) / double(k - 1)));
  for (size_t i = 0; i < k; ++i) t[i][i] = self_prob;
  return t;
}

inline size_t sample_row(const std::vector<double>& row, Rng& rng) {
  double u = rng.uniform();
  double acc = 0.0;
  for (size_t i = 0; i < row.size(); ++i) {
    acc += row[i];
    if (u < acc) return i;
  }
  return row.size() - 1;
}

// Genuine content word: 2-4 consonant+vowel syllables with a random-walk
// consonant choice, i.e. a crude character bigram process.
inline std::string genuine_word(const SyntheticLanguageProfile& p, Rng& rng) {
  const size_t n_syll = 2 + rng.below(3);
  std::string word;
  size_t ci = rng.below(p.consonants.size());
  for (size_t s = 0; s < n_syll; ++s) {
    word += p.consonants[ci];
    word += p.vowels[rng.below(p.vowels.size())];
    ci = (ci + p.consonants.size() + rng.below(5) - 2) % p.consonants.size();
  }
  return word;
}

// Wrong-decoder rendering: uniform draws over the decoder's whole alphabet,
// no syllable structure.
inline std::string garble_word(const SyntheticLanguageProfile& p, Rng& rng) {
  const size_t len = 2 + rng.below(6);
  std::string word;
  for (size_t i = 0; i < len; ++i) {
    const size_t idx = rng.below(p.consonants.size() + p.vowels.size());
    word += idx < p.consonants.size() ? p.consonants[idx] : p.vowels[idx - p.consonants.size()];
  }
  return word;
}

inline std::string join_words(const std::vector<std::string>& words, size_t count) {
  std::string out;
  for (size_t i = 0; i < count && i < words.size(); ++i) {
    if (i) out += ' ';
    out += words[i];
  }
  return out;
}

// Cumulative reveal of `words` over [first emission, duration]. Emissions are
// strictly increasing in time and end exactly at the utterance end with the
// full text. Mid-stream entries occasionally rewrite their last word, which
// the next emission corrects, mimicking decoder revisions.
inline HypothesisTimeline reveal_timeline(const std::vector<std::string>& words, int64_t duration_ms,
                                          const SyntheticLanguageProfile& emitter, Rng& rng) {
  std::vector<int64_t> times;
  int64_t t = 380 + static_cast<int64_t>(rng.below(240));
  while (t < duration_ms) {
    times.push_back(t);
    t += 260 + static_cast<int64_t>(rng.below(200));
  }
  if (times.empty() || times.back() != duration_ms) times.push_back(duration_ms);

  HypothesisTimeline tl;
  for (size_t e = 0; e < times.size(); ++e) {
    const bool last = e + 1 == times.size();
    const double frac = static_cast<double>(times[e]) / static_cast<double>(duration_ms);
    size_t shown = last ? words.size()
                        : std::max<size_t>(1, static_cast<size_t>(frac * double(words.size()) + 0.5));
    shown = std::min(shown, words.size());
    std::string text = join_words(words, shown);
    if (!last && rng.bernoulli(0.15)) {
      // transient misrecognition of the most recent word
      std::vector<std::string> copy(words.begin(), words.begin() + static_cast<long>(shown));
      copy.back() = garble_word(emitter, rng);
      text = join_words(copy, shown);
    }
    tl.push_back({times[e], std::move(text)});
  }
  return tl;
}

}  // namespace detail

// Draws one utterance. `gold` controls dynamics, content and label; `other`
// supplies the competing decoder's alphabet and the accent-shift target.
// Deterministic given the rng state.
inline SynthUtterance synth_utterance(const SyntheticLanguageProfile& gold,
                                      const SyntheticLanguageProfile& other, int64_t duration_ms,
                                      Rng& rng, const FeatureConfig& fcfg = {}) {
  gold.validate();
  other.validate();
  const int hop = fcfg.effective_hop_ms();
  if (duration_ms < 3 * hop)
    throw UsageError("synth_utterance: duration must be at least 3 hops");
  if (gold.state_centroids.size() != other.state_centroids.size())
    throw UsageError("synth_utterance: profiles must have the same state count");

  SynthUtterance utt;
  utt.gold_language = gold.language;

  // Acoustic frames: gold dynamics, centroids blended toward `other` by the
  // accent shift.
  const size_t n_frames =
      static_cast<size_t>((duration_ms - fcfg.window_ms) / hop) + 1;
  utt.features.window_ms = fcfg.window_ms;
  utt.features.hop_ms = hop;
  utt.features.source_duration_ms = duration_ms;
  utt.features.frames = Tensor2f(n_frames, static_cast<size_t>(fcfg.n_mels));

  const double jitter = rng.uniform(-gold.speaker_jitter_bins, gold.speaker_jitter_bins);
  size_t state = rng.below(gold.state_centroids.size());
  const double alpha = gold.accent_shift;
  for (size_t fr = 0; fr < n_frames; ++fr) {
    const double centroid =
        (1.0 - alpha) * gold.state_centroids[state] + alpha * other.state_centroids[state] + jitter;
    for (int b = 0; b < fcfg.n_mels; ++b) {
      const double d = (static_cast<double>(b) - centroid) / gold.bump_width_bins;
      const double v =
          gold.base_level + gold.bump_gain * std::exp(-0.5 * d * d) + gold.noise_sigma * rng.gaussian();
      utt.features.frames.at(fr, static_cast<size_t>(b)) = static_cast<float>(v);
    }
    state = detail::sample_row(gold.transition[state], rng);
  }

  // Content: one word per ~450 ms, each possibly code-switched.
  const size_t n_words = std::max<size_t>(2, static_cast<size_t>(duration_ms / 450));
  std::vector<std::string> content;
  for (size_t w = 0; w < n_words; ++w) {
    const bool switched = rng.bernoulli(gold.code_switch_prob);
    content.push_back(switched ? detail::genuine_word(other, rng) : detail::genuine_word(gold, rng));
  }

  if (gold.code_switch_prob > 0.0) {
    // Code-switched content: both decoders settle on the same string.
    utt.timelines[gold.language] = detail::reveal_timeline(content, duration_ms, gold, rng);
    utt.timelines[other.language] = detail::reveal_timeline(content, duration_ms, other, rng);
  } else {
    utt.timelines[gold.language] = detail::reveal_timeline(content, duration_ms, gold, rng);
    std::vector<std::string> garble;
    const size_t n_garble = std::max<size_t>(1, n_words * 3 / 5);
    for (size_t w = 0; w < n_garble; ++w) garble.push_back(detail::garble_word(other, rng));
    utt.timelines[other.language] = detail::reveal_timeline(garble, duration_ms, other, rng);
  }
  return utt;
}

// Stock desk-scale language pair: "alpha" is Latin-alphabet with fast state
// switching, "beta" is Devanagari-alphabet with long state dwell.
inline std::pair<SyntheticLanguageProfile, SyntheticLanguageProfile> default_profile_pair() {
  SyntheticLanguageProfile a;
  a.language = "alpha";
  a.state_centroids = {8.0, 22.0, 36.0, 50.0};
  a.transition = detail::make_transition(4, 0.55);
  a.consonants = {"b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z"};
  a.vowels = {"a", "e", "i", "o", "u"};

  SyntheticLanguageProfile b;
  b.language = "beta";
  b.state_centroids = {15.0, 29.0, 43.0, 57.0};
  b.transition = detail::make_transition(4, 0.92);
  b.consonants = {"क", "ख", "ग", "च", "ज", "ट", "ड", "त", "द", "न", "प", "ब", "म", "र"};
  b.vowels = {"ा", "ि", "ु", "े", "ो"};
  return {a, b};
}

// One named synthetic set: subset fractions are exact (index-partitioned,
// not sampled), so corpus composition is identical across seeds.
struct SynthSetConfig {
  std::string name;
  size_t per_language = 100;
  int64_t duration_ms_min = 1500;
  int64_t duration_ms_max = 3000;
  double clean_fraction = 1.0;
  double accent_fraction = 0.0;
  double confusable_fraction = 0.0;
  double accent_shift = 1.0;      // applied to the accent subset
  double code_switch_prob = 0.4;  // applied to the confusable subset

  void validate() const {
    if (per_language == 0) throw ConfigError("synth set " + name + ": per_language must be > 0");
    if (duration_ms_min < 1 || duration_ms_max < duration_ms_min)
      throw ConfigError("synth set " + name + ": bad duration range");
    const double total = clean_fraction + accent_fraction + confusable_fraction;
    if (std::abs(total - 1.0) > 1e-9)
      throw ConfigError("synth set " + name + ": subset fractions must sum to 1");
  }
};

// Generates the set; writes one feature file per utterance under
// feats_dir (unless feats_dir is empty, for text-only sets).
inline std::vector<ManifestRecord> synth_corpus_set(
    const SynthSetConfig& cfg, const SyntheticLanguageProfile& lang_a,
    const SyntheticLanguageProfile& lang_b, uint64_t seed, const std::string& feats_dir,
    const FeatureConfig& fcfg = {}) {
  cfg.validate();
  std::vector<ManifestRecord> records;
  const size_t n_clean = static_cast<size_t>(cfg.clean_fraction * double(cfg.per_language) + 0.5);
  const size_t n_accent = static_cast<size_t>(cfg.accent_fraction * double(cfg.per_language) + 0.5);
  for (const auto* gold : {&lang_a, &lang_b}) {
    const auto* other = gold == &lang_a ? &lang_b : &lang_a;
    for (size_t i = 0; i < cfg.per_language; ++i) {
      const std::string subset = i < n_clean ? "clean" : (i < n_clean + n_accent ? "accent" : "confusable");
      SyntheticLanguageProfile g = *gold;
      if (subset == "accent") g.accent_shift = cfg.accent_shift;
      if (subset == "confusable") g.code_switch_prob = cfg.code_switch_prob;

      char idbuf[128];
      std::snprintf(idbuf, sizeof idbuf, "%s-%s-%04zu", cfg.name.c_str(), gold->language.c_str(), i);
      const std::string utt_id = idbuf;
      Rng rng = Rng::derive(seed, cfg.name + "/" + utt_id);
      const int64_t duration =
          cfg.duration_ms_min + static_cast<int64_t>(rng.below(
                                    static_cast<uint64_t>(cfg.duration_ms_max - cfg.duration_ms_min + 1)));
      SynthUtterance utt = synth_utterance(g, *other, duration, rng, fcfg);

      ManifestRecord rec;
      rec.id = utt_id;
      rec.language = gold->language;
      rec.duration_ms = duration;
      rec.subset = subset;
      rec.timelines = std::move(utt.timelines);
      if (!feats_dir.empty()) {
        rec.feature_path = feats_dir + "/" + utt_id + ".lidw";
        save_features(rec.feature_path, utt.features);
      }
      records.push_back(std::move(rec));
    }
  }
  return records;
}

}  // namespace streamlid
