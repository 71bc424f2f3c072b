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
// Dataset manifest: one JSON object per line, one line per utterance.
// Hypothesis timelines are arrays of [time_ms, cumulative 1-best text].

#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "streamlid/common.hpp"

namespace streamlid {

using json = nlohmann::json;

struct TimelineEntry {
  int64_t time_ms = 0;
  std::string text;
};

using HypothesisTimeline = std::vector<TimelineEntry>;

struct TeacherMeta {
  std::vector<double> posterior;
  double threshold = 0.0;
};

struct ManifestRecord {
  std::string id;
  std::string language;     // gold label
  int64_t duration_ms = 0;
  std::string feature_path;  // LIDW feature file; may be empty for text-only
  std::string audio_path;    // WAV source; may be empty for synthetic data
  std::string subset;        // optional tag: clean / accent / confusable
  std::map<std::string, HypothesisTimeline> timelines;
  std::optional<TeacherMeta> teacher;

  const HypothesisTimeline& timeline(const std::string& lang) const {
    auto it = timelines.find(lang);
    if (it == timelines.end())
      throw DataError("utterance " + id + ": no hypothesis timeline for language '" + lang + "'");
    return it->second;
  }

  // Final 1-best for a language: text of the last timeline entry.
  const std::string& final_hypothesis(const std::string& lang) const {
    const HypothesisTimeline& tl = timeline(lang);
    if (tl.empty()) throw DataError("utterance " + id + ": empty timeline for '" + lang + "'");
    return tl.back().text;
  }
};

inline json record_to_json(const ManifestRecord& rec) {
  json j;
  j["id"] = rec.id;
  j["lang"] = rec.language;
  j["duration_ms"] = rec.duration_ms;
  if (!rec.feature_path.empty()) j["features"] = rec.feature_path;
  if (!rec.audio_path.empty()) j["audio"] = rec.audio_path;
  if (!rec.subset.empty()) j["subset"] = rec.subset;
  json tls = json::object();
  for (const auto& [lang, tl] : rec.timelines) {
    json arr = json::array();
    for (const auto& e : tl) arr.push_back(json::array({e.time_ms, e.text}));
    tls[lang] = std::move(arr);
  }
  j["timelines"] = std::move(tls);
  if (rec.teacher) {
    j["teacher"] = {{"posterior", rec.teacher->posterior}, {"threshold", rec.teacher->threshold}};
  }
  return j;
}

inline ManifestRecord record_from_json(const json& j, size_t line_no) {
  auto fail = [line_no](const std::string& msg) -> DataError {
    return DataError("manifest line " + std::to_string(line_no) + ": " + msg);
  };
  if (!j.is_object()) throw fail("not a JSON object");
  ManifestRecord rec;
  try {
    rec.id = j.at("id").get<std::string>();
    rec.language = j.at("lang").get<std::string>();
    rec.duration_ms = j.at("duration_ms").get<int64_t>();
    if (j.contains("features")) rec.feature_path = j["features"].get<std::string>();
    if (j.contains("audio")) rec.audio_path = j["audio"].get<std::string>();
    if (j.contains("subset")) rec.subset = j["subset"].get<std::string>();
    for (const auto& [lang, arr] : j.at("timelines").items()) {
      HypothesisTimeline tl;
      int64_t prev = -1;
      for (const auto& e : arr) {
        TimelineEntry entry{e.at(0).get<int64_t>(), e.at(1).get<std::string>()};
        if (entry.time_ms < prev)
          throw fail("timeline for '" + lang + "' has decreasing timestamps (" +
                     std::to_string(entry.time_ms) + " after " + std::to_string(prev) + ")");
        prev = entry.time_ms;
        tl.push_back(std::move(entry));
      }
      rec.timelines.emplace(lang, std::move(tl));
    }
    if (j.contains("teacher")) {
      TeacherMeta tm;
      tm.posterior = j["teacher"].at("posterior").get<std::vector<double>>();
      tm.threshold = j["teacher"].at("threshold").get<double>();
      rec.teacher = std::move(tm);
    }
  } catch (const json::exception& e) {
    throw fail(e.what());
  }
  return rec;
}

inline void write_manifest(const std::string& path, const std::vector<ManifestRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("manifest: cannot open for writing: " + path);
  for (const auto& rec : records) out << record_to_json(rec).dump() << "\n";
  if (!out) throw DataError("manifest: write failed: " + path);
}

inline std::vector<ManifestRecord> read_manifest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("manifest: cannot open: " + path);
  std::vector<ManifestRecord> records;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw DataError("manifest line " + std::to_string(line_no) + ": " + e.what());
    }
    records.push_back(record_from_json(j, line_no));
  }
  return records;
}

}  // namespace streamlid
