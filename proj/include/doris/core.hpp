/*
 * Copyright 2026 The Doris Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Domain types shared by every pipeline stage, plus the JSONL dataset reader.

#pragma once

#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "doris/error.hpp"
#include "doris/util.hpp"
#include "json.hpp"

namespace doris {

using Vector = std::vector<double>;

struct Post {
  std::string post_id;
  std::string text;
  Timestamp timestamp;

  bool operator==(const Post&) const = default;
};

// Time order with post_id as the tie-break; the total order every stage
// relies on.
inline bool post_before(const Post& a, const Post& b) {
  if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
  return a.post_id < b.post_id;
}

struct UserRecord {
  std::string user_id;
  std::vector<Post> posts;
  std::optional<int> label;

  bool operator==(const UserRecord&) const = default;
};

// Output of a text encoder. Encoders guarantee unit L2 norm.
struct Embedding {
  Vector values;

  std::size_t dim() const { return values.size(); }
  bool operator==(const Embedding&) const = default;
};

inline double l2_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// DSM-5 criteria in table order. The index is the SymptomVector position.
enum class Criterion : int { A = 0, B, C, D, E, F, G, H, I };

inline constexpr int kNumCriteria = 9;

inline constexpr std::array<std::string_view, kNumCriteria> kCriterionNames = {
    "Depressed mood",
    "Loss of interest/pleasure",
    "Weight loss or gain",
    "Insomnia or hypersomnia",
    "Psychomotor agitation or retardation",
    "Fatigue",
    "Inappropriate guilt",
    "Decreased concentration",
    "Thoughts of suicide",
};

inline char criterion_letter(int index) { return static_cast<char>('A' + index); }

struct SymptomVector {
  std::array<std::uint8_t, kNumCriteria> flags{};

  bool any() const {
    for (auto f : flags)
      if (f) return true;
    return false;
  }
  std::string letters() const {
    std::string out;
    for (int i = 0; i < kNumCriteria; ++i)
      if (flags[i]) out.push_back(criterion_letter(i));
    return out;
  }
  bool operator==(const SymptomVector&) const = default;
};

inline constexpr double kDefaultDecisionThreshold = 0.5;

struct Prediction {
  double raw_score = 0.0;
  double probability = 0.0;
  int label = 0;  // 1 iff probability >= threshold
};

inline Prediction make_prediction(double raw_score, double probability,
                                  double threshold = kDefaultDecisionThreshold) {
  return {raw_score, probability, probability >= threshold ? 1 : 0};
}

// ---------------------------------------------------------------------------
// Dataset I/O.

inline constexpr int kDatasetSchemaV1 = 1;

struct Dataset {
  std::vector<UserRecord> records;
  std::size_t dropped_empty_posts = 0;
  std::size_t dropped_empty_users = 0;
};

inline nlohmann::json post_to_json(const Post& p) {
  return {{"post_id", p.post_id},
          {"text", p.text},
          {"timestamp", format_timestamp(p.timestamp)}};
}

inline nlohmann::json user_to_json(const UserRecord& u) {
  nlohmann::json posts = nlohmann::json::array();
  for (const auto& p : u.posts) posts.push_back(post_to_json(p));
  nlohmann::json j;
  j["user_id"] = u.user_id;
  j["label"] = u.label ? nlohmann::json(*u.label) : nlohmann::json(nullptr);
  j["posts"] = std::move(posts);
  return j;
}

namespace detail {

inline std::string line_error(std::size_t line, std::string_view msg) {
  return "line " + std::to_string(line) + ": " + std::string(msg);
}

}  // namespace detail

// Parses one JSONL dataset. Posts come back sorted by (timestamp, post_id).
// Whitespace-only posts are dropped and counted; users left with no posts are
// dropped and counted.
inline Dataset parse_dataset(std::string_view content,
                             int schema = kDatasetSchemaV1) {
  if (schema != kDatasetSchemaV1) {
    throw ValidationError("unsupported dataset schema version " +
                          std::to_string(schema));
  }
  Dataset ds;
  std::unordered_map<std::string, std::size_t> user_line;
  std::unordered_map<std::string, std::string> post_owner;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= content.size()) {
    auto end = content.find('\n', pos);
    if (end == std::string_view::npos) end = content.size();
    const auto line = trim(content.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty()) {
      if (end == content.size()) break;
      continue;
    }

    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ValidationError(
          detail::line_error(line_no, std::string("malformed JSON: ") + e.what()));
    }
    if (!j.is_object() || !j.contains("user_id") || !j["user_id"].is_string() ||
        !j.contains("posts") || !j["posts"].is_array()) {
      throw ValidationError(
          detail::line_error(line_no, "expected {user_id, label, posts}"));
    }

    UserRecord rec;
    rec.user_id = j["user_id"].get<std::string>();
    if (auto [it, inserted] = user_line.emplace(rec.user_id, line_no);
        !inserted) {
      throw ValidationError("duplicate user_id \"" + rec.user_id +
                            "\" on lines " + std::to_string(it->second) +
                            " and " + std::to_string(line_no));
    }
    if (j.contains("label") && !j["label"].is_null()) {
      const auto& l = j["label"];
      if (!l.is_number_integer() || (l.get<int>() != 0 && l.get<int>() != 1)) {
        throw ValidationError(detail::line_error(line_no, "label must be 0, 1 or null"));
      }
      rec.label = l.get<int>();
    }

    for (const auto& pj : j["posts"]) {
      if (!pj.is_object() || !pj.contains("post_id") ||
          !pj["post_id"].is_string() || !pj.contains("text") ||
          !pj["text"].is_string() || !pj.contains("timestamp") ||
          !pj["timestamp"].is_string()) {
        throw ValidationError(
            detail::line_error(line_no, "post must have string post_id, text, timestamp"));
      }
      Post p;
      p.post_id = pj["post_id"].get<std::string>();
      const auto ts = pj["timestamp"].get<std::string>();
      const auto parsed = parse_timestamp(ts);
      if (!parsed) {
        throw ValidationError(detail::line_error(
            line_no, "unparseable timestamp \"" + ts + "\" in post " + p.post_id));
      }
      p.timestamp = *parsed;
      p.text = pj["text"].get<std::string>();
      if (trim(p.text).empty()) {
        ++ds.dropped_empty_posts;
        continue;
      }
      if (auto [it, inserted] = post_owner.emplace(p.post_id, rec.user_id);
          !inserted) {
        throw ValidationError(detail::line_error(
            line_no, "duplicate post_id \"" + p.post_id + "\" (also in user " +
                         it->second + ")"));
      }
      rec.posts.push_back(std::move(p));
    }
    if (rec.posts.empty()) {
      ++ds.dropped_empty_users;
      continue;
    }
    std::sort(rec.posts.begin(), rec.posts.end(), post_before);
    ds.records.push_back(std::move(rec));
  }
  if (ds.dropped_empty_posts > 0) {
    log(LogLevel::kWarning, "dropped " + std::to_string(ds.dropped_empty_posts) +
                                " empty post(s)");
  }
  if (ds.dropped_empty_users > 0) {
    log(LogLevel::kWarning, "dropped " + std::to_string(ds.dropped_empty_users) +
                                " user(s) with no non-empty posts");
  }
  return ds;
}

inline Dataset load_dataset(const std::string& path,
                            int schema = kDatasetSchemaV1) {
  return parse_dataset(read_file(path), schema);
}

inline std::string serialize_dataset(const std::vector<UserRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += user_to_json(r).dump();
    out += '\n';
  }
  return out;
}

inline void save_dataset(const std::vector<UserRecord>& records,
                         const std::string& path) {
  write_file(path, serialize_dataset(records));
}

inline constexpr std::chrono::days kDefaultHistoryWindow{183};

// Keeps posts with timestamp >= last timestamp - window. Posts must already
// be time-sorted, which load_dataset guarantees.
inline UserRecord truncate_history(
    const UserRecord& record,
    std::chrono::seconds window = kDefaultHistoryWindow) {
  if (record.posts.empty()) {
    throw ValidationError("truncate_history: user " + record.user_id +
                          " has no posts");
  }
  const Timestamp cutoff = record.posts.back().timestamp - window;
  UserRecord out;
  out.user_id = record.user_id;
  out.label = record.label;
  for (const auto& p : record.posts) {
    if (p.timestamp >= cutoff) out.posts.push_back(p);
  }
  return out;
}

}  // namespace doris
