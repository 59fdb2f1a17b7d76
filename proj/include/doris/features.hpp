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

// Post-history representation and the final feature vector
// [F_mood + F_history, F_criteria].

#pragma once

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "doris/core.hpp"
#include "doris/criteria.hpp"
#include "doris/providers.hpp"
#include "json.hpp"

namespace doris {

// Arithmetic mean of the embeddings of all posts. Not re-normalized.
inline Vector post_history_representation(std::span<const Embedding> post_embeddings) {
  if (post_embeddings.empty()) {
    throw ValidationError("post_history_representation: no posts");
  }
  const std::size_t d = post_embeddings.front().dim();
  Vector sum(d, 0.0);
  for (const auto& e : post_embeddings) {
    if (e.dim() != d) throw ValidationError("post_history_representation: dim mismatch");
    for (std::size_t i = 0; i < d; ++i) sum[i] += e.values[i];
  }
  const double n = static_cast<double>(post_embeddings.size());
  for (double& x : sum) x /= n;
  return sum;
}

inline Vector post_history_representation(const UserRecord& user,
                                          const EncoderProvider& encoder) {
  std::vector<Embedding> embeddings;
  embeddings.reserve(user.posts.size());
  for (const auto& p : user.posts) embeddings.push_back(encoder.encode(p.text));
  return post_history_representation(embeddings);
}

// concat(f_mood + f_history, f_criteria); length d + 9.
inline Vector fuse(std::span<const double> f_mood, std::span<const double> f_history,
                   std::span<const double> f_criteria) {
  if (f_mood.size() != f_history.size()) {
    throw ValidationError("fuse: mood and history vectors differ in dimension (" +
                          std::to_string(f_mood.size()) + " vs " +
                          std::to_string(f_history.size()) + ")");
  }
  if (f_criteria.size() != kNumCriteria) {
    throw ValidationError("fuse: criteria feature must have 9 entries");
  }
  Vector out;
  out.reserve(f_mood.size() + kNumCriteria);
  for (std::size_t i = 0; i < f_mood.size(); ++i) out.push_back(f_mood[i] + f_history[i]);
  out.insert(out.end(), f_criteria.begin(), f_criteria.end());
  return out;
}

struct UserFeatures {
  std::string user_id;
  std::optional<int> label;
  Vector f_history;
  Vector f_mood;
  std::array<double, kNumCriteria> f_criteria{};
  Vector fused;
};

inline UserFeatures make_user_features(std::string user_id, std::optional<int> label,
                                       Vector f_history, Vector f_mood,
                                       const std::array<double, kNumCriteria>& f_criteria) {
  UserFeatures u;
  u.user_id = std::move(user_id);
  u.label = label;
  u.fused = fuse(f_mood, f_history, f_criteria);
  for (double x : u.fused) {
    if (!std::isfinite(x)) throw ValidationError("non-finite feature for " + u.user_id);
  }
  u.f_history = std::move(f_history);
  u.f_mood = std::move(f_mood);
  u.f_criteria = f_criteria;
  return u;
}

// features.jsonl record. The components are stored alongside the fused
// vector so ablations can be re-fused without re-running upstream stages.
inline nlohmann::json to_json(const UserFeatures& f) {
  return {{"user_id", f.user_id},
          {"label", f.label ? nlohmann::json(*f.label) : nlohmann::json(nullptr)},
          {"fused", f.fused},
          {"f_history", f.f_history},
          {"f_mood", f.f_mood},
          {"f_criteria", f.f_criteria}};
}

inline UserFeatures user_features_from_json(const nlohmann::json& j) {
  UserFeatures f;
  f.user_id = j.at("user_id").get<std::string>();
  if (!j.at("label").is_null()) f.label = j.at("label").get<int>();
  f.fused = j.at("fused").get<Vector>();
  if (j.contains("f_history")) f.f_history = j.at("f_history").get<Vector>();
  if (j.contains("f_mood")) f.f_mood = j.at("f_mood").get<Vector>();
  if (j.contains("f_criteria")) {
    f.f_criteria = j.at("f_criteria").get<std::array<double, kNumCriteria>>();
  }
  return f;
}

}  // namespace doris
