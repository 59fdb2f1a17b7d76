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

// Mood-course features: per-emotion top-m% filtering of emotionally charged
// posts, the chat-generated mood-course summary, and the weighted fusion of
// the summary embedding with the mean emotional-post embedding.

#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "doris/core.hpp"
#include "doris/criteria.hpp"
#include "doris/prompts.hpp"
#include "doris/providers.hpp"
#include "doris/templates.hpp"
#include "json.hpp"

namespace doris {

inline constexpr double kDefaultMoodPercent = 20.0;
inline constexpr double kDefaultAlpha = 0.4;
inline constexpr double kDefaultBeta = 0.6;

// Returned instead of a chat call when a user has no emotional posts.
inline constexpr std::string_view kNoEmotionalPosts = "NO_EMOTIONAL_POSTS";

struct EmotionScores {
  std::string post_id;
  std::array<double, kNumEmotions> scores{};
};

inline EmotionScores emotion_scores(const std::string& post_id,
                                    const Embedding& post_embedding,
                                    std::span<const Embedding> emotion_embeddings) {
  if (emotion_embeddings.size() != kNumEmotions) {
    throw ValidationError("emotion scores need 5 emotion embeddings");
  }
  EmotionScores out{post_id, {}};
  for (int j = 0; j < kNumEmotions; ++j) {
    out.scores[j] = cosine_similarity(post_embedding, emotion_embeddings[j]);
  }
  return out;
}

inline EmotionScores emotion_scores(const Post& post,
                                    std::span<const Embedding> emotion_embeddings,
                                    const EncoderProvider& encoder) {
  return emotion_scores(post.post_id, encoder.encode(post.text),
                        emotion_embeddings);
}

// Per-emotion top-m% sets S_j over the whole corpus.
inline std::array<PostIdSet, kNumEmotions> select_emotional_per_emotion(
    std::span<const EmotionScores> scores, double m) {
  std::array<PostIdSet, kNumEmotions> out;
  for (int j = 0; j < kNumEmotions; ++j) {
    const auto ids = top_percent(
        scores, m,
        [](const EmotionScores& e) -> const std::string& { return e.post_id; },
        [j](const EmotionScores& e) { return e.scores[j]; });
    out[j] = PostIdSet(ids.begin(), ids.end());
  }
  return out;
}

// Union of the per-emotion sets.
inline PostIdSet select_emotional(std::span<const EmotionScores> scores, double m) {
  PostIdSet all;
  for (auto& s : select_emotional_per_emotion(scores, m)) {
    all.insert(s.begin(), s.end());
  }
  return all;
}

inline PostIdSet select_emotional(const std::vector<EmotionScores>& scores,
                                  double m) {
  return select_emotional(std::span<const EmotionScores>(scores), m);
}

// The user's posts that are in `emotional_ids`, in time order.
inline std::vector<const Post*> emotional_posts(const UserRecord& user,
                                                const PostIdSet& emotional_ids) {
  std::vector<const Post*> out;
  for (const auto& p : user.posts) {
    if (emotional_ids.contains(p.post_id)) out.push_back(&p);
  }
  return out;
}

inline std::string summarize_mood_course(const UserRecord& user,
                                         const PostIdSet& emotional_ids,
                                         const ChatProvider& chat) {
  const auto posts = emotional_posts(user, emotional_ids);
  if (posts.empty()) return std::string(kNoEmotionalPosts);
  std::vector<prompts::MoodEntry> entries;
  entries.reserve(posts.size());
  for (const Post* p : posts) entries.push_back({p->timestamp, p->text});
  const auto prompt = prompts::mood_prompt(entries, chat.max_prompt_chars());
  if (prompt.entries_dropped > 0) {
    log(LogLevel::kInfo, "user " + user.user_id + ": dropped " +
                             std::to_string(prompt.entries_dropped) +
                             " oldest emotional post(s) to fit the prompt budget");
  }
  return chat.complete(prompt.text);
}

// alpha * H_summary + beta * mean(emotional post embeddings). With no
// emotional posts the result is the zero vector and nothing is encoded.
inline Vector mood_representation(std::string_view summary,
                                  std::span<const Embedding> emotional_embeddings,
                                  double alpha, double beta,
                                  const EncoderProvider& encoder) {
  if (!(alpha >= 0.0) || !(beta >= 0.0)) {
    throw ValidationError("mood weights alpha and beta must be non-negative");
  }
  const std::size_t d = encoder.dim();
  Vector out(d, 0.0);
  if (emotional_embeddings.empty()) return out;

  const Embedding summary_embedding = encoder.encode(summary);
  Vector mean(d, 0.0);
  for (const auto& e : emotional_embeddings) {
    if (e.dim() != d) throw ValidationError("mood_representation: dim mismatch");
    for (std::size_t i = 0; i < d; ++i) mean[i] += e.values[i];
  }
  const double inv = 1.0 / static_cast<double>(emotional_embeddings.size());
  for (std::size_t i = 0; i < d; ++i) {
    out[i] = alpha * summary_embedding.values[i] + beta * (mean[i] * inv);
  }
  return out;
}

struct MoodCourse {
  std::string user_id;
  std::vector<std::string> emotional_post_ids;  // time-sorted
  std::string summary;
};

inline nlohmann::json to_json(const MoodCourse& m) {
  return {{"user_id", m.user_id},
          {"emotional_post_ids", m.emotional_post_ids},
          {"summary", m.summary}};
}

inline MoodCourse mood_course_from_json(const nlohmann::json& j) {
  return {j.at("user_id").get<std::string>(),
          j.at("emotional_post_ids").get<std::vector<std::string>>(),
          j.at("summary").get<std::string>()};
}

}  // namespace doris
