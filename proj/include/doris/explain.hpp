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

// Per-user explanation reports: classifier verdict, symptom evidence, mood
// course, and a chat-generated explanation tying them together.

#pragma once

#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "doris/core.hpp"
#include "doris/criteria.hpp"
#include "doris/gbt.hpp"
#include "doris/isotonic.hpp"
#include "doris/prompts.hpp"
#include "doris/providers.hpp"
#include "json.hpp"

namespace doris {

inline constexpr std::size_t kExcerptMaxChars = 280;
inline constexpr std::string_view kExplanationUnavailable = "UNAVAILABLE";

// First `max_chars` code points of `text`; longer texts are cut to
// max_chars - 1 code points plus an ellipsis.
inline std::string make_excerpt(std::string_view text, std::size_t max_chars = kExcerptMaxChars) {
  auto is_cont = [](char c) { return (static_cast<unsigned char>(c) & 0xC0) == 0x80; };
  std::size_t code_points = 0;
  for (char c : text) code_points += is_cont(c) ? 0 : 1;
  if (code_points <= max_chars) return std::string(text);
  std::size_t kept = 0, i = 0;
  for (; i < text.size(); ++i) {
    if (!is_cont(text[i])) {
      if (kept == max_chars - 1) break;
      ++kept;
    }
  }
  return std::string(text.substr(0, i)) + "\xE2\x80\xA6";
}

struct Evidence {
  std::string post_id;
  std::string excerpt;
  std::string letters;  // e.g. "DI"

  bool operator==(const Evidence&) const = default;
};

struct ExplanationReport {
  std::string user_id;
  int verdict = 0;
  double probability = 0.0;
  double raw_score = 0.0;
  std::vector<Evidence> symptom_evidence;
  std::string mood_course;
  std::string explanation;
  std::vector<std::string> warnings;

  bool operator==(const ExplanationReport&) const = default;
};

// Posts with a nonzero annotation, most recent first.
inline std::vector<Evidence> collect_evidence(
    const UserRecord& user, const std::unordered_map<std::string, AnnotationResult>& annotations) {
  std::vector<Evidence> out;
  for (auto it = user.posts.rbegin(); it != user.posts.rend(); ++it) {
    auto a = annotations.find(it->post_id);
    if (a == annotations.end() || !a->second.vector.any()) continue;
    out.push_back({it->post_id, make_excerpt(it->text), a->second.vector.letters()});
  }
  return out;
}

inline std::string build_explanation_prompt(std::string_view mood_course,
                                            std::span<const Evidence> evidence, int verdict,
                                            std::size_t max_chars = kDefaultMaxPromptChars) {
  std::vector<prompts::EvidenceLine> lines;
  lines.reserve(evidence.size());
  for (const auto& e : evidence) lines.push_back({e.excerpt, e.letters});
  return prompts::explanation_prompt(mood_course, lines, verdict, max_chars).text;
}

struct ScoredUser {
  double raw_score = 0.0;
  double probability = 0.0;
};

inline ScoredUser score_user(std::span<const double> fused, const BoostedModel& model,
                             const IsotonicCalibrator& calibrator) {
  const double raw = model.raw_score(fused);
  return {raw, calibrator.fitted() ? calibrator(raw) : 1.0 / (1.0 + std::exp(-raw))};
}

// The verdict comes from the calibrated probability and never depends on the
// chat call; a provider failure only blanks the explanation.
inline ExplanationReport explain_user(
    const UserRecord& user, const std::unordered_map<std::string, AnnotationResult>& annotations,
    std::string_view mood_course, std::span<const double> fused, const BoostedModel& model,
    const IsotonicCalibrator& calibrator, const ChatProvider& chat,
    double threshold = kDefaultDecisionThreshold) {
  ExplanationReport r;
  r.user_id = user.user_id;
  const auto scored = score_user(fused, model, calibrator);
  r.raw_score = scored.raw_score;
  r.probability = scored.probability;
  r.verdict = make_prediction(scored.raw_score, scored.probability, threshold).label;
  r.symptom_evidence = collect_evidence(user, annotations);
  r.mood_course = std::string(mood_course);
  try {
    r.explanation = chat.complete(
        build_explanation_prompt(mood_course, r.symptom_evidence, r.verdict, chat.max_prompt_chars()));
    if (trim(r.explanation).empty()) throw ProviderError("empty explanation");
  } catch (const ProviderError& e) {
    r.explanation = std::string(kExplanationUnavailable);
    r.warnings.push_back(std::string("explanation unavailable: ") + e.what());
    log(LogLevel::kWarning, "user " + user.user_id + ": explanation unavailable: " + e.what());
  }
  return r;
}

inline nlohmann::json to_json(const ExplanationReport& r) {
  nlohmann::json evidence = nlohmann::json::array();
  for (const auto& e : r.symptom_evidence) {
    std::vector<std::string> letters;
    for (char c : e.letters) letters.emplace_back(1, c);
    evidence.push_back({{"post_id", e.post_id}, {"excerpt", e.excerpt}, {"criteria", letters}});
  }
  return {{"user_id", r.user_id},
          {"verdict", prompts::verdict_word(r.verdict)},
          {"probability", r.probability},
          {"raw_score", r.raw_score},
          {"symptom_evidence", std::move(evidence)},
          {"mood_course", r.mood_course},
          {"explanation", r.explanation},
          {"warnings", r.warnings}};
}

inline ExplanationReport explanation_from_json(const nlohmann::json& j) {
  ExplanationReport r;
  r.user_id = j.at("user_id").get<std::string>();
  const auto verdict = j.at("verdict").get<std::string>();
  if (verdict != "depressed" && verdict != "normal") {
    throw ValidationError("explanation: verdict must be depressed or normal");
  }
  r.verdict = verdict == "depressed" ? 1 : 0;
  r.probability = j.at("probability").get<double>();
  r.raw_score = j.at("raw_score").get<double>();
  for (const auto& ej : j.at("symptom_evidence")) {
    Evidence e;
    e.post_id = ej.at("post_id").get<std::string>();
    e.excerpt = ej.at("excerpt").get<std::string>();
    for (const auto& l : ej.at("criteria")) e.letters += l.get<std::string>();
    r.symptom_evidence.push_back(std::move(e));
  }
  r.mood_course = j.at("mood_course").get<std::string>();
  r.explanation = j.at("explanation").get<std::string>();
  r.warnings = j.at("warnings").get<std::vector<std::string>>();
  return r;
}

}  // namespace doris
