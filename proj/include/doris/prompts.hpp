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

// Prompt builders for the three chat tasks: per-post symptom annotation,
// per-user mood-course summary, and per-user explanation. Each builder
// respects a character budget; only the mood-course and explanation prompts
// have a truncatable body.

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "doris/core.hpp"
#include "doris/error.hpp"

namespace doris::prompts {

inline constexpr std::string_view kAnnotationPrefix =
    "Assuming you are a psychiatrist specializing in depression. Given ";
inline constexpr std::string_view kAnnotationSuffix =
    ", please determine if this message includes any of the following states "
    "of the author:\n\n"
    "A. Depressive mood B. Loss of interest/pleasure C. Weight loss or gain "
    "D. Insomnia or hypersomnia E. Psychomotor agitation or retardation "
    "F. Fatigue G. Inappropriate guilt H. Decreased concentration "
    "I. Thoughts of suicide.\n\n"
    "If present, answer in the format of enclosed letters separated by "
    "commas, for example, (A, B, C). If none are present, respond with None.";
inline constexpr std::string_view kAnnotationReask =
    "\n\nYour previous reply could not be read. Reply with only the enclosed "
    "letters, for example (A, B, C), or with None.";

inline constexpr std::string_view kMoodHeader =
    "As a consulting psychiatrist, please conduct a longitudinal mood course "
    "analysis based on the following temporal sequence of personal "
    "expressions. For each entry, evaluate affect, emotional valence, and "
    "severity of mood states. Synthesize these observations into a clinical "
    "summary of mood progression, noting any patterns of persistence, "
    "fluctuation, or changes over time:\n\n";

inline constexpr std::string_view kExplainPrefix =
    "Assuming you are a psychiatrist specializing in depression.\n\n"
    "Here is a user's mood course: ";
inline constexpr std::string_view kExplainEvidenceIntro =
    "; below are posts from this user displaying symptoms of depression and "
    "the types of symptoms exhibited:\n";
inline constexpr std::string_view kExplainVerdictIntro =
    "; this user has been determined by an automated depression detection "
    "system to be ";
inline constexpr std::string_view kExplainSuffix =
    ".\n\nPlease consider the user's mood course and posts to generate an "
    "explanation for this judgment. Your explanation should be grounded in "
    "concrete evidence.";

inline std::string annotation_prompt(std::string_view post_text) {
  std::string p;
  p.reserve(kAnnotationPrefix.size() + post_text.size() +
            kAnnotationSuffix.size());
  p += kAnnotationPrefix;
  p += post_text;
  p += kAnnotationSuffix;
  return p;
}

inline bool is_annotation_prompt(std::string_view prompt) {
  return prompt.starts_with(kAnnotationPrefix) &&
         prompt.find(kAnnotationSuffix) != std::string_view::npos &&
         prompt.find(kExplainEvidenceIntro) == std::string_view::npos;
}

// Post text embedded in an annotation prompt.
inline std::string_view annotation_post_text(std::string_view prompt) {
  const auto end = prompt.rfind(kAnnotationSuffix);
  if (!prompt.starts_with(kAnnotationPrefix) || end == std::string_view::npos ||
      end < kAnnotationPrefix.size()) {
    throw ValidationError("not an annotation prompt");
  }
  return prompt.substr(kAnnotationPrefix.size(), end - kAnnotationPrefix.size());
}

struct MoodEntry {
  Timestamp timestamp;
  std::string_view text;
};

inline std::string mood_entry_line(const MoodEntry& e) {
  return "Time: " + format_timestamp(e.timestamp) + ", Post: " +
         std::string(e.text);
}

struct MoodPrompt {
  std::string text;
  std::size_t entries_kept = 0;
  std::size_t entries_dropped = 0;
};

// `entries` must be time-sorted. Entries are dropped oldest-first until the
// prompt fits in `max_chars`; if even the newest entry alone does not fit,
// throws ContextOverflowError.
inline MoodPrompt mood_prompt(const std::vector<MoodEntry>& entries,
                              std::size_t max_chars) {
  if (entries.empty()) throw ValidationError("mood_prompt: no entries");
  std::vector<std::string> lines;
  lines.reserve(entries.size());
  for (const auto& e : entries) lines.push_back(mood_entry_line(e));

  // Walk backwards from the newest entry, keeping what fits.
  std::size_t total = kMoodHeader.size();
  std::size_t first = lines.size();
  while (first > 0) {
    const std::size_t extra = lines[first - 1].size() + (first < lines.size());
    if (total + extra > max_chars) break;
    total += extra;
    --first;
  }
  if (first == lines.size()) {
    throw ContextOverflowError(
        "mood-course prompt does not fit the character budget even with a "
        "single entry");
  }
  MoodPrompt out;
  out.text.reserve(total);
  out.text += kMoodHeader;
  for (std::size_t i = first; i < lines.size(); ++i) {
    if (i > first) out.text += '\n';
    out.text += lines[i];
  }
  out.entries_kept = lines.size() - first;
  out.entries_dropped = first;
  return out;
}

inline bool is_mood_prompt(std::string_view prompt) {
  return prompt.starts_with(kMoodHeader);
}

inline std::string_view mood_prompt_body(std::string_view prompt) {
  if (!is_mood_prompt(prompt)) throw ValidationError("not a mood prompt");
  return prompt.substr(kMoodHeader.size());
}

struct EvidenceLine {
  std::string excerpt;
  std::string letters;  // e.g. "AI"
};

inline std::string format_letters(std::string_view letters) {
  std::string out = "(";
  for (std::size_t i = 0; i < letters.size(); ++i) {
    if (i) out += ", ";
    out += letters[i];
  }
  out += ")";
  return out;
}

inline std::string verdict_word(int verdict) {
  return verdict == 1 ? "depressed" : "normal";
}

struct ExplanationPrompt {
  std::string text;
  std::size_t evidence_kept = 0;
};

// Evidence is listed in the given order (most recent first by convention);
// entries are dropped from the tail when the budget requires it.
inline ExplanationPrompt explanation_prompt(std::string_view mood_course,
                                            const std::vector<EvidenceLine>& evidence,
                                            int verdict, std::size_t max_chars) {
  const std::string verdict_text = verdict_word(verdict);
  std::string head;
  head += kExplainPrefix;
  head += mood_course;
  head += kExplainEvidenceIntro;
  std::string tail;
  tail += kExplainVerdictIntro;
  tail += verdict_text;
  tail += kExplainSuffix;

  std::size_t total = head.size() + tail.size();
  if (total > max_chars) {
    throw ContextOverflowError(
        "explanation prompt does not fit the character budget");
  }
  std::string body;
  std::size_t kept = 0;
  for (const auto& e : evidence) {
    std::string line = "- Symptoms " + format_letters(e.letters) + ": " +
                       e.excerpt + "\n";
    if (total + line.size() > max_chars) break;
    total += line.size();
    body += line;
    ++kept;
  }
  if (kept == 0) body = "(none)\n";
  return {head + body + tail, kept};
}

inline bool is_explanation_prompt(std::string_view prompt) {
  return prompt.starts_with(kExplainPrefix) &&
         prompt.find(kExplainEvidenceIntro) != std::string_view::npos;
}

struct ParsedExplanationPrompt {
  std::string mood_course;
  std::vector<std::string> evidence_letters;
  std::string verdict;
};

inline ParsedExplanationPrompt parse_explanation_prompt(std::string_view prompt) {
  if (!is_explanation_prompt(prompt)) {
    throw ValidationError("not an explanation prompt");
  }
  const auto intro = prompt.find(kExplainEvidenceIntro);
  const auto verdict_at = prompt.rfind(kExplainVerdictIntro);
  const auto suffix_at = prompt.rfind(kExplainSuffix);
  if (verdict_at == std::string_view::npos || suffix_at == std::string_view::npos ||
      verdict_at < intro || suffix_at < verdict_at) {
    throw ValidationError("malformed explanation prompt");
  }
  ParsedExplanationPrompt out;
  out.mood_course = std::string(
      prompt.substr(kExplainPrefix.size(), intro - kExplainPrefix.size()));
  const auto vstart = verdict_at + kExplainVerdictIntro.size();
  out.verdict = std::string(prompt.substr(vstart, suffix_at - vstart));

  auto body = prompt.substr(intro + kExplainEvidenceIntro.size(),
                            verdict_at - intro - kExplainEvidenceIntro.size());
  constexpr std::string_view kMarker = "- Symptoms (";
  std::size_t pos = 0;
  while (pos < body.size()) {
    auto end = body.find('\n', pos);
    if (end == std::string_view::npos) end = body.size();
    auto line = body.substr(pos, end - pos);
    pos = end + 1;
    if (!line.starts_with(kMarker)) continue;
    const auto close = line.find(')');
    if (close == std::string_view::npos) continue;
    std::string letters;
    for (char c : line.substr(kMarker.size(), close - kMarker.size())) {
      if (c >= 'A' && c <= 'I') letters.push_back(c);
    }
    out.evidence_letters.push_back(letters);
  }
  return out;
}

}  // namespace doris::prompts
