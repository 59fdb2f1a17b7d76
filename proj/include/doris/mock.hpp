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

// Offline chat provider. Recognizes the three prompt kinds built in
// prompts.hpp and answers them deterministically from the keyword tables.

#pragma once

#include <algorithm>
#include <array>
#include <memory>
#include <sstream>
#include <string>

#include "doris/criteria.hpp"
#include "doris/keywords.hpp"
#include "doris/prompts.hpp"
#include "doris/providers.hpp"
#include "doris/templates.hpp"

namespace doris {

class MockChat : public ChatProvider {
 public:
  explicit MockChat(int max_concurrency = kDefaultMaxConcurrency,
                    std::size_t max_prompt_chars = kDefaultMaxPromptChars)
      : max_concurrency_(max_concurrency), max_prompt_chars_(max_prompt_chars) {}

  std::string name() const override { return "mock"; }
  int max_concurrency() const override { return max_concurrency_; }
  std::size_t max_prompt_chars() const override { return max_prompt_chars_; }

  static std::string annotate(std::string_view post_text) {
    return format_annotation(keywords::detect_symptoms(post_text));
  }

  static std::string summarize(std::string_view body) {
    std::size_t entries = 0, negative_entries = 0;
    std::array<int, kNumEmotions> totals{};
    std::size_t pos = 0;
    while (pos < body.size()) {
      auto end = body.find('\n', pos);
      if (end == std::string_view::npos) end = body.size();
      const auto line = body.substr(pos, end - pos);
      pos = end + 1;
      if (!line.starts_with("Time: ")) continue;
      ++entries;
      const auto counts = keywords::count_emotions(line);
      bool negative = false;
      for (int j = 0; j < kNumEmotions; ++j) {
        totals[j] += counts[j];
        if (j != static_cast<int>(Emotion::kHappiness) && counts[j] > 0) negative = true;
      }
      negative_entries += negative ? 1 : 0;
    }

    std::array<int, kNumEmotions> rank{0, 1, 2, 3, 4};
    std::stable_sort(rank.begin(), rank.end(),
                     [&](int a, int b) { return totals[a] > totals[b]; });
    std::ostringstream os;
    os << "Mood course across " << entries << " entries: ";
    if (totals[rank[0]] == 0) {
      os << "no strongly affective content; mood appears stable.";
      return os.str();
    }
    os << "dominant emotion " << kEmotionNames[rank[0]] << ". Observed emotions:";
    bool first = true;
    for (int j : rank) {
      if (totals[j] == 0) break;
      os << (first ? " " : ", ") << kEmotionNames[j] << " (" << totals[j] << ")";
      first = false;
    }
    os << ". Negative affect in " << negative_entries << " of " << entries << " entries";
    if (entries > 0 && 2 * negative_entries >= entries) {
      os << ", persistent over the period.";
    } else if (negative_entries > 0) {
      os << ", fluctuating.";
    } else {
      os << ".";
    }
    return os.str();
  }

  static std::string explain(std::string_view prompt) {
    const auto parsed = prompts::parse_explanation_prompt(prompt);
    std::ostringstream os;
    os << "The automated system judged this user to be " << parsed.verdict << ". ";
    std::array<bool, kNumCriteria> seen{};
    for (const auto& letters : parsed.evidence_letters) {
      for (char c : letters) seen[c - 'A'] = true;
    }
    bool any = false;
    for (bool b : seen) any = any || b;
    if (any) {
      os << "Posts show symptoms of criteria";
      bool first = true;
      for (int i = 0; i < kNumCriteria; ++i) {
        if (!seen[i]) continue;
        os << (first ? " " : ", ") << criterion_letter(i) << " (" << kCriterionNames[i] << ")";
        first = false;
      }
      os << " across " << parsed.evidence_letters.size() << " post(s). ";
    } else {
      os << "No post displayed depressive symptoms, so the judgment rests on the mood course. ";
    }
    os << "Mood course: " << parsed.mood_course;
    return os.str();
  }

 protected:
  std::string complete_impl(std::string_view prompt) const override {
    if (prompts::is_explanation_prompt(prompt)) return explain(prompt);
    if (prompts::is_annotation_prompt(prompt)) {
      return annotate(prompts::annotation_post_text(prompt));
    }
    if (prompts::is_mood_prompt(prompt)) return summarize(prompts::mood_prompt_body(prompt));
    throw ProviderError("mock provider: unrecognized prompt");
  }

 private:
  int max_concurrency_;
  std::size_t max_prompt_chars_;
};

inline std::shared_ptr<ChatProvider> mock_annotator() { return std::make_shared<MockChat>(); }

}  // namespace doris
