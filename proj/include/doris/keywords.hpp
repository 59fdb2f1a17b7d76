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
 */// Keyword tables distilled from the symptom and emotion templates. The mock
// chat provider uses them as a stand-in annotator and mood summarizer, and the
// synthetic generator uses them to pick detectable injection phrases. Matching
// is on whole lowercased tokens (see tokenize()).

#pragma once

#include <array>
#include <string_view>
#include <vector>

#include "doris/core.hpp"
#include "doris/templates.hpp"
#include "doris/util.hpp"

namespace doris::keywords {

using List = std::vector<std::string_view>;

inline const std::array<List, kNumCriteria>& symptom_keywords() {
  static const std::array<List, kNumCriteria> kTable = {{
      // A. Depressed mood
      {"unhappy", "joyless", "depressed", "oppressed", "gloomy", "melancholic",
       "sad", "distressed", "heartbroken", "heavy-hearted", "despair",
       "despondency", "sorrowful", "cry", "crying", "emptiness"},
      // B. Loss of interest/pleasure
      {"interest", "indifferent", "bored", "unconcerned", "enthusiasm",
       "unmotivated", "uninteresting", "motivation", "pleasure", "dull"},
      // C. Weight loss or gain
      {"appetite", "nausea", "weight", "swallowing", "emaciation"},
      // D. Insomnia or hypersomnia
      {"sleep", "sleeping", "insomnia", "asleep", "hypersomnia", "oversleeping",
       "sleepiness", "tossing"},
      // E. Psychomotor agitation or retardation
      {"neurotic", "agitated", "unstable", "impatient", "anxious", "restless",
       "tense", "irritable", "uneasy", "fidgety", "impulsive"},
      // F. Fatigue
      {"fatigued", "listless", "exhausted", "weakened", "dispirited", "tired",
       "powerless", "weary", "vitality", "vigor", "drowsy", "lethargic"},
      // G. Inappropriate guilt
      {"self-denial", "confidence", "self-doubt", "inferiority", "guilt",
       "self-evaluation", "self-blame", "belittle", "incompetent", "worthless",
       "failure", "guilty", "blame", "fault"},
      // H. Decreased concentration
      {"concentrating", "concentrate", "judgment", "memory", "distractibility",
       "indecision", "attention", "focus", "cognitive", "hesitancy",
       "spaced"},
      // I. Thoughts of suicide
      {"death", "self-harming", "suicidal", "suicide", "self-injury",
       "self-mutilation", "wrists", "overdosing"},
  }};
  return kTable;
}

inline const std::array<List, kNumEmotions>& emotion_keywords() {
  static const std::array<List, kNumEmotions> kTable = {{
      // anger
      {"angry", "mad", "agitated", "annoyed", "indignant", "irritable",
       "furious", "incensed", "enraged", "irritated", "vexed", "resentful",
       "rage", "glaring", "shouting", "screaming", "insulting", "hating",
       "bellowing", "outraged", "ranting", "fuming"},
      // disgust
      {"detest", "loathe", "disgust", "disgusted", "abhor", "hate", "aversion",
       "despise", "scorn", "disdain", "repugnant", "dislike", "revulsion",
       "abominate", "displeasure", "nauseated"},
      // anxiety
      {"anxious", "uneasy", "worried", "nervous", "restless", "panicked",
       "fretful", "afraid", "apprehensive", "tense", "jittery", "indecisive",
       "fearful", "flustered", "frightened", "brooding", "terrified",
       "distrustful"},
      // happiness
      {"happy", "joyful", "glad", "blissful", "merry", "delighted", "elated",
       "pleased", "laughing", "cheerful", "excited", "jubilant", "optimistic",
       "enthusiastic", "uplifted", "exuberant", "overjoyed", "smile",
       "happiness"},
      // sadness
      {"sad", "sorrowful", "melancholic", "pain", "pessimistic", "tearful",
       "grieving", "mournful", "depressed", "suicidal", "heartbroken",
       "devastated", "upset", "crying", "saddened", "disconsolate", "dejected",
       "lamenting", "desolate", "gloomy", "weeping", "desperate"},
  }};
  return kTable;
}

inline bool contains_token(const std::vector<std::string>& tokens,
                           const List& words) {
  for (const auto& t : tokens) {
    for (auto w : words) {
      if (t == w) return true;
    }
  }
  return false;
}

inline int count_tokens(const std::vector<std::string>& tokens,
                        const List& words) {
  int n = 0;
  for (const auto& t : tokens) {
    for (auto w : words) {
      if (t == w) {
        ++n;
        break;
      }
    }
  }
  return n;
}

// Criteria whose keywords occur in the text.
inline SymptomVector detect_symptoms(std::string_view text) {
  const auto tokens = tokenize(text);
  SymptomVector v;
  for (int i = 0; i < kNumCriteria; ++i) {
    v.flags[i] = contains_token(tokens, symptom_keywords()[i]) ? 1 : 0;
  }
  return v;
}

// Keyword hit counts per emotion.
inline std::array<int, kNumEmotions> count_emotions(std::string_view text) {
  const auto tokens = tokenize(text);
  std::array<int, kNumEmotions> counts{};
  for (int j = 0; j < kNumEmotions; ++j) {
    counts[j] = count_tokens(tokens, emotion_keywords()[j]);
  }
  return counts;
}

}  // namespace doris::keywords
