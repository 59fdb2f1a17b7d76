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

// Registry of the nine symptom templates (criteria A-I) and five emotion
// templates. The shipped text files under templates/ are the reviewable
// source; identical copies are compiled in so the library works without them.

#pragma once

#include <array>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "doris/core.hpp"
#include "doris/error.hpp"
#include "doris/providers.hpp"

namespace doris {

enum class Emotion : int { kAnger = 0, kDisgust, kAnxiety, kHappiness, kSadness };

inline constexpr int kNumEmotions = 5;

inline constexpr std::array<std::string_view, kNumEmotions> kEmotionNames = {
    "anger", "disgust", "anxiety", "happiness", "sadness"};

inline constexpr std::string_view kBuiltinSymptomTemplates = R"TPL(# Symptom templates, one per DSM-5 criterion A-I.
# Format: a "[<letter>] <title>" header line followed by the template text.

[A] Depressed mood
I feel low, unhappy, joyless, depressed, oppressed, gloomy, disappointed, melancholic, sad, distressed, heartbroken, a sense of loss, often feeling heavy-hearted, experiencing despair and despondency, always feeling sorrowful with an urge to cry, experiencing inner pain and emptiness.

[B] Loss of interest/pleasure
I have lost interest, feel indifferent, bored, unconcerned, lack enthusiasm, am unmotivated, have no interest in activities, am unmotivated, find almost everything uninteresting, lack motivation, find significantly reduced pleasure, cannot experience happiness, feel the world is dull, and cannot muster energy all day.

[C] Weight loss or gain
I experience reduced appetite, often feel full, lack of appetite, nausea, abnormal weight loss, difficulty swallowing, emaciation, loss of appetite, poor appetite, weight loss, or abnormal weight gain, sudden weight increase, unexplained weight gain.

[D] Insomnia or hypersomnia
I suffer from sleep disorders, depend on sleeping pills, often experience insomnia, have difficulty falling asleep, rely on sleep medication, frequently stay up late, struggle with sleep difficulties, and exhibit symptoms of insomnia, tossing and turning at night, or hypersomnia, oversleeping, sleep excess, prolonged sleep duration, or excessive sleepiness.

[E] Psychomotor agitation or retardation
I am neurotic, easily agitated, emotionally unstable, impatient, anxious, restless, mentally tense, irritable, often feeling mentally uneasy and agitated, fidgety, displaying impulsive and irritable behavior, and my emotions are easily out of control.

[F] Fatigue
I feel fatigued, listless, exhausted, physically weakened, lacking in energy, dispirited, frequently tired, powerless, often feeling weary, unable to muster strength, feeling a heavy body, lacking in vitality and vigor, always feeling drowsy and lethargic.

[G] Inappropriate guilt
I have feelings of self-denial, lack of confidence, self-doubt, inferiority, disappointment, guilt, negative self-evaluation, self-blame, frequently belittle myself, feel incompetent and worthless, believe that I have achieved nothing and am a failure, feel disappointed in my expectations of myself and my family, often feel guilty and blame myself, thinking that everything is my fault.

[H] Decreased concentration
I experience slow thinking, difficulty concentrating, reduced judgment, memory decline, distractibility, indecision, scattered attention, difficulty thinking, lack of focus, difficulty paying attention, decreased cognitive ability, hesitancy in making decisions, often feeling mentally spaced out, unable to concentrate.

[I] Thoughts of suicide
I have a desire for death, self-harming behavior, suicidal thoughts, thoughts of ending my life, suicidal actions, thoughts of suicide, self-injury, recurring thoughts of death, suicidal tendencies, self-mutilation, cutting wrists with blades, jumping from heights to commit suicide, overdosing to commit suicide, making plans for suicide.
)TPL";

inline constexpr std::string_view kBuiltinEmotionTemplates = R"TPL(# Emotion templates in the order anger, disgust, anxiety, happiness, sadness.
# Format: a "[<emotion>] <title>" header line followed by the template text.

[anger] Anger
I am angry, mad, agitated, annoyed, indignant, irritable, furious, disgusted, incensed, enraged, irritated, vexed, resentful, in a rage, glaring, shouting, screaming, insulting, hating, bellowing, outraged, ranting, detesting, fuming, and uncontrollably angry.

[disgust] Disgust
I detest, loathe, disgust, abhor, hate, tire of, feel nauseated by, have a strong aversion to, despise, scorn, disdain, reject, find repugnant, utterly dislike, disdain, feel revulsion, despise, dislike intensely, abominate, have a strong displeasure, grow weary of, become impatient with, dismiss, look down upon, and utterly abhor.

[anxiety] Anxiety
I feel anxious, uneasy, worried, concerned, nervous, restless, panicked, fretful, afraid, uncertain, apprehensive, tense, jittery, indecisive, fearful, flustered, melancholic, frightened, apprehensive, full of doubts, brooding, terrified, distrustful, terrified, and on edge.

[happiness] Happiness
I am happy, joyful, glad, blissful, merry, satisfied, delighted, elated, pleased, laughing, cheerful, excited, jubilant, optimistic, enthusiastic, cheerful, uplifted, exuberant, overjoyed, jubilant, with a smile on my face, pleasantly surprised, beaming with joy, and my heart blooms with happiness.

[sadness] Sadness
I am sad, sorrowful, melancholic, in pain, lost, pessimistic, tearful, grieving, mournful, depressed, suicidal, heartbroken, devastated, upset, crying, deeply saddened, disconsolate, dejected, lamenting, desolate, gloomy, weeping bitterly, desperate, heartbroken, indignant.
)TPL";

struct TemplateEntry {
  std::string label;  // "A".."I" or an emotion name
  std::string title;
  std::string text;
};

// Parses the template file format: '#' comment lines, blank separators, and
// blocks of "[label] title" followed by one or more text lines (joined with a
// single space).
inline std::vector<TemplateEntry> parse_template_file(std::string_view content) {
  std::vector<TemplateEntry> entries;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < content.size()) {
    auto end = content.find('\n', pos);
    if (end == std::string_view::npos) end = content.size();
    const auto line = trim(content.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    if (line.front() == '[') {
      const auto close = line.find(']');
      if (close == std::string_view::npos || close == 1) {
        throw ValidationError("template file line " + std::to_string(line_no) +
                              ": malformed header");
      }
      entries.push_back({std::string(line.substr(1, close - 1)),
                         std::string(trim(line.substr(close + 1))), ""});
      continue;
    }
    if (entries.empty()) {
      throw ValidationError("template file line " + std::to_string(line_no) +
                            ": text before first header");
    }
    auto& text = entries.back().text;
    if (!text.empty()) text.push_back(' ');
    text += line;
  }
  for (const auto& e : entries) {
    if (e.text.empty()) {
      throw ValidationError("template [" + e.label + "] has no text");
    }
  }
  return entries;
}

struct SymptomTemplate {
  Criterion criterion;
  std::string title;
  std::string text;
  Embedding embedding;  // empty until embed_templates runs
};

struct EmotionTemplate {
  Emotion emotion;
  std::string text;
  Embedding embedding;
};

class TemplateRegistry {
 public:
  static TemplateRegistry from_strings(std::string_view symptoms_file,
                                       std::string_view emotions_file) {
    TemplateRegistry reg;
    reg.symptoms_digest_ = sha256_hex(symptoms_file);
    reg.emotions_digest_ = sha256_hex(emotions_file);

    const auto sym = parse_template_file(symptoms_file);
    if (sym.size() != kNumCriteria) {
      throw ValidationError("expected 9 symptom templates, got " +
                            std::to_string(sym.size()));
    }
    for (int i = 0; i < kNumCriteria; ++i) {
      if (sym[i].label != std::string(1, criterion_letter(i))) {
        throw ValidationError("symptom template " + std::to_string(i) +
                              " must be labeled " +
                              std::string(1, criterion_letter(i)) + ", got " +
                              sym[i].label);
      }
      reg.symptoms_.push_back(
          {static_cast<Criterion>(i), sym[i].title, sym[i].text, {}});
    }

    const auto emo = parse_template_file(emotions_file);
    if (emo.size() != kNumEmotions) {
      throw ValidationError("expected 5 emotion templates, got " +
                            std::to_string(emo.size()));
    }
    for (int j = 0; j < kNumEmotions; ++j) {
      if (emo[j].label != kEmotionNames[j]) {
        throw ValidationError("emotion template " + std::to_string(j) +
                              " must be labeled " + std::string(kEmotionNames[j]) +
                              ", got " + emo[j].label);
      }
      reg.emotions_.push_back({static_cast<Emotion>(j), emo[j].text, {}});
    }
    return reg;
  }

  static TemplateRegistry builtin() {
    return from_strings(kBuiltinSymptomTemplates, kBuiltinEmotionTemplates);
  }

  // Loads templates/symptoms.txt and templates/emotions.txt from `dir`.
  static TemplateRegistry from_directory(const std::string& dir) {
    return from_strings(read_file(dir + "/symptoms.txt"),
                        read_file(dir + "/emotions.txt"));
  }

  const std::vector<SymptomTemplate>& symptoms() const { return symptoms_; }
  const std::vector<EmotionTemplate>& emotions() const { return emotions_; }
  const std::string& symptoms_digest() const { return symptoms_digest_; }
  const std::string& emotions_digest() const { return emotions_digest_; }

  bool embedded() const {
    return !symptoms_.empty() && !symptoms_.front().embedding.values.empty();
  }

  std::vector<Embedding> symptom_embeddings() const {
    std::vector<Embedding> out;
    for (const auto& s : symptoms_) out.push_back(s.embedding);
    return out;
  }
  std::vector<Embedding> emotion_embeddings() const {
    std::vector<Embedding> out;
    for (const auto& e : emotions_) out.push_back(e.embedding);
    return out;
  }

  // Fills every template's embedding. Wrap the encoder in a CachedEncoder to
  // persist them; each embedding depends only on (encoder, text).
  TemplateRegistry embed(const EncoderProvider& encoder) const {
    TemplateRegistry out = *this;
    for (auto& s : out.symptoms_) s.embedding = encoder.encode(s.text);
    for (auto& e : out.emotions_) e.embedding = encoder.encode(e.text);
    return out;
  }

 private:
  std::vector<SymptomTemplate> symptoms_;
  std::vector<EmotionTemplate> emotions_;
  std::string symptoms_digest_;
  std::string emotions_digest_;
};

inline TemplateRegistry embed_templates(const TemplateRegistry& registry,
                                        const EncoderProvider& encoder) {
  return registry.embed(encoder);
}

}  // namespace doris
