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

// Deterministic synthetic cohorts for offline end-to-end runs. Control users
// post neutral everyday sentences; depressed users additionally carry phrases
// cut from the symptom and emotion templates at a configurable rate.

#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "doris/core.hpp"
#include "doris/keywords.hpp"
#include "doris/templates.hpp"
#include "doris/util.hpp"

namespace doris {

struct SynthConfig {
  std::size_t n_users = 2000;
  double prevalence = 0.05;
  std::size_t posts_per_user = 69;
  double injection_rate = 0.3;
  std::uint64_t seed = 7;
  // Chance that any user's post carries a template fragment that names no
  // criterion keyword ("frequently stay up late"). Moves every user toward the
  // templates in embedding space without creating annotatable evidence.
  double distractor_rate = 0.1;
  int max_segments = 1;
};

struct SynthStats {
  std::size_t positive_users = 0;
  std::size_t positive_posts = 0;
  std::size_t injected_posts = 0;
  std::size_t total_posts = 0;
};

namespace synth {

// Everyday topics for neutral posts. Each frame has one '%' slot filled from
// the topic's fill list. Every user writes about a few topics only, which
// gives post histories realistic between-user variation.
struct Topic {
  std::vector<std::string> frames;
  std::vector<std::string> fills;
};

inline const std::vector<Topic>& neutral_topics() {
  static const std::vector<Topic> v = {
      {{"Went to % this morning.", "Stopped by % after work.", "Spent the afternoon at %.",
        "Picked up groceries near %.", "Walked over to % with the neighbors.", "Drove to % for a quick errand."},
       {"the farmers market", "the new bakery downtown", "the library", "the hardware store",
        "the post office", "the community garden", "the bookstore", "the city hall plaza",
        "the old harbor", "the train station", "the coffee shop on main street", "the bike shop"}},
      {{"Made % for dinner tonight.", "Tried a new recipe for %.", "Ordered % from the place around the corner.",
        "Cooked a big batch of % for the week.", "Lunch today was %.", "Finally learned how to make %."},
       {"lentil soup", "mushroom risotto", "chicken curry", "veggie lasagna", "fish tacos", "banana bread",
        "pad thai", "black bean chili", "homemade pizza", "tomato pasta", "ramen", "stuffed peppers"}},
      {{"Watched the % game with friends.", "The % won again on Sunday.", "Got tickets for the % match next month.",
        "Listening to the % broadcast on the radio.", "Our office pool picked the % this week.",
        "Bought a new % jersey."},
       {"Lakers", "Yankees", "Celtics", "Packers", "Red Sox", "Warriors", "Dodgers", "Bruins", "Giants",
        "Mariners", "Cubs", "Raptors"}},
      {{"Planted % in the backyard.", "The % in the garden are coming along.", "Picked the first % of the season.",
        "Watered the % before work.", "Need to repot the %.", "Bought seeds for % at the nursery."},
       {"tomatoes", "sunflowers", "basil", "strawberries", "peppers", "tulips", "zucchini", "lettuce",
        "lavender", "carrots", "roses", "blueberries"}},
      {{"Spent the day updating the % at work.", "Our team finished the % ahead of schedule.",
        "Presented the % to the client today.", "Reviewing the % before Friday.",
        "The % meeting ran long but went fine.", "Drafted a proposal for the %."},
       {"quarterly budget", "inventory system", "website redesign", "shipping schedule", "training manual",
        "sales report", "vendor contract", "database migration", "marketing plan", "floor layout",
        "holiday roster", "supplier list"}},
      {{"Booked a weekend trip to %.", "Looking at photos from our visit to %.", "The flight to % leaves at noon.",
        "Found cheap train fares to %.", "My cousin just moved to %.", "Reading a travel guide about %."},
       {"Lisbon", "Chicago", "Kyoto", "Vancouver", "Santa Fe", "Edinburgh", "Austin", "Montreal", "Oaxaca",
        "Portland", "Prague", "Savannah"}},
      {{"Took the % to the vet for a checkup.", "The % figured out how to open the pantry door.",
        "Bought a new bed for the %.", "Long walk with the % around the lake.", "The % learned a new trick.",
        "Brushed the % on the porch."},
       {"dog", "puppy", "cat", "kitten", "beagle", "parrot", "rabbit", "terrier", "golden retriever",
        "hamster", "tabby", "corgi"}},
      {{"Practicing % for the recital.", "Found an old % record at the thrift store.",
        "Band rehearsal tonight, working on %.", "Streaming a % playlist while cleaning.",
        "Signed up for % lessons.", "The % concert is sold out."},
       {"piano", "jazz", "guitar", "blues", "violin", "folk", "drums", "bluegrass", "cello", "salsa", "choir",
        "ukulele"}},
      {{"Updated the % software.", "Ordered a replacement % charger.", "Set up the new % in the living room.",
        "The % needs a firmware update.", "Backed up the % to the external drive.",
        "Comparing prices on a new %."},
       {"laptop", "phone", "router", "printer", "tablet", "smart speaker", "camera", "monitor", "game console",
        "e-reader", "smartwatch", "projector"}},
      {{"Halfway through % and enjoying the plot.", "Book club is reading % this month.",
        "Watched % again on the weekend.", "Borrowed % from the library.", "The sequel to % comes out soon.",
        "Finished % on the train."},
       {"a mystery novel", "a spy thriller", "a history of bridges", "a cookbook memoir", "a space opera",
        "a biography of a chess player", "a detective series", "a nature documentary", "a courtroom drama",
        "a sailing adventure", "a baking show", "a heist movie"}},
      {{"Forecast says % for the weekend.", "Woke up to % outside.", "Another day of % in the city.",
        "Packed an umbrella because of the %.", "The % made the commute slow.", "Nice to see % after the storm."},
       {"light rain", "clear skies", "fog", "a cold front", "warm sunshine", "heavy snow", "strong wind",
        "scattered showers", "hail", "mild temperatures", "a heat wave", "drizzle"}},
      {{"My niece turned % today.", "Family dinner at grandma's for her %.", "Helping my brother plan his %.",
        "Sent a card for the %.", "Picked up decorations for the %.", "Cousins are visiting for the %."},
       {"five", "the anniversary party", "the graduation", "the reunion", "the baby shower", "the housewarming",
        "the retirement party", "the wedding", "the christening", "the birthday picnic", "the barbecue",
        "the holiday brunch"}},
  };
  return v;
}

// A user's topic mix: a few topics with random weights.
struct TopicProfile {
  std::vector<std::size_t> topics;
  std::vector<double> cumulative;
};

inline TopicProfile topic_profile(Rng& rng, std::size_t n_topics = 3) {
  std::vector<std::size_t> all(neutral_topics().size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  rng.shuffle(all);
  TopicProfile p;
  double total = 0.0;
  for (std::size_t i = 0; i < n_topics && i < all.size(); ++i) {
    p.topics.push_back(all[i]);
    total += 0.2 + rng.uniform01();
    p.cumulative.push_back(total);
  }
  for (double& c : p.cumulative) c /= total;
  return p;
}

inline std::string topic_sentence(const Topic& t, Rng& rng) {
  std::string frame = rng.pick(t.frames);
  const auto pos = frame.find('%');
  return frame.replace(pos, 1, rng.pick(t.fills));
}

inline std::string neutral_sentence(Rng& rng, const TopicProfile& profile) {
  const double u = rng.uniform01();
  std::size_t k = 0;
  while (k + 1 < profile.cumulative.size() && u >= profile.cumulative[k]) ++k;
  const Topic& t = neutral_topics()[profile.topics[k]];
  std::string s = topic_sentence(t, rng);
  if (rng.bernoulli(0.4)) s += " " + topic_sentence(t, rng);
  return s;
}

// Comma-separated fragments of a template that the keyword tables detect
// (or, with detectable = false, that they do not).
inline std::vector<std::string> template_segments(std::string_view text, bool detectable) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    auto seg = std::string(trim(cur));
    cur.clear();
    while (!seg.empty() && (seg.back() == '.' || seg.back() == ',')) seg.pop_back();
    for (std::string_view lead : {"and ", "or "}) {
      if (seg.starts_with(lead)) seg = seg.substr(lead.size());
    }
    if (seg.empty()) return;
    const bool symptom = keywords::detect_symptoms(seg).any();
    bool emotion = false;
    for (int c : keywords::count_emotions(seg)) emotion = emotion || c > 0;
    if ((symptom || emotion) == detectable) out.push_back(seg);
  };
  for (char c : text) {
    if (c == ',') flush();
    else cur.push_back(c);
  }
  flush();
  return out;
}

struct InjectionPool {
  std::vector<std::vector<std::string>> symptom;  // one list per criterion
  std::vector<std::vector<std::string>> emotion;  // anxiety, sadness
  std::vector<std::string> distractor;
};

inline const InjectionPool& injection_pool() {
  static const InjectionPool pool = [] {
    InjectionPool p;
    const auto reg = TemplateRegistry::builtin();
    for (const auto& s : reg.symptoms()) {
      p.symptom.push_back(template_segments(s.text, true));
      for (auto& d : template_segments(s.text, false)) p.distractor.push_back(std::move(d));
    }
    for (const auto& e : reg.emotions()) {
      if (e.emotion == Emotion::kAnxiety || e.emotion == Emotion::kSadness) {
        p.emotion.push_back(template_segments(e.text, true));
      }
      for (auto& d : template_segments(e.text, false)) p.distractor.push_back(std::move(d));
    }
    return p;
  }();
  return pool;
}

inline std::string capitalized(std::string phrase) {
  if (!phrase.empty() && phrase[0] >= 'a' && phrase[0] <= 'z') phrase[0] = static_cast<char>(phrase[0] - 'a' + 'A');
  return phrase + ".";
}

inline std::string injected_phrase(Rng& rng, int max_segments) {
  const auto& pool = injection_pool();
  const auto& source = rng.bernoulli(0.8) ? rng.pick(pool.symptom) : rng.pick(pool.emotion);
  std::string phrase = rng.pick(source);
  const auto extra = rng.uniform_int(0, std::max(0, max_segments - 1));
  for (std::int64_t i = 0; i < extra; ++i) phrase += ", " + rng.pick(source);
  return capitalized(std::move(phrase));
}

inline std::string distractor_phrase(Rng& rng) { return capitalized(rng.pick(injection_pool().distractor)); }

// True if the text carries any keyword from the symptom or emotion tables;
// neutral sentences never do, so this identifies injected posts exactly.
inline bool carries_injection(std::string_view text) {
  if (keywords::detect_symptoms(text).any()) return true;
  for (int c : keywords::count_emotions(text))
    if (c > 0) return true;
  return false;
}

inline std::string padded(std::size_t value, int width) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%0*zu", width, value);
  return buf;
}

}  // namespace synth

inline void validate(const SynthConfig& c) {
  if (c.n_users == 0) throw ValidationError("synth: n_users must be positive");
  if (!(c.prevalence > 0.0 && c.prevalence < 1.0)) {
    throw ValidationError("synth: prevalence must lie in (0, 1)");
  }
  if (c.posts_per_user == 0) throw ValidationError("synth: posts_per_user must be positive");
  if (!(c.injection_rate >= 0.0 && c.injection_rate <= 1.0)) {
    throw ValidationError("synth: injection_rate must lie in [0, 1]");
  }
}

inline std::vector<UserRecord> generate(const SynthConfig& config, SynthStats* stats = nullptr) {
  using namespace std::chrono;
  validate(config);
  Rng rng(config.seed);
  const std::size_t n = config.n_users;
  const auto n_pos = static_cast<std::size_t>(std::llround(static_cast<double>(n) * config.prevalence));

  std::vector<std::size_t> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = i;
  rng.shuffle(ids);
  std::vector<int> labels(n, 0);
  for (std::size_t k = 0; k < n_pos && k < n; ++k) labels[ids[k]] = 1;

  const auto lo = static_cast<std::int64_t>((config.posts_per_user + 1) / 2);
  const auto hi = static_cast<std::int64_t>(config.posts_per_user + config.posts_per_user / 2);
  const Timestamp anchor = sys_days{year{2023} / June / 30};
  constexpr std::int64_t kSpan = 180LL * 24 * 3600;

  SynthStats s;
  std::vector<UserRecord> out;
  out.reserve(n);
  const int width = n >= 100000 ? 6 : 5;
  for (std::size_t u = 0; u < n; ++u) {
    UserRecord rec;
    rec.user_id = "u" + synth::padded(u + 1, width);
    rec.label = labels[u];
    const Timestamp end = anchor - seconds{rng.uniform_int(0, 30LL * 24 * 3600)};
    const auto count = static_cast<std::size_t>(rng.uniform_int(lo, std::max(lo, hi)));
    const auto profile = synth::topic_profile(rng);
    std::vector<std::pair<Timestamp, std::string>> posts;
    posts.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
      const Timestamp t = end - seconds{rng.uniform_int(0, kSpan)};
      std::string text = synth::neutral_sentence(rng, profile);
      if (rng.bernoulli(config.distractor_rate)) text += " " + synth::distractor_phrase(rng);
      if (labels[u] == 1 && rng.bernoulli(config.injection_rate)) {
        text += " " + synth::injected_phrase(rng, config.max_segments);
        ++s.injected_posts;
      }
      posts.emplace_back(t, std::move(text));
    }
    std::stable_sort(posts.begin(), posts.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t k = 0; k < posts.size(); ++k) {
      rec.posts.push_back({rec.user_id + "-p" + synth::padded(k + 1, 4), std::move(posts[k].second),
                           posts[k].first});
    }
    s.total_posts += rec.posts.size();
    if (labels[u] == 1) {
      ++s.positive_users;
      s.positive_posts += rec.posts.size();
    }
    out.push_back(std::move(rec));
  }
  if (stats) *stats = s;
  return out;
}

}  // namespace doris
