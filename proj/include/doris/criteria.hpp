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

// Diagnostic-criteria features: template-similarity risk scoring, corpus-wide
// top-k% selection for annotation, the annotation grammar, and the per-user
// average of symptom vectors.

#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "doris/core.hpp"
#include "doris/error.hpp"
#include "doris/prompts.hpp"
#include "doris/providers.hpp"
#include "json.hpp"

namespace doris {

using PostIdSet = std::unordered_set<std::string>;

struct RiskScore {
  std::string post_id;
  double score = 0.0;
};

// Mean cosine similarity between a post embedding and the nine symptom
// template embeddings.
inline double mean_template_similarity(const Embedding& post,
                                       std::span<const Embedding> templates) {
  if (templates.size() != kNumCriteria) {
    throw ValidationError("risk score needs 9 symptom embeddings");
  }
  double sum = 0.0;
  for (const auto& t : templates) sum += cosine_similarity(post, t);
  return sum / static_cast<double>(templates.size());
}

inline RiskScore risk_score(const Post& post,
                            std::span<const Embedding> symptom_embeddings,
                            const EncoderProvider& encoder) {
  return {post.post_id,
          mean_template_similarity(encoder.encode(post.text), symptom_embeddings)};
}

// Number of items kept at `percent` of `n`: floor(percent * n / 100).
inline std::size_t top_percent_count(double percent, std::size_t n) {
  if (!(percent >= 0.0 && percent <= 100.0)) {
    throw ValidationError("percentage must lie in [0, 100]");
  }
  return static_cast<std::size_t>(
      std::floor(percent * static_cast<double>(n) / 100.0));
}

// Ids of the top `percent`% items by score; ties by (score desc, id asc).
template <typename IdOf, typename ScoreOf, typename T>
std::vector<std::string> top_percent(std::span<const T> items, double percent,
                                     IdOf id_of, ScoreOf score_of) {
  const std::size_t count = top_percent_count(percent, items.size());
  std::vector<std::size_t> order(items.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  auto better = [&](std::size_t a, std::size_t b) {
    const double sa = score_of(items[a]), sb = score_of(items[b]);
    if (sa != sb) return sa > sb;
    return id_of(items[a]) < id_of(items[b]);
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count),
                    order.end(), better);
  std::vector<std::string> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(id_of(items[order[i]]));
  return out;
}

inline PostIdSet select_top_k(std::span<const RiskScore> scores, double k) {
  const auto ids = top_percent(
      scores, k, [](const RiskScore& r) -> const std::string& { return r.post_id; },
      [](const RiskScore& r) { return r.score; });
  return PostIdSet(ids.begin(), ids.end());
}

inline PostIdSet select_top_k(const std::vector<RiskScore>& scores, double k) {
  return select_top_k(std::span<const RiskScore>(scores), k);
}

// ---------------------------------------------------------------------------
// Annotation grammar:  None | '(' LETTER (',' LETTER)* ')'
// Case-insensitive, whitespace-tolerant; letters A-I only, no repeats.

inline SymptomVector parse_annotation(std::string_view raw) {
  const auto s = trim(raw);
  if (to_lower_ascii(s) == "none") return {};
  auto fail = [&](std::string_view why) -> ParseError {
    return ParseError("unparseable annotation \"" + std::string(raw) +
                      "\": " + std::string(why));
  };
  if (s.size() < 3 || s.front() != '(' || s.back() != ')') {
    throw fail("expected None or (A, B, ...)");
  }
  SymptomVector v;
  bool expect_letter = true;
  bool seen_any = false;
  for (char c : s.substr(1, s.size() - 2)) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') continue;
    if (expect_letter) {
      if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
      if (c < 'A' || c > 'I') throw fail("letter outside A-I");
      const int idx = c - 'A';
      if (v.flags[idx]) throw fail("duplicate letter");
      v.flags[idx] = 1;
      seen_any = true;
      expect_letter = false;
    } else {
      if (c != ',') throw fail("expected ','");
      expect_letter = true;
    }
  }
  if (!seen_any || expect_letter) throw fail("dangling separator");
  return v;
}

inline std::string format_annotation(const SymptomVector& v) {
  if (!v.any()) return "None";
  return prompts::format_letters(v.letters());
}

enum class AnnotationSource { kLlm, kSkippedZero, kMock };

inline std::string_view to_string(AnnotationSource s) {
  switch (s) {
    case AnnotationSource::kLlm: return "llm";
    case AnnotationSource::kSkippedZero: return "skipped_zero";
    case AnnotationSource::kMock: return "mock";
  }
  return "llm";
}

inline AnnotationSource annotation_source_from_string(std::string_view s) {
  if (s == "llm") return AnnotationSource::kLlm;
  if (s == "skipped_zero") return AnnotationSource::kSkippedZero;
  if (s == "mock") return AnnotationSource::kMock;
  throw ValidationError("unknown annotation source: " + std::string(s));
}

struct AnnotationResult {
  std::string post_id;
  std::string raw;
  SymptomVector vector;
  AnnotationSource source = AnnotationSource::kLlm;

  bool operator==(const AnnotationResult&) const = default;
};

inline AnnotationResult skipped_annotation(std::string post_id) {
  return {std::move(post_id), "", {}, AnnotationSource::kSkippedZero};
}

inline nlohmann::json to_json(const AnnotationResult& a) {
  return {{"post_id", a.post_id},
          {"raw", a.raw},
          {"vector", a.vector.flags},
          {"source", to_string(a.source)}};
}

inline AnnotationResult annotation_from_json(const nlohmann::json& j) {
  AnnotationResult a;
  a.post_id = j.at("post_id").get<std::string>();
  a.raw = j.at("raw").get<std::string>();
  const auto flags = j.at("vector").get<std::vector<int>>();
  if (flags.size() != kNumCriteria) {
    throw ValidationError("annotation vector must have 9 entries");
  }
  for (int i = 0; i < kNumCriteria; ++i) {
    if (flags[i] != 0 && flags[i] != 1) {
      throw ValidationError("annotation vector entries must be 0 or 1");
    }
    a.vector.flags[i] = static_cast<std::uint8_t>(flags[i]);
  }
  a.source = annotation_source_from_string(j.at("source").get<std::string>());
  return a;
}

struct AnnotationStats {
  std::atomic<std::size_t> calls{0};
  std::atomic<std::size_t> reasks{0};
  std::atomic<std::size_t> parse_failures{0};
};

// Asks the chat provider which criteria a post exhibits. One re-ask on an
// unparseable reply; after that the post is recorded as all zeros.
inline AnnotationResult annotate_post(const Post& post, const ChatProvider& chat,
                                      AnnotationStats* stats = nullptr) {
  const AnnotationSource source =
      chat.name() == "mock" ? AnnotationSource::kMock : AnnotationSource::kLlm;
  const std::string prompt = prompts::annotation_prompt(post.text);
  std::string raw = chat.complete(prompt);
  if (stats) stats->calls.fetch_add(1);
  try {
    return {post.post_id, raw, parse_annotation(raw), source};
  } catch (const ParseError&) {
  }
  if (stats) stats->reasks.fetch_add(1);
  raw = chat.complete(prompt + std::string(prompts::kAnnotationReask));
  if (stats) stats->calls.fetch_add(1);
  try {
    return {post.post_id, raw, parse_annotation(raw), source};
  } catch (const ParseError& e) {
    if (stats) stats->parse_failures.fetch_add(1);
    log(LogLevel::kWarning, "post " + post.post_id + ": " + e.what() +
                                " after re-ask; recording zeros");
    return {post.post_id, raw, {}, source};
  }
}

// ---------------------------------------------------------------------------

struct CriteriaFeature {
  std::string user_id;
  std::array<double, kNumCriteria> values{};
};

// Entry-wise mean of the symptom vectors of all N posts. Posts missing from
// `annotations` (never selected for annotation) count as zero vectors.
inline CriteriaFeature criteria_feature(
    const UserRecord& user,
    const std::unordered_map<std::string, SymptomVector>& annotations) {
  if (user.posts.empty()) {
    throw ValidationError("criteria_feature: user " + user.user_id +
                          " has no posts");
  }
  std::array<std::size_t, kNumCriteria> counts{};
  for (const auto& p : user.posts) {
    auto it = annotations.find(p.post_id);
    if (it == annotations.end()) continue;
    for (int i = 0; i < kNumCriteria; ++i) counts[i] += it->second.flags[i];
  }
  CriteriaFeature f;
  f.user_id = user.user_id;
  const double n = static_cast<double>(user.posts.size());
  for (int i = 0; i < kNumCriteria; ++i) {
    f.values[i] = static_cast<double>(counts[i]) / n;
  }
  return f;
}

}  // namespace doris
