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

// Text-encoder and chat-completion interfaces, the response cache, retry
// policy, and the deterministic hashing encoder used for offline runs.

#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <future>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <variant>

#include "doris/core.hpp"
#include "doris/error.hpp"
#include "doris/util.hpp"
#include "json.hpp"

namespace doris {

// dot(a, b) / (|a| |b|), clamped to [-1, 1].
inline double cosine_similarity(std::span<const double> a,
                                std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ValidationError("cosine_similarity: dimension mismatch (" +
                          std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()) + ")");
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!std::isfinite(a[i]) || !std::isfinite(b[i])) {
      throw ValidationError("cosine_similarity: non-finite input");
    }
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) {
    throw ValidationError("cosine_similarity: zero-norm input");
  }
  const double c = dot / (std::sqrt(na) * std::sqrt(nb));
  return std::clamp(c, -1.0, 1.0);
}

inline double cosine_similarity(const Embedding& a, const Embedding& b) {
  return cosine_similarity(std::span<const double>(a.values),
                           std::span<const double>(b.values));
}

// Scales `v` to unit L2 norm in place. Throws on a zero vector.
inline void normalize_l2(Vector& v) {
  const double n = l2_norm(v);
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw ProviderError("cannot normalize zero or non-finite embedding");
  }
  for (double& x : v) x /= n;
}

// ---------------------------------------------------------------------------

class EncoderProvider {
 public:
  virtual ~EncoderProvider() = default;

  virtual std::string name() const = 0;
  virtual std::size_t dim() const = 0;

  Embedding encode(std::string_view text) const {
    if (trim(text).empty()) throw ValidationError("encode: empty text");
    return encode_impl(text);
  }

 protected:
  virtual Embedding encode_impl(std::string_view text) const = 0;
};

inline constexpr std::size_t kDefaultMaxPromptChars = 24000;
inline constexpr int kDefaultMaxConcurrency = 4;

class ChatProvider {
 public:
  virtual ~ChatProvider() = default;

  virtual std::string name() const = 0;
  virtual int max_concurrency() const { return kDefaultMaxConcurrency; }
  virtual std::size_t max_prompt_chars() const { return kDefaultMaxPromptChars; }

  std::string complete(std::string_view prompt) const {
    if (trim(prompt).empty()) throw ValidationError("complete: empty prompt");
    if (prompt.size() > max_prompt_chars()) {
      throw ContextOverflowError(
          "prompt of " + std::to_string(prompt.size()) +
          " characters exceeds the budget of " +
          std::to_string(max_prompt_chars()));
    }
    return complete_impl(prompt);
  }

 protected:
  virtual std::string complete_impl(std::string_view prompt) const = 0;
};

// ---------------------------------------------------------------------------
// Retry with exponential backoff.

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds base_delay{1000};
};

// One attempt's outcome: a response, or a failure flagged retryable or not.
struct AttemptFailure {
  std::string message;
  bool retryable = false;
};
using AttemptResult = std::variant<std::string, AttemptFailure>;

struct RetryStats {
  int attempts = 0;
};

// Runs `attempt` until it succeeds, fails non-retryably, or the policy is
// exhausted. Delay before attempt k (k >= 2) is base_delay * 2^(k-2).
inline std::string run_with_retry(
    const RetryPolicy& policy, const std::function<AttemptResult()>& attempt,
    RetryStats* stats = nullptr,
    const std::function<void(std::chrono::milliseconds)>& sleep =
        [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }) {
  const int max_attempts = std::max(1, policy.max_attempts);
  std::string last_error;
  for (int k = 1; k <= max_attempts; ++k) {
    if (k > 1) sleep(policy.base_delay * (1LL << (k - 2)));
    if (stats) stats->attempts = k;
    auto result = attempt();
    if (auto* ok = std::get_if<std::string>(&result)) return std::move(*ok);
    auto& failure = std::get<AttemptFailure>(result);
    last_error = failure.message;
    if (!failure.retryable) {
      throw TransportError("request failed (not retryable): " + last_error, k);
    }
    log(LogLevel::kWarning, "attempt " + std::to_string(k) + "/" +
                                std::to_string(max_attempts) +
                                " failed: " + last_error);
  }
  throw TransportError("retries exhausted after " +
                           std::to_string(max_attempts) +
                           " attempts: " + last_error,
                       max_attempts);
}

// HTTP 429 and 5xx are transient; every other 4xx is a caller error.
inline bool is_retryable_status(int status) {
  return status == 429 || (status >= 500 && status <= 599);
}

// ---------------------------------------------------------------------------
// Response cache: content digest -> response string. Optionally backed by an
// append-only JSONL file of {"digest", "response"} records. Concurrent
// requests for the same key are collapsed into one computation.

class ResponseCache {
 public:
  // In-memory only.
  ResponseCache() = default;

  // File-backed. Existing entries are loaded; a truncated final line (from a
  // crash mid-write) is ignored.
  explicit ResponseCache(std::string path) : path_(std::move(path)) {
    std::ifstream in(path_);
    std::string line;
    while (std::getline(in, line)) {
      if (trim(line).empty()) continue;
      try {
        auto j = nlohmann::json::parse(line);
        entries_[j.at("digest").get<std::string>()] =
            j.at("response").get<std::string>();
      } catch (const nlohmann::json::exception&) {
        log(LogLevel::kWarning, "cache: skipping unreadable line in " + path_);
      }
    }
  }

  static std::string key(std::string_view kind, std::string_view provider,
                         std::string_view payload) {
    return sha256_hex(
        nlohmann::json::array({kind, provider, payload}).dump());
  }

  std::optional<std::string> get(const std::string& digest) const {
    std::shared_lock lock(mu_);
    if (auto it = entries_.find(digest); it != entries_.end()) return it->second;
    return std::nullopt;
  }

  void put(const std::string& digest, const std::string& response) {
    std::unique_lock lock(mu_);
    if (!entries_.emplace(digest, response).second) return;
    if (!path_.empty()) {
      std::ofstream out(path_, std::ios::app | std::ios::binary);
      out << nlohmann::json{{"digest", digest}, {"response", response}}.dump()
          << '\n';
      out.flush();
      if (!out) throw Error("cache: append failed: " + path_);
    }
  }

  // Returns the cached value for `digest`, or runs `compute` exactly once
  // (across threads) and stores its result.
  std::string get_or_compute(const std::string& digest,
                             const std::function<std::string()>& compute) {
    if (auto hit = get(digest)) {
      hits_.fetch_add(1);
      return *hit;
    }
    std::promise<std::string> promise;
    std::shared_future<std::string> future;
    bool owner = false;
    {
      std::lock_guard lock(flight_mu_);
      if (auto hit = get(digest)) {
        hits_.fetch_add(1);
        return *hit;
      }
      auto it = in_flight_.find(digest);
      if (it == in_flight_.end()) {
        future = promise.get_future().share();
        in_flight_.emplace(digest, future);
        owner = true;
      } else {
        future = it->second;
      }
    }
    if (!owner) {
      hits_.fetch_add(1);
      return future.get();
    }
    misses_.fetch_add(1);
    try {
      std::string value = compute();
      put(digest, value);
      promise.set_value(value);
      std::lock_guard lock(flight_mu_);
      in_flight_.erase(digest);
      return value;
    } catch (...) {
      promise.set_exception(std::current_exception());
      std::lock_guard lock(flight_mu_);
      in_flight_.erase(digest);
      throw;
    }
  }

  std::size_t size() const {
    std::shared_lock lock(mu_);
    return entries_.size();
  }
  std::size_t hits() const { return hits_.load(); }
  std::size_t misses() const { return misses_.load(); }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  mutable std::shared_mutex mu_;
  std::unordered_map<std::string, std::string> entries_;
  std::mutex flight_mu_;
  std::unordered_map<std::string, std::shared_future<std::string>> in_flight_;
  std::atomic<std::size_t> hits_{0};
  std::atomic<std::size_t> misses_{0};
};

// Serializes an embedding exactly (shortest round-trip decimal form).
inline std::string embedding_to_string(const Embedding& e) {
  return nlohmann::json(e.values).dump();
}

inline Embedding embedding_from_string(const std::string& s) {
  return Embedding{nlohmann::json::parse(s).get<Vector>()};
}

class CachedEncoder : public EncoderProvider {
 public:
  CachedEncoder(std::shared_ptr<const EncoderProvider> inner,
                std::shared_ptr<ResponseCache> cache)
      : inner_(std::move(inner)), cache_(std::move(cache)) {}

  std::string name() const override { return inner_->name(); }
  std::size_t dim() const override { return inner_->dim(); }
  const ResponseCache& cache() const { return *cache_; }

 protected:
  Embedding encode_impl(std::string_view text) const override {
    const auto digest = ResponseCache::key("encode", inner_->name(), text);
    return embedding_from_string(cache_->get_or_compute(
        digest, [&] { return embedding_to_string(inner_->encode(text)); }));
  }

 private:
  std::shared_ptr<const EncoderProvider> inner_;
  std::shared_ptr<ResponseCache> cache_;
};

class CachedChat : public ChatProvider {
 public:
  CachedChat(std::shared_ptr<const ChatProvider> inner,
             std::shared_ptr<ResponseCache> cache)
      : inner_(std::move(inner)), cache_(std::move(cache)) {}

  std::string name() const override { return inner_->name(); }
  int max_concurrency() const override { return inner_->max_concurrency(); }
  std::size_t max_prompt_chars() const override {
    return inner_->max_prompt_chars();
  }
  const ResponseCache& cache() const { return *cache_; }

 protected:
  std::string complete_impl(std::string_view prompt) const override {
    const auto digest = ResponseCache::key("complete", inner_->name(), prompt);
    return cache_->get_or_compute(digest,
                                  [&] { return inner_->complete(prompt); });
  }

 private:
  std::shared_ptr<const ChatProvider> inner_;
  std::shared_ptr<ResponseCache> cache_;
};

// ---------------------------------------------------------------------------
// Deterministic hashing encoder. Lowercased word unigrams and bigrams are
// hashed into `dim` buckets with a hash-derived sign, then L2-normalized.
// Texts that share words land in shared buckets and so have higher cosine
// similarity than disjoint texts.

class HashingEncoder : public EncoderProvider {
 public:
  HashingEncoder(std::size_t dim, std::uint64_t seed) : dim_(dim), seed_(seed) {
    if (dim < 8) throw ValidationError("hashing encoder needs dim >= 8");
  }

  std::string name() const override {
    return "hashing-d" + std::to_string(dim_) + "-s" + std::to_string(seed_);
  }
  std::size_t dim() const override { return dim_; }

 protected:
  Embedding encode_impl(std::string_view text) const override {
    Vector v(dim_, 0.0);
    const auto tokens = tokenize(text);
    auto add = [&](std::string_view feature) {
      const std::uint64_t h = fnv1a64(feature, seed_);
      const std::size_t bucket = static_cast<std::size_t>(h % dim_);
      v[bucket] += (h >> 63) ? -1.0 : 1.0;
    };
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      add(tokens[i]);
      if (i + 1 < tokens.size()) add(tokens[i] + ' ' + tokens[i + 1]);
    }
    if (l2_norm(v) == 0.0) {
      // No word tokens, or the signed buckets cancelled exactly.
      add(std::string("\x01raw:") + std::string(text));
      if (l2_norm(v) == 0.0) v[0] = 1.0;
    }
    normalize_l2(v);
    return Embedding{std::move(v)};
  }

 private:
  std::size_t dim_;
  std::uint64_t seed_;
};

inline std::shared_ptr<EncoderProvider> deterministic_test_encoder(
    std::size_t dim, std::uint64_t seed) {
  return std::make_shared<HashingEncoder>(dim, seed);
}

}  // namespace doris
