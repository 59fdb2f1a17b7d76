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

// HTTP providers speaking the common chat-completions / embeddings JSON
// shapes. Requests carry a bearer token from DORIS_API_KEY.

#pragma once

#include <chrono>
#include <cstdlib>
#include <memory>
#include <string>

#include "doris/providers.hpp"
#include "httplib.h"
#include "json.hpp"

namespace doris {

struct RemoteConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string chat_model = "gpt-4o-mini";
  std::string embedding_model = "text-embedding-3-small";
  std::size_t embedding_dim = 0;  // 0: take the dimension of the first response
  std::string api_key;
  double temperature = 0.0;
  std::chrono::seconds timeout{60};
  RetryPolicy retry;
  int max_concurrency = kDefaultMaxConcurrency;
  std::size_t max_prompt_chars = kDefaultMaxPromptChars;
};

inline std::string api_key_from_env() {
  const char* key = std::getenv("DORIS_API_KEY");
  return key ? std::string(key) : std::string();
}

namespace detail {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;    // prefix without trailing slash
};

inline Endpoint split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ValidationError("provider URL needs a scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  Endpoint e;
  e.origin = url.substr(0, path_start);
  e.path = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!e.path.empty() && e.path.back() == '/') e.path.pop_back();
  return e;
}

// One POST with retry on transport errors, 429 and 5xx.
inline std::string post_json(const RemoteConfig& cfg, const std::string& route,
                             const nlohmann::json& body, std::atomic<std::size_t>& calls,
                             RetryStats* stats = nullptr) {
  const Endpoint ep = split_url(cfg.base_url);
  const std::string payload = body.dump();
  auto attempt = [&]() -> AttemptResult {
    calls.fetch_add(1);
    httplib::Client client(ep.origin);
    client.set_connection_timeout(cfg.timeout);
    client.set_read_timeout(cfg.timeout);
    client.set_write_timeout(cfg.timeout);
    httplib::Headers headers;
    if (!cfg.api_key.empty()) headers.emplace("Authorization", "Bearer " + cfg.api_key);
    auto res = client.Post(ep.path + route, headers, payload, "application/json");
    if (!res) {
      return AttemptFailure{"transport error: " + httplib::to_string(res.error()), true};
    }
    if (res->status >= 200 && res->status < 300) return res->body;
    return AttemptFailure{"HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200),
                          is_retryable_status(res->status)};
  };
  return run_with_retry(cfg.retry, attempt, stats);
}

}  // namespace detail

class RemoteChat : public ChatProvider {
 public:
  explicit RemoteChat(RemoteConfig cfg) : cfg_(std::move(cfg)) {}

  std::string name() const override { return "remote-chat:" + cfg_.chat_model; }
  int max_concurrency() const override { return cfg_.max_concurrency; }
  std::size_t max_prompt_chars() const override { return cfg_.max_prompt_chars; }
  std::size_t upstream_calls() const { return calls_.load(); }

 protected:
  std::string complete_impl(std::string_view prompt) const override {
    nlohmann::json body = {
        {"model", cfg_.chat_model},
        {"temperature", cfg_.temperature},
        {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})}};
    const std::string response = detail::post_json(cfg_, "/chat/completions", body, calls_);
    try {
      const auto j = nlohmann::json::parse(response);
      return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw ProviderError(std::string("chat response malformed: ") + e.what());
    }
  }

 private:
  RemoteConfig cfg_;
  mutable std::atomic<std::size_t> calls_{0};
};

class RemoteEncoder : public EncoderProvider {
 public:
  explicit RemoteEncoder(RemoteConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.embedding_dim == 0) {
      throw ValidationError("remote encoder needs provider.encoder_dim");
    }
  }

  std::string name() const override { return "remote-encoder:" + cfg_.embedding_model; }
  std::size_t dim() const override { return cfg_.embedding_dim; }
  std::size_t upstream_calls() const { return calls_.load(); }

 protected:
  Embedding encode_impl(std::string_view text) const override {
    nlohmann::json body = {{"model", cfg_.embedding_model}, {"input", text}};
    const std::string response = detail::post_json(cfg_, "/embeddings", body, calls_);
    Vector v;
    try {
      const auto j = nlohmann::json::parse(response);
      v = j.at("data").at(0).at("embedding").get<Vector>();
    } catch (const nlohmann::json::exception& e) {
      throw ProviderError(std::string("embedding response malformed: ") + e.what());
    }
    if (v.size() != cfg_.embedding_dim) {
      throw ProviderError("embedding has dimension " + std::to_string(v.size()) + ", expected " +
                          std::to_string(cfg_.embedding_dim));
    }
    for (double x : v) {
      if (!std::isfinite(x)) throw ProviderError("embedding contains non-finite values");
    }
    normalize_l2(v);
    return Embedding{std::move(v)};
  }

 private:
  RemoteConfig cfg_;
  mutable std::atomic<std::size_t> calls_{0};
};

}  // namespace doris
