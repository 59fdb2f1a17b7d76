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

#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>
#include <thread>

#include "doris/mock.hpp"
#include "doris/providers.hpp"
#include "doris/remote.hpp"

using namespace doris;
using namespace std::chrono_literals;

namespace {

class CountingChat : public ChatProvider {
 public:
  std::string name() const override { return "counting"; }
  mutable std::atomic<int> calls{0};

 protected:
  std::string complete_impl(std::string_view prompt) const override {
    calls.fetch_add(1);
    std::this_thread::sleep_for(5ms);
    return "echo:" + std::string(prompt);
  }
};

std::filesystem::path temp_file(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() /
           ("doris_prov_" + std::to_string(::getpid()) + "_" + name);
  std::filesystem::remove(p);
  return p;
}

// Minimal OpenAI-shaped server whose chat endpoint replays a status script.
struct FakeServer {
  httplib::Server server;
  std::thread thread;
  int port = 0;
  std::vector<int> script;
  std::atomic<std::size_t> hits{0};

  explicit FakeServer(std::vector<int> statuses) : script(std::move(statuses)) {
    server.Post("/v1/chat/completions", [this](const httplib::Request&, httplib::Response& res) {
      const std::size_t i = hits.fetch_add(1);
      const int status = i < script.size() ? script[i] : 200;
      res.status = status;
      if (status == 200) {
        res.set_content(R"({"choices":[{"message":{"role":"assistant","content":"hello"}}]})",
                        "application/json");
      } else {
        res.set_content("nope", "text/plain");
      }
    });
    server.Post("/v1/embeddings", [this](const httplib::Request&, httplib::Response& res) {
      hits.fetch_add(1);
      res.set_content(R"({"data":[{"embedding":[3.0,4.0,0.0]}]})", "application/json");
    });
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~FakeServer() {
    server.stop();
    thread.join();
  }

  RemoteConfig config() const {
    RemoteConfig c;
    c.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
    c.retry.base_delay = 1ms;
    c.timeout = 5s;
    return c;
  }
};

}  // namespace

TEST(Cosine, BasicsAndErrors) {
  const std::vector<double> a{1, 0}, b{0, 1}, c{2, 0}, z{0, 0};
  EXPECT_DOUBLE_EQ(cosine_similarity(a, b), 0.0);
  EXPECT_DOUBLE_EQ(cosine_similarity(a, c), 1.0);
  EXPECT_THROW(cosine_similarity(a, z), ValidationError);
  EXPECT_THROW(cosine_similarity(a, std::vector<double>{1, 0, 0}), ValidationError);
  const std::vector<double> nan{std::nan(""), 1};
  EXPECT_THROW(cosine_similarity(a, nan), ValidationError);
  const std::vector<double> x{0.1, 0.2, 0.3};
  const double self = cosine_similarity(x, x);
  EXPECT_LE(self, 1.0);
  EXPECT_NEAR(self, 1.0, 1e-15);
}

TEST(HashingEncoder, UnitNormDeterministicLexical) {
  HashingEncoder enc(384, 0);
  const auto a = enc.encode("I can't sleep at night and feel tired");
  EXPECT_NEAR(l2_norm(a.values), 1.0, 1e-12);
  EXPECT_EQ(a, HashingEncoder(384, 0).encode("I can't sleep at night and feel tired"));
  EXPECT_NE(a, HashingEncoder(384, 1).encode("I can't sleep at night and feel tired"));
  const auto near = enc.encode("I can't sleep and feel so tired");
  const auto far = enc.encode("the garden tomatoes are ripe this week");
  EXPECT_GT(cosine_similarity(a, near), cosine_similarity(a, far));
  EXPECT_NEAR(l2_norm(enc.encode("!!!").values), 1.0, 1e-12);
  EXPECT_THROW(enc.encode("   "), ValidationError);
  EXPECT_THROW(HashingEncoder(4, 0), ValidationError);
}

TEST(Cache, SingleFlightAcrossThreads) {
  auto inner = std::make_shared<CountingChat>();
  auto cache = std::make_shared<ResponseCache>();
  CachedChat chat(inner, cache);
  std::vector<std::thread> ts;
  std::vector<std::string> out(16);
  for (int i = 0; i < 16; ++i) {
    ts.emplace_back([&, i] { out[i] = chat.complete("same prompt"); });
  }
  for (auto& t : ts) t.join();
  EXPECT_EQ(inner->calls.load(), 1);
  for (const auto& s : out) EXPECT_EQ(s, "echo:same prompt");
  EXPECT_EQ(cache->misses(), 1u);
  EXPECT_EQ(cache->hits(), 15u);
}

TEST(Cache, FileBackedReloadAndCorruptLine) {
  const auto path = temp_file("cache.jsonl");
  {
    auto cache = std::make_shared<ResponseCache>(path.string());
    auto inner = std::make_shared<CountingChat>();
    CachedChat chat(inner, cache);
    chat.complete("a");
    chat.complete("b");
    chat.complete("a");
    EXPECT_EQ(inner->calls.load(), 2);
  }
  { std::ofstream(path, std::ios::app) << "{\"digest\": \"trunc"; }
  auto cache = std::make_shared<ResponseCache>(path.string());
  EXPECT_EQ(cache->size(), 2u);
  auto inner = std::make_shared<CountingChat>();
  CachedChat chat(inner, cache);
  EXPECT_EQ(chat.complete("b"), "echo:b");
  EXPECT_EQ(inner->calls.load(), 0);
  std::filesystem::remove(path);
}

TEST(Cache, KeyDependsOnKindProviderPayload) {
  const auto k = ResponseCache::key("complete", "p", "x");
  EXPECT_NE(k, ResponseCache::key("encode", "p", "x"));
  EXPECT_NE(k, ResponseCache::key("complete", "q", "x"));
  EXPECT_NE(k, ResponseCache::key("complete", "p", "y"));
  EXPECT_EQ(k.size(), 64u);
}

TEST(CachedEncoder, ExactRoundTrip) {
  auto inner = std::make_shared<HashingEncoder>(64, 3);
  auto cache = std::make_shared<ResponseCache>();
  CachedEncoder enc(inner, cache);
  const auto first = enc.encode("hello world");
  const auto second = enc.encode("hello world");
  EXPECT_EQ(first, inner->encode("hello world"));
  EXPECT_EQ(first, second);
  EXPECT_EQ(cache->hits(), 1u);
}

TEST(Retry, BackoffSchedule) {
  std::vector<std::chrono::milliseconds> slept;
  int n = 0;
  RetryStats stats;
  const auto r = run_with_retry(
      RetryPolicy{}, [&]() -> AttemptResult {
        if (++n < 3) return AttemptFailure{"HTTP 500", true};
        return std::string("ok");
      },
      &stats, [&](std::chrono::milliseconds d) { slept.push_back(d); });
  EXPECT_EQ(r, "ok");
  EXPECT_EQ(stats.attempts, 3);
  EXPECT_EQ(slept, (std::vector<std::chrono::milliseconds>{1000ms, 2000ms}));
}

TEST(Retry, ExhaustedAndNonRetryable) {
  int n = 0;
  auto no_sleep = [](std::chrono::milliseconds) {};
  try {
    run_with_retry(RetryPolicy{}, [&]() -> AttemptResult { ++n; return AttemptFailure{"x", true}; },
                   nullptr, no_sleep);
    FAIL();
  } catch (const TransportError& e) {
    EXPECT_EQ(e.attempts(), 3);
  }
  EXPECT_EQ(n, 3);
  n = 0;
  EXPECT_THROW(run_with_retry(RetryPolicy{}, [&]() -> AttemptResult { ++n; return AttemptFailure{"400", false}; },
                              nullptr, no_sleep),
               TransportError);
  EXPECT_EQ(n, 1);
  EXPECT_TRUE(is_retryable_status(429));
  EXPECT_TRUE(is_retryable_status(503));
  EXPECT_FALSE(is_retryable_status(400));
  EXPECT_FALSE(is_retryable_status(404));
}

TEST(Remote, RetriesServerErrorsThenSucceeds) {
  FakeServer srv({500, 500, 200});
  RemoteChat chat(srv.config());
  EXPECT_EQ(chat.complete("hi"), "hello");
  EXPECT_EQ(chat.upstream_calls(), 3u);
  EXPECT_EQ(srv.hits.load(), 3u);
}

TEST(Remote, ClientErrorFailsFast) {
  FakeServer srv({400});
  RemoteChat chat(srv.config());
  EXPECT_THROW(chat.complete("hi"), TransportError);
  EXPECT_EQ(srv.hits.load(), 1u);
}

TEST(Remote, GivesUpAfterMaxAttempts) {
  FakeServer srv({503, 503, 503, 503});
  RemoteChat chat(srv.config());
  EXPECT_THROW(chat.complete("hi"), ProviderError);
  EXPECT_EQ(srv.hits.load(), 3u);
}

TEST(Remote, CachedChatAvoidsRepeatCalls) {
  FakeServer srv({});
  auto inner = std::make_shared<RemoteChat>(srv.config());
  CachedChat chat(inner, std::make_shared<ResponseCache>());
  for (int i = 0; i < 5; ++i) EXPECT_EQ(chat.complete("same"), "hello");
  EXPECT_EQ(srv.hits.load(), 1u);
}

TEST(Remote, EncoderNormalizesAndChecksDim) {
  FakeServer srv({});
  auto cfg = srv.config();
  cfg.embedding_dim = 3;
  RemoteEncoder enc(cfg);
  const auto e = enc.encode("x");
  EXPECT_NEAR(e.values[0], 0.6, 1e-12);
  EXPECT_NEAR(e.values[1], 0.8, 1e-12);
  cfg.embedding_dim = 4;
  EXPECT_THROW(RemoteEncoder(cfg).encode("x"), ProviderError);
  cfg.embedding_dim = 0;
  EXPECT_THROW(RemoteEncoder{cfg}, ValidationError);
}

TEST(Remote, UnreachableIsProviderError) {
  RemoteConfig c;
  c.base_url = "http://127.0.0.1:1/v1";
  c.retry.base_delay = 1ms;
  c.timeout = 1s;
  EXPECT_THROW(RemoteChat(c).complete("hi"), ProviderError);
}

TEST(Chat, ContextBudgetEnforced) {
  MockChat chat(2, 100);
  EXPECT_THROW(chat.complete(std::string(101, 'x')), ContextOverflowError);
  EXPECT_THROW(chat.complete("  "), ValidationError);
}
