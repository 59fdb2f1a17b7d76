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

#include "doris/core.hpp"
#include "doris/util.hpp"

using namespace doris;
using std::chrono::days;
using std::chrono::seconds;

namespace {

Post at_day(const std::string& id, int day) {
  return {id, "text " + id, Timestamp{days{day}}};
}

}  // namespace

TEST(Timestamp, ParseAndFormat) {
  auto t = parse_timestamp("2023-03-01T12:30:45Z");
  ASSERT_TRUE(t);
  EXPECT_EQ(format_timestamp(*t), "2023-03-01T12:30:45Z");
  auto off = parse_timestamp("2023-03-01T14:30:45+02:00");
  ASSERT_TRUE(off);
  EXPECT_EQ(*off, *t);
  auto frac = parse_timestamp("2023-03-01T12:30:45.987Z");
  ASSERT_TRUE(frac);
  EXPECT_EQ(*frac, *t);
  for (const char* bad : {"", "2023-13-01T00:00:00Z", "2023-02-30T00:00:00Z", "yesterday", "2023-03-01 12:30:45"}) {
    EXPECT_FALSE(parse_timestamp(bad)) << bad;
  }
}

TEST(Tokenize, LowercaseWords) {
  EXPECT_EQ(tokenize("I can't SLEEP -- self-harm, 'quoted'"),
            (std::vector<std::string>{"i", "can't", "sleep", "self-harm", "quoted"}));
  EXPECT_TRUE(tokenize("  ... !!").empty());
}

TEST(Util, Sha256KnownVector) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Util, RngDeterministic) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.uniform_index(1000), b.uniform_index(1000));
  std::vector<int> v(50);
  std::iota(v.begin(), v.end(), 0);
  auto w = v;
  Rng c(1), d(1);
  c.shuffle(v);
  d.shuffle(w);
  EXPECT_EQ(v, w);
}

TEST(Util, ParallelMapKeepsOrderAndRethrows) {
  std::vector<int> in(200);
  std::iota(in.begin(), in.end(), 0);
  const auto out = parallel_map(in, 8, [](int x) { return x * x; });
  for (int i = 0; i < 200; ++i) EXPECT_EQ(out[i], i * i);
  EXPECT_THROW(parallel_map(in, 4,
                            [](int x) {
                              if (x == 77) throw ValidationError("boom");
                              return x;
                            }),
               ValidationError);
}

TEST(Dataset, LoadsAndSortsPosts) {
  const std::string content =
      R"({"user_id":"u1","label":1,"posts":[{"post_id":"b","text":"later","timestamp":"2023-01-02T00:00:00Z"},{"post_id":"a","text":"earlier","timestamp":"2023-01-01T00:00:00Z"}]})"
      "\n"
      R"({"user_id":"u2","label":0,"posts":[{"post_id":"c","text":"hi","timestamp":"2023-01-01T00:00:00Z"}]})"
      "\n";
  const auto ds = parse_dataset(content);
  ASSERT_EQ(ds.records.size(), 2u);
  EXPECT_EQ(ds.records[0].posts[0].post_id, "a");
  EXPECT_EQ(ds.records[0].label, 1);
  EXPECT_EQ(parse_dataset(serialize_dataset(ds.records)).records, ds.records);
}

TEST(Dataset, ErrorsNameTheProblem) {
  const std::string u = R"({"user_id":"u1","label":0,"posts":[{"post_id":"p","text":"x","timestamp":"2023-01-01T00:00:00Z"}]})";
  const std::string other = R"({"user_id":"u9","label":0,"posts":[{"post_id":"q","text":"x","timestamp":"2023-01-01T00:00:00Z"}]})";
  std::string dup = "\n\n" + u + "\n" + other + "\n\n\n" + R"({"user_id":"u1","label":0,"posts":[{"post_id":"z","text":"x","timestamp":"2023-01-01T00:00:00Z"}]})" + "\n";
  try {
    parse_dataset(dup);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("lines 3 and 7"), std::string::npos) << e.what();
  }
  try {
    parse_dataset(u + "\n{not json\n");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
  try {
    parse_dataset(R"({"user_id":"u1","posts":[{"post_id":"p42","text":"x","timestamp":"last tuesday"}]})");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("p42"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_dataset(u + "\n" + R"({"user_id":"u2","posts":[{"post_id":"p","text":"x","timestamp":"2023-01-01T00:00:00Z"}]})"),
               ValidationError);
}

TEST(Dataset, DropsEmptyPostsAndUsers) {
  const std::string content =
      R"({"user_id":"u1","posts":[{"post_id":"a","text":"   ","timestamp":"2023-01-01T00:00:00Z"},{"post_id":"b","text":"ok","timestamp":"2023-01-01T00:00:00Z"}]})"
      "\n"
      R"({"user_id":"u2","posts":[{"post_id":"c","text":"","timestamp":"2023-01-01T00:00:00Z"}]})";
  const auto ds = parse_dataset(content);
  EXPECT_EQ(ds.records.size(), 1u);
  EXPECT_EQ(ds.dropped_empty_posts, 2u);
  EXPECT_EQ(ds.dropped_empty_users, 1u);
  EXPECT_FALSE(ds.records[0].label);
}

TEST(Truncate, KeepsLastWindow) {
  UserRecord u{"u", {at_day("d0", 0), at_day("d100", 100), at_day("d200", 200)}, 1};
  const auto t = truncate_history(u);
  ASSERT_EQ(t.posts.size(), 2u);
  EXPECT_EQ(t.posts[0].post_id, "d100");
  EXPECT_EQ(t.posts[1].post_id, "d200");
}

TEST(Truncate, BoundaryInclusiveAndIdempotent) {
  UserRecord u{"u", {at_day("a", 0), at_day("b", 17), at_day("c", 183)}, 0};
  const auto t = truncate_history(u);
  EXPECT_EQ(t.posts.size(), 3u);
  u.posts[0].timestamp -= seconds{1};
  const auto t2 = truncate_history(u);
  EXPECT_EQ(t2.posts.size(), 2u);
  EXPECT_EQ(truncate_history(t2), t2);
  UserRecord single{"s", {at_day("x", 5)}, 0};
  EXPECT_EQ(truncate_history(single), single);
  EXPECT_THROW(truncate_history(UserRecord{"e", {}, 0}), ValidationError);
}

TEST(Prediction, ThresholdInclusive) {
  EXPECT_EQ(make_prediction(0.0, 0.5).label, 1);
  EXPECT_EQ(make_prediction(0.0, 0.4999).label, 0);
}
