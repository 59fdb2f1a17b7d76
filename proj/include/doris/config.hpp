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

// Flat key = value pipeline configuration. Lines starting with '#' are
// comments; unknown keys are rejected. The digest is taken over the
// canonical rendering so formatting differences in the file do not matter.

#pragma once

#include <charconv>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "doris/error.hpp"
#include "doris/gbt.hpp"
#include "doris/mood.hpp"
#include "doris/providers.hpp"
#include "doris/util.hpp"

namespace doris {

struct PipelineConfig {
  std::uint64_t seed = 7;
  std::string data_path = "cohort.jsonl";
  std::string out_dir = "out";
  int history_window_days = 183;

  double criteria_k = 20.0;
  double mood_m = kDefaultMoodPercent;
  double mood_alpha = kDefaultAlpha;
  double mood_beta = kDefaultBeta;

  std::string encoder = "test";  // test | remote
  std::size_t encoder_dim = 384;
  std::uint64_t encoder_seed = 0;
  std::string chat = "mock";  // mock | remote
  int max_concurrency = kDefaultMaxConcurrency;
  std::size_t max_prompt_chars = kDefaultMaxPromptChars;
  std::string base_url = "https://api.openai.com/v1";
  std::string chat_model = "gpt-4o-mini";
  std::string embedding_model = "text-embedding-3-small";
  int timeout_s = 60;
  int retry_max_attempts = 3;
  int retry_base_delay_ms = 1000;
  std::string cache_path;     // empty: <out.dir>/cache.jsonl
  std::string templates_dir;  // empty: built-in templates

  GbtParams gbt;
  double eval_threshold = 0.5;
  int eval_repeats = 1;
  bool explain_enabled = true;
  std::string log_level = "info";
};

namespace config_detail {

inline std::string fmt_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

template <typename T>
T parse_number(std::string_view key, std::string_view s) {
  T v{};
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ValidationError("config: bad value for " + std::string(key) + ": '" +
                          std::string(s) + "'");
  }
  return v;
}

inline bool parse_bool(std::string_view key, std::string_view s) {
  const auto l = to_lower_ascii(s);
  if (l == "true" || l == "1" || l == "yes") return true;
  if (l == "false" || l == "0" || l == "no") return false;
  throw ValidationError("config: bad boolean for " + std::string(key) + ": '" + std::string(s) + "'");
}

}  // namespace config_detail

// Stage names in execution order; each config key is tagged with the first
// stage whose output it can change.
inline constexpr std::array<std::string_view, 9> kStageNames = {
    "ingest", "filter", "annotate", "mood", "featurize", "split", "train", "eval", "explain"};

struct ConfigField {
  std::string key;
  std::string stage;  // empty: does not affect any artifact
  std::function<void(PipelineConfig&, std::string_view)> set;
  std::function<std::string(const PipelineConfig&)> get;
};

inline const std::vector<ConfigField>& config_fields() {
  using namespace config_detail;
  using C = PipelineConfig;
#define DORIS_STR(KEY, STAGE, MEMBER)                                        \
  ConfigField {                                                              \
    KEY, STAGE, [](C& c, std::string_view v) { c.MEMBER = std::string(v); }, \
        [](const C& c) { return c.MEMBER; }                                  \
  }
#define DORIS_NUM(KEY, STAGE, MEMBER)                                                    \
  ConfigField {                                                                          \
    KEY, STAGE,                                                                          \
        [](C& c, std::string_view v) { c.MEMBER = parse_number<decltype(c.MEMBER)>(KEY, v); }, \
        [](const C& c) { return std::to_string(c.MEMBER); }                              \
  }
#define DORIS_DBL(KEY, STAGE, MEMBER)                                                    \
  ConfigField {                                                                          \
    KEY, STAGE,                                                                          \
        [](C& c, std::string_view v) { c.MEMBER = parse_number<double>(KEY, v); },       \
        [](const C& c) { return fmt_double(c.MEMBER); }                                  \
  }
  static const std::vector<ConfigField> fields = {
      DORIS_NUM("seed", "split", seed),
      DORIS_STR("data.path", "", data_path),
      DORIS_STR("out.dir", "", out_dir),
      DORIS_NUM("history.window_days", "ingest", history_window_days),
      DORIS_DBL("criteria.k", "annotate", criteria_k),
      DORIS_DBL("mood.m", "mood", mood_m),
      DORIS_DBL("mood.alpha", "featurize", mood_alpha),
      DORIS_DBL("mood.beta", "featurize", mood_beta),
      DORIS_STR("provider.encoder", "filter", encoder),
      DORIS_NUM("provider.encoder_dim", "filter", encoder_dim),
      DORIS_NUM("provider.encoder_seed", "filter", encoder_seed),
      DORIS_STR("provider.embedding_model", "filter", embedding_model),
      DORIS_STR("provider.base_url", "filter", base_url),
      DORIS_STR("provider.chat", "annotate", chat),
      DORIS_STR("provider.chat_model", "annotate", chat_model),
      DORIS_NUM("provider.max_prompt_chars", "annotate", max_prompt_chars),
      DORIS_NUM("provider.max_concurrency", "", max_concurrency),
      DORIS_NUM("provider.timeout_s", "", timeout_s),
      DORIS_NUM("retry.max_attempts", "", retry_max_attempts),
      DORIS_NUM("retry.base_delay_ms", "", retry_base_delay_ms),
      DORIS_STR("cache.path", "", cache_path),
      DORIS_STR("templates.dir", "filter", templates_dir),
      DORIS_NUM("gbt.n_trees", "train", gbt.n_trees),
      DORIS_DBL("gbt.learning_rate", "train", gbt.learning_rate),
      DORIS_NUM("gbt.max_depth", "train", gbt.max_depth),
      DORIS_NUM("gbt.min_leaf", "train", gbt.min_leaf),
      DORIS_DBL("gbt.subsample", "train", gbt.subsample),
      DORIS_DBL("gbt.pos_weight", "train", gbt.pos_weight),
      DORIS_NUM("gbt.threads", "", gbt.threads),
      DORIS_DBL("eval.threshold", "eval", eval_threshold),
      DORIS_NUM("eval.repeats", "eval", eval_repeats),
      ConfigField{"explain.enabled", "",
                  [](C& c, std::string_view v) { c.explain_enabled = parse_bool("explain.enabled", v); },
                  [](const C& c) { return std::string(c.explain_enabled ? "true" : "false"); }},
      DORIS_STR("log.level", "", log_level),
  };
#undef DORIS_STR
#undef DORIS_NUM
#undef DORIS_DBL
  return fields;
}

inline const ConfigField& config_field(std::string_view key) {
  for (const auto& f : config_fields()) {
    if (f.key == key) return f;
  }
  throw ValidationError("config: unknown key '" + std::string(key) + "'");
}

inline void set_config_value(PipelineConfig& c, std::string_view key, std::string_view value) {
  config_field(key).set(c, value);
}

inline void validate(const PipelineConfig& c) {
  auto bad = [](const std::string& m) { return ValidationError("config: " + m); };
  if (c.history_window_days < 0) throw bad("history.window_days must be >= 0");
  if (!(c.criteria_k >= 0 && c.criteria_k <= 100)) throw bad("criteria.k must lie in [0, 100]");
  if (!(c.mood_m >= 0 && c.mood_m <= 100)) throw bad("mood.m must lie in [0, 100]");
  if (!(c.mood_alpha >= 0) || !(c.mood_beta >= 0)) throw bad("mood.alpha and mood.beta must be >= 0");
  if (c.encoder != "test" && c.encoder != "remote") throw bad("provider.encoder must be test or remote");
  if (c.chat != "mock" && c.chat != "remote") throw bad("provider.chat must be mock or remote");
  if (c.encoder_dim < 8) throw bad("provider.encoder_dim must be >= 8");
  if (c.max_concurrency < 1) throw bad("provider.max_concurrency must be >= 1");
  if (c.max_prompt_chars < 256) throw bad("provider.max_prompt_chars must be >= 256");
  if (c.retry_max_attempts < 1) throw bad("retry.max_attempts must be >= 1");
  if (c.retry_base_delay_ms < 0) throw bad("retry.base_delay_ms must be >= 0");
  if (c.timeout_s < 1) throw bad("provider.timeout_s must be >= 1");
  if (!(c.eval_threshold >= 0 && c.eval_threshold <= 1)) throw bad("eval.threshold must lie in [0, 1]");
  if (c.eval_repeats < 1) throw bad("eval.repeats must be >= 1");
  validate_params(c.gbt);
}

inline PipelineConfig parse_config(std::string_view text) {
  PipelineConfig c;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const auto line = trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') {
      if (end == text.size()) break;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ValidationError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    try {
      set_config_value(c, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ValidationError& e) {
      throw ValidationError("config line " + std::to_string(line_no) + ": " + e.what());
    }
    if (end == text.size()) break;
  }
  validate(c);
  return c;
}

inline PipelineConfig load_config(const std::string& path) { return parse_config(read_file(path)); }

// One "key = value" line per field, in declaration order.
inline std::string render_config(const PipelineConfig& c) {
  std::string out;
  for (const auto& f : config_fields()) out += f.key + " = " + f.get(c) + "\n";
  return out;
}

inline std::string config_digest(const PipelineConfig& c) { return sha256_hex(render_config(c)); }

// Values of the keys tagged with `stage`, rendered like render_config.
inline std::string stage_config(const PipelineConfig& c, std::string_view stage) {
  std::string out;
  for (const auto& f : config_fields()) {
    if (f.stage == stage) out += f.key + " = " + f.get(c) + "\n";
  }
  return out;
}

}  // namespace doris
