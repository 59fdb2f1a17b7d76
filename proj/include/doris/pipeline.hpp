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

// End-to-end pipeline: in-memory stage functions, the ablation harness, and
// the resumable on-disk runner used by the CLI.

#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "doris/config.hpp"
#include "doris/core.hpp"
#include "doris/criteria.hpp"
#include "doris/eval.hpp"
#include "doris/explain.hpp"
#include "doris/features.hpp"
#include "doris/gbt.hpp"
#include "doris/isotonic.hpp"
#include "doris/mock.hpp"
#include "doris/mood.hpp"
#include "doris/providers.hpp"
#include "doris/remote.hpp"
#include "doris/templates.hpp"

namespace doris {

// ---------------------------------------------------------------------------
// Providers.

struct Providers {
  std::shared_ptr<const EncoderProvider> encoder;
  std::shared_ptr<const ChatProvider> chat;
  std::shared_ptr<ResponseCache> cache;
};

inline RemoteConfig remote_config(const PipelineConfig& c) {
  RemoteConfig r;
  r.base_url = c.base_url;
  r.chat_model = c.chat_model;
  r.embedding_model = c.embedding_model;
  r.embedding_dim = c.encoder_dim;
  r.api_key = api_key_from_env();
  r.timeout = std::chrono::seconds(c.timeout_s);
  r.retry.max_attempts = c.retry_max_attempts;
  r.retry.base_delay = std::chrono::milliseconds(c.retry_base_delay_ms);
  r.max_concurrency = c.max_concurrency;
  r.max_prompt_chars = c.max_prompt_chars;
  return r;
}

// The hashing encoder is cheap and pure, so only remote embeddings go through
// the cache. Chat calls always do.
inline Providers make_providers(const PipelineConfig& c, std::shared_ptr<ResponseCache> cache) {
  Providers p;
  p.cache = std::move(cache);
  if (c.encoder == "test") {
    p.encoder = std::make_shared<HashingEncoder>(c.encoder_dim, c.encoder_seed);
  } else {
    p.encoder = std::make_shared<CachedEncoder>(std::make_shared<RemoteEncoder>(remote_config(c)), p.cache);
  }
  std::shared_ptr<const ChatProvider> chat;
  if (c.chat == "mock") {
    chat = std::make_shared<MockChat>(c.max_concurrency, c.max_prompt_chars);
  } else {
    chat = std::make_shared<RemoteChat>(remote_config(c));
  }
  p.chat = std::make_shared<CachedChat>(std::move(chat), p.cache);
  return p;
}

inline std::string default_cache_path(const PipelineConfig& c) {
  return c.cache_path.empty() ? (std::filesystem::path(c.out_dir) / "cache.jsonl").string()
                              : c.cache_path;
}

inline TemplateRegistry load_templates(const PipelineConfig& c) {
  return c.templates_dir.empty() ? TemplateRegistry::builtin()
                                 : TemplateRegistry::from_directory(c.templates_dir);
}

// ---------------------------------------------------------------------------
// In-memory stages.

inline std::vector<UserRecord> truncate_all(const std::vector<UserRecord>& records, int window_days) {
  std::vector<UserRecord> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(truncate_history(r, std::chrono::days{window_days}));
  return out;
}

struct ScoredPost {
  std::string post_id;
  std::string user_id;
  double risk = 0.0;
  std::array<double, kNumEmotions> emotions{};
};

inline nlohmann::json to_json(const ScoredPost& s) {
  return {{"post_id", s.post_id}, {"user_id", s.user_id}, {"risk", s.risk}, {"emotions", s.emotions}};
}

inline ScoredPost scored_post_from_json(const nlohmann::json& j) {
  return {j.at("post_id").get<std::string>(), j.at("user_id").get<std::string>(),
          j.at("risk").get<double>(), j.at("emotions").get<std::array<double, kNumEmotions>>()};
}

// Risk score and the five emotion scores of every post, in dataset order.
// `templates` must already be embedded with `encoder`.
inline std::vector<ScoredPost> score_posts(const std::vector<UserRecord>& records,
                                           const TemplateRegistry& templates,
                                           const EncoderProvider& encoder, int concurrency) {
  const auto symptom_emb = templates.symptom_embeddings();
  const auto emotion_emb = templates.emotion_embeddings();
  auto per_user = parallel_map(records, concurrency, [&](const UserRecord& u) {
    std::vector<ScoredPost> out;
    out.reserve(u.posts.size());
    for (const auto& p : u.posts) {
      const Embedding e = encoder.encode(p.text);
      ScoredPost s{p.post_id, u.user_id, mean_template_similarity(e, symptom_emb), {}};
      s.emotions = emotion_scores(p.post_id, e, emotion_emb).scores;
      out.push_back(std::move(s));
    }
    return out;
  });
  std::vector<ScoredPost> all;
  for (auto& v : per_user) {
    for (auto& s : v) all.push_back(std::move(s));
  }
  return all;
}

// Top-k% by risk go to the chat provider; everything else is recorded as a
// skipped zero vector. Output follows dataset post order.
inline std::vector<AnnotationResult> annotate_corpus(const std::vector<UserRecord>& records,
                                                     const std::vector<ScoredPost>& scores, double k,
                                                     const ChatProvider& chat,
                                                     AnnotationStats* stats = nullptr) {
  std::vector<RiskScore> risk;
  risk.reserve(scores.size());
  for (const auto& s : scores) risk.push_back({s.post_id, s.risk});
  const PostIdSet selected = select_top_k(risk, k);

  std::vector<const Post*> posts;
  for (const auto& u : records) {
    for (const auto& p : u.posts) posts.push_back(&p);
  }
  return parallel_map(posts, chat.max_concurrency(), [&](const Post* p) {
    if (!selected.contains(p->post_id)) return skipped_annotation(p->post_id);
    return annotate_post(*p, chat, stats);
  });
}

inline std::vector<MoodCourse> mood_courses(const std::vector<UserRecord>& records,
                                            const std::vector<ScoredPost>& scores, double m,
                                            const ChatProvider& chat) {
  std::vector<EmotionScores> emo;
  emo.reserve(scores.size());
  for (const auto& s : scores) emo.push_back({s.post_id, s.emotions});
  const PostIdSet emotional = select_emotional(emo, m);
  return parallel_map(records, chat.max_concurrency(), [&](const UserRecord& u) {
    MoodCourse mc;
    mc.user_id = u.user_id;
    for (const Post* p : emotional_posts(u, emotional)) mc.emotional_post_ids.push_back(p->post_id);
    mc.summary = summarize_mood_course(u, emotional, chat);
    return mc;
  });
}

inline std::vector<UserFeatures> featurize(const std::vector<UserRecord>& records,
                                           const std::vector<AnnotationResult>& annotations,
                                           const std::vector<MoodCourse>& moods, double alpha,
                                           double beta, const EncoderProvider& encoder,
                                           int concurrency) {
  std::unordered_map<std::string, SymptomVector> vectors;
  vectors.reserve(annotations.size());
  for (const auto& a : annotations) vectors.emplace(a.post_id, a.vector);
  std::unordered_map<std::string, const MoodCourse*> mood_of;
  for (const auto& m : moods) mood_of.emplace(m.user_id, &m);

  return parallel_map(records, concurrency, [&](const UserRecord& u) {
    auto it = mood_of.find(u.user_id);
    if (it == mood_of.end()) throw ValidationError("featurize: no mood course for " + u.user_id);
    const MoodCourse& mc = *it->second;
    const PostIdSet emotional_ids(mc.emotional_post_ids.begin(), mc.emotional_post_ids.end());

    std::vector<Embedding> all, emotional;
    all.reserve(u.posts.size());
    for (const auto& p : u.posts) {
      all.push_back(encoder.encode(p.text));
      if (emotional_ids.contains(p.post_id)) emotional.push_back(all.back());
    }
    if (emotional.size() != emotional_ids.size()) {
      throw ValidationError("featurize: mood course of " + u.user_id + " names unknown posts");
    }
    Vector f_history = post_history_representation(all);
    Vector f_mood = mood_representation(mc.summary, emotional, alpha, beta, encoder);
    const auto f_criteria = criteria_feature(u, vectors).values;
    return make_user_features(u.user_id, u.label, std::move(f_history), std::move(f_mood), f_criteria);
  });
}

struct FeaturizedCohort {
  std::vector<UserRecord> records;
  std::vector<ScoredPost> scores;
  std::vector<AnnotationResult> annotations;
  std::vector<MoodCourse> moods;
  std::vector<UserFeatures> features;
};

// ingest -> featurize without touching the filesystem.
inline FeaturizedCohort featurize_cohort(const std::vector<UserRecord>& records,
                                         const PipelineConfig& c, const EncoderProvider& encoder,
                                         const ChatProvider& chat, const TemplateRegistry& templates) {
  FeaturizedCohort out;
  out.records = truncate_all(records, c.history_window_days);
  const auto embedded = templates.embed(encoder);
  out.scores = score_posts(out.records, embedded, encoder, c.max_concurrency);
  out.annotations = annotate_corpus(out.records, out.scores, c.criteria_k, chat);
  out.moods = mood_courses(out.records, out.scores, c.mood_m, chat);
  out.features = featurize(out.records, out.annotations, out.moods, c.mood_alpha, c.mood_beta, encoder,
                           c.max_concurrency);
  return out;
}

// ---------------------------------------------------------------------------
// Training, evaluation and ablations.

enum class FeatureSet { kFull, kNoCriteria, kNoMood, kNoHistory, kHistoryOnly };

inline std::string_view to_string(FeatureSet s) {
  switch (s) {
    case FeatureSet::kFull: return "full";
    case FeatureSet::kNoCriteria: return "w/o criteria";
    case FeatureSet::kNoMood: return "w/o mood course";
    case FeatureSet::kNoHistory: return "w/o post history";
    case FeatureSet::kHistoryOnly: return "post history only";
  }
  return "?";
}

// Classifier input for one ablation variant. Removing a component drops its
// term from the fused vector; the stored `fused` is used for kFull.
inline Vector assemble(const UserFeatures& f, FeatureSet s) {
  const Vector zeros(f.f_history.size(), 0.0);
  switch (s) {
    case FeatureSet::kFull: return f.fused;
    case FeatureSet::kNoCriteria: {
      Vector v = f.f_history;
      for (std::size_t i = 0; i < v.size(); ++i) v[i] += f.f_mood[i];
      return v;
    }
    case FeatureSet::kNoMood: return fuse(zeros, f.f_history, f.f_criteria);
    case FeatureSet::kNoHistory: return fuse(f.f_mood, zeros, f.f_criteria);
    case FeatureSet::kHistoryOnly: return f.f_history;
  }
  throw ValidationError("unknown feature set");
}

struct Design {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
};

inline Design design_matrix(const std::vector<UserFeatures>& features,
                            const std::vector<std::string>& ids, FeatureSet set) {
  std::unordered_map<std::string, const UserFeatures*> by_id;
  for (const auto& f : features) by_id.emplace(f.user_id, &f);
  Design d;
  d.rows.reserve(ids.size());
  d.labels.reserve(ids.size());
  for (const auto& id : ids) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw ValidationError("no features for user " + id);
    if (!it->second->label) throw ValidationError("user " + id + " has no label");
    d.rows.push_back(assemble(*it->second, set));
    d.labels.push_back(*it->second->label);
  }
  return d;
}

struct TrainedModel {
  BoostedModel model;
  IsotonicCalibrator calibrator;
};

// Boosting on the train part, isotonic calibration on the validation part.
inline TrainedModel train_and_calibrate(const std::vector<UserFeatures>& features, const Split& split,
                                        const GbtParams& params, FeatureSet set = FeatureSet::kFull) {
  const Design tr = design_matrix(features, split.train, set);
  TrainedModel out;
  out.model = train(tr.rows, tr.labels, params);
  const Design va = design_matrix(features, split.validation, set);
  if (va.rows.size() >= 2) {
    const auto raw = out.model.raw_scores(va.rows);
    out.calibrator = fit_isotonic(raw, va.labels);
  } else {
    log(LogLevel::kWarning, "validation split too small to calibrate; using the logistic link");
  }
  return out;
}

inline const std::vector<std::string>& split_part(const Split& s, std::string_view name) {
  if (name == "train") return s.train;
  if (name == "validation") return s.validation;
  if (name == "test") return s.test;
  throw ValidationError("unknown split '" + std::string(name) + "' (train|validation|test)");
}

inline MetricsReport evaluate_model(const TrainedModel& m, const std::vector<UserFeatures>& features,
                                    const std::vector<std::string>& ids, double threshold,
                                    FeatureSet set = FeatureSet::kFull) {
  const Design d = design_matrix(features, ids, set);
  const auto raw = m.model.raw_scores(d.rows);
  std::vector<double> prob(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) prob[i] = score_user(d.rows[i], m.model, m.calibrator).probability;
  return evaluate(d.labels, raw, prob, threshold);
}

inline std::vector<UserRecord> records_of(const std::vector<UserFeatures>& features) {
  std::vector<UserRecord> out;
  out.reserve(features.size());
  for (const auto& f : features) out.push_back({f.user_id, {}, f.label});
  return out;
}

struct AblationRow {
  FeatureSet set;
  MetricsReport metrics;  // averaged over repeats
  std::vector<MetricsReport> runs;
};

// Each repeat r re-splits with seed + r and retrains every variant on the
// same split.
inline std::vector<AblationRow> run_ablations(const std::vector<UserFeatures>& features,
                                              std::uint64_t seed, int repeats, GbtParams params,
                                              double threshold, std::span<const FeatureSet> sets) {
  std::vector<AblationRow> rows;
  for (auto s : sets) rows.push_back({s, {}, {}});
  const auto recs = records_of(features);
  for (int r = 0; r < repeats; ++r) {
    const Split split = split_cohort(recs, seed + static_cast<std::uint64_t>(r));
    params.subsample_seed = seed + static_cast<std::uint64_t>(r);
    for (auto& row : rows) {
      const auto m = train_and_calibrate(features, split, params, row.set);
      row.runs.push_back(evaluate_model(m, features, split.test, threshold, row.set));
    }
  }
  for (auto& row : rows) row.metrics = average_reports(row.runs);
  return rows;
}

// ---------------------------------------------------------------------------
// On-disk runner.

enum class Stage { kIngest = 0, kFilter, kAnnotate, kMood, kFeaturize, kSplit, kTrain, kEval, kExplain };
inline constexpr int kNumStages = 9;

inline std::string_view to_string(Stage s) { return kStageNames[static_cast<int>(s)]; }

inline Stage stage_from_string(std::string_view s) {
  for (int i = 0; i < kNumStages; ++i) {
    if (kStageNames[i] == s) return static_cast<Stage>(i);
  }
  throw ValidationError("unknown stage '" + std::string(s) + "'");
}

inline constexpr std::array<std::string_view, kNumStages> kStageArtifacts = {
    "dataset.jsonl", "scores.jsonl", "annotations.jsonl", "mood_courses.jsonl", "features.jsonl",
    "split.json",    "model.json",   "report.json",       "explanations/index.json"};

struct RunOptions {
  bool resume = false;       // reuse up-to-date artifacts of every stage
  bool fresh = false;        // recompute upstream stages too (ignored with resume)
  std::optional<std::string> model_path;  // eval/explain: use this instead of model.json
  std::string split = "test";             // eval: which part to score
  std::vector<std::string> users;         // explain: restrict to these users
};

template <typename T, typename ToJson>
std::string jsonl(const std::vector<T>& items, ToJson to) {
  std::string out;
  for (const auto& x : items) {
    out += to(x).dump();
    out += '\n';
  }
  return out;
}

template <typename T, typename FromJson>
std::vector<T> read_jsonl(const std::string& path, FromJson from) {
  const std::string content = read_file(path);
  std::vector<T> out;
  std::size_t pos = 0, line_no = 0;
  while (pos < content.size()) {
    auto end = content.find('\n', pos);
    if (end == std::string::npos) end = content.size();
    ++line_no;
    const auto line = trim(std::string_view(content).substr(pos, end - pos));
    pos = end + 1;
    if (line.empty()) continue;
    try {
      out.push_back(from(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(path + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

class Pipeline {
 public:
  Pipeline(PipelineConfig config, Providers providers)
      : cfg_(std::move(config)), providers_(std::move(providers)), out_(cfg_.out_dir) {
    validate(cfg_);
    std::filesystem::create_directories(out_);
    load_manifest();
  }

  const PipelineConfig& config() const { return cfg_; }
  std::string path(Stage s) const { return (out_ / kStageArtifacts[static_cast<int>(s)]).string(); }
  const AnnotationStats& annotation_stats() const { return annotation_stats_; }
  const std::vector<Stage>& executed() const { return executed_; }

  // Runs every stage up to and including `target`. Upstream stages are reused
  // when their artifact is current; `target` itself is recomputed unless
  // options.resume is set. options.fresh recomputes everything.
  void run(Stage target, const RunOptions& options = {}) {
    opts_ = options;
    for (int i = 0; i <= static_cast<int>(target); ++i) {
      const auto s = static_cast<Stage>(i);
      const bool reuse = options.resume || (s != target && !options.fresh);
      std::string fp;
      try {
        fp = fingerprint(s);
        if (reuse && current(s, fp)) {
          log(LogLevel::kInfo, "stage " + std::string(to_string(s)) + ": up to date");
          continue;
        }
        log(LogLevel::kInfo, "stage " + std::string(to_string(s)) + ": running");
        execute(s);
      } catch (const ProviderError& e) {
        throw ProviderError("stage " + std::string(to_string(s)) + " failed: " + e.what());
      } catch (const ValidationError& e) {
        throw ValidationError("stage " + std::string(to_string(s)) + " failed: " + e.what());
      } catch (const std::exception& e) {
        throw Error("stage " + std::string(to_string(s)) + " failed: " + e.what());
      }
      record(s, fp);
      executed_.push_back(s);
    }
  }

  // Lazily loaded stage outputs.
  const std::vector<UserRecord>& dataset() {
    if (!records_) records_ = load_dataset(path(Stage::kIngest)).records;
    return *records_;
  }
  const std::vector<ScoredPost>& scores() {
    if (!scores_) scores_ = read_jsonl<ScoredPost>(path(Stage::kFilter), scored_post_from_json);
    return *scores_;
  }
  const std::vector<AnnotationResult>& annotations() {
    if (!annotations_) {
      annotations_ = read_jsonl<AnnotationResult>(path(Stage::kAnnotate), annotation_from_json);
    }
    return *annotations_;
  }
  const std::vector<MoodCourse>& moods() {
    if (!moods_) moods_ = read_jsonl<MoodCourse>(path(Stage::kMood), mood_course_from_json);
    return *moods_;
  }
  const std::vector<UserFeatures>& features() {
    if (!features_) features_ = read_jsonl<UserFeatures>(path(Stage::kFeaturize), user_features_from_json);
    return *features_;
  }
  const Split& split() {
    if (!split_) split_ = split_from_json(nlohmann::json::parse(read_file(path(Stage::kSplit))));
    return *split_;
  }
  const TrainedModel& model() {
    if (!model_) {
      auto loaded = load_model(opts_.model_path.value_or(path(Stage::kTrain)));
      model_ = TrainedModel{std::move(loaded.model), std::move(loaded.calibrator)};
    }
    return *model_;
  }

 private:
  std::string stage_digest(Stage s) const {
    const auto it = manifest_["stages"].find(std::string(to_string(s)));
    if (it == manifest_["stages"].end()) return "";
    return it->value("digest", "");
  }

  std::string fingerprint(Stage s) {
    nlohmann::json parts = nlohmann::json::array();
    parts.push_back(std::string(to_string(s)));
    parts.push_back(stage_config(cfg_, to_string(s)));
    if (s == Stage::kIngest) {
      parts.push_back(sha256_hex(read_file(cfg_.data_path)));
    } else if (s == Stage::kFilter) {
      const auto t = load_templates(cfg_);
      parts.push_back(t.symptoms_digest());
      parts.push_back(t.emotions_digest());
    }
    if (s == Stage::kEval || s == Stage::kExplain) {
      parts.push_back(opts_.model_path ? sha256_hex(read_file(*opts_.model_path)) : "");
    }
    if (s == Stage::kEval) parts.push_back(opts_.split);
    if (s == Stage::kExplain) parts.push_back(opts_.users);
    if (s != Stage::kIngest) {
      const auto prev = static_cast<Stage>(static_cast<int>(s) - 1);
      const auto it = manifest_["stages"].find(std::string(to_string(prev)));
      parts.push_back(it == manifest_["stages"].end() ? "" : it->value("fingerprint", ""));
      parts.push_back(stage_digest(prev));
      // Explain reads the model and features as well as the eval report.
      if (s == Stage::kExplain) parts.push_back(stage_digest(Stage::kTrain));
    }
    return sha256_hex(parts.dump());
  }

  bool current(Stage s, const std::string& fp) const {
    const auto it = manifest_["stages"].find(std::string(to_string(s)));
    if (it == manifest_["stages"].end()) return false;
    if (it->value("fingerprint", "") != fp) return false;
    std::error_code ec;
    if (!std::filesystem::exists(path(s), ec)) return false;
    return sha256_hex(read_file(path(s))) == it->value("digest", "");
  }

  void record(Stage s, const std::string& fp) {
    manifest_["stages"][std::string(to_string(s))] = {
        {"fingerprint", fp},
        {"artifact", std::string(kStageArtifacts[static_cast<int>(s)])},
        {"digest", sha256_hex(read_file(path(s)))}};
    manifest_["config_digest"] = config_digest(cfg_);
    const auto tmp = (out_ / "manifest.json.tmp").string();
    write_file(tmp, manifest_.dump(2) + "\n");
    std::filesystem::rename(tmp, out_ / "manifest.json");
  }

  void load_manifest() {
    manifest_ = {{"version", "1"}, {"stages", nlohmann::json::object()}};
    const auto p = out_ / "manifest.json";
    std::error_code ec;
    if (!std::filesystem::exists(p, ec)) return;
    try {
      auto j = nlohmann::json::parse(read_file(p.string()));
      if (j.value("version", "") == "1" && j.contains("stages") && j["stages"].is_object()) {
        manifest_ = std::move(j);
      }
    } catch (const nlohmann::json::exception&) {
      log(LogLevel::kWarning, "ignoring unreadable manifest " + p.string());
    }
  }

  void execute(Stage s) {
    switch (s) {
      case Stage::kIngest: return ingest();
      case Stage::kFilter: return filter();
      case Stage::kAnnotate: return annotate();
      case Stage::kMood: return mood();
      case Stage::kFeaturize: return featurize_stage();
      case Stage::kSplit: return split_stage();
      case Stage::kTrain: return train_stage();
      case Stage::kEval: return eval_stage();
      case Stage::kExplain: return explain_stage();
    }
  }

  void ingest() {
    const Dataset ds = load_dataset(cfg_.data_path);
    records_ = truncate_all(ds.records, cfg_.history_window_days);
    save_dataset(*records_, path(Stage::kIngest));
    log(LogLevel::kInfo, "ingest: " + std::to_string(records_->size()) + " users");
  }

  void filter() {
    const auto templates = load_templates(cfg_).embed(*providers_.encoder);
    scores_ = score_posts(dataset(), templates, *providers_.encoder, cfg_.max_concurrency);
    write_file(path(Stage::kFilter), jsonl(*scores_, [](const ScoredPost& x) { return to_json(x); }));
  }

  void annotate() {
    annotations_ = annotate_corpus(dataset(), scores(), cfg_.criteria_k, *providers_.chat, &annotation_stats_);
    write_file(path(Stage::kAnnotate),
               jsonl(*annotations_, [](const AnnotationResult& x) { return to_json(x); }));
    log(LogLevel::kInfo, "annotate: " + std::to_string(annotation_stats_.calls.load()) + " chat calls, " +
                             std::to_string(annotation_stats_.parse_failures.load()) + " parse failures");
  }

  void mood() {
    moods_ = mood_courses(dataset(), scores(), cfg_.mood_m, *providers_.chat);
    write_file(path(Stage::kMood), jsonl(*moods_, [](const MoodCourse& x) { return to_json(x); }));
  }

  void featurize_stage() {
    features_ = featurize(dataset(), annotations(), moods(), cfg_.mood_alpha, cfg_.mood_beta,
                          *providers_.encoder, cfg_.max_concurrency);
    write_file(path(Stage::kFeaturize), jsonl(*features_, [](const UserFeatures& x) { return to_json(x); }));
  }

  void split_stage() {
    split_ = split_cohort(records_of(features()), cfg_.seed);
    write_file(path(Stage::kSplit), to_json(*split_).dump(1) + "\n");
  }

  GbtParams gbt_params(std::uint64_t seed) const {
    GbtParams p = cfg_.gbt;
    p.subsample_seed = seed;
    return p;
  }

  void train_stage() {
    model_ = train_and_calibrate(features(), split(), gbt_params(cfg_.seed));
    auto j = model_to_json(model_->model, model_->calibrator);
    j["config_digest"] = config_digest(cfg_);
    write_file(path(Stage::kTrain), j.dump(1) + "\n");
  }

  void eval_stage() {
    std::vector<MetricsReport> runs;
    runs.push_back(evaluate_model(model(), features(), split_part(split(), opts_.split), cfg_.eval_threshold));
    const auto recs = records_of(features());
    for (int r = 1; r < cfg_.eval_repeats; ++r) {
      const auto seed = cfg_.seed + static_cast<std::uint64_t>(r);
      const Split sp = split_cohort(recs, seed);
      const auto m = train_and_calibrate(features(), sp, gbt_params(seed));
      runs.push_back(evaluate_model(m, features(), split_part(sp, opts_.split), cfg_.eval_threshold));
    }
    ReportProvenance prov;
    prov.config_digest = config_digest(cfg_);
    prov.data_digest = sha256_hex(read_file(path(Stage::kIngest)));
    prov.model_digest = sha256_hex(read_file(opts_.model_path.value_or(path(Stage::kTrain))));
    prov.split = opts_.split;
    emit_report(average_reports(runs), runs, prov, path(Stage::kEval));
    log(LogLevel::kInfo, "eval: AUPRC " + config_detail::fmt_double(average_reports(runs).auprc));
  }

  static std::string file_stem(const std::string& user_id) {
    const bool plain = !user_id.empty() && user_id.size() <= 128 &&
                       std::all_of(user_id.begin(), user_id.end(), [](unsigned char c) {
                         return std::isalnum(c) || c == '-' || c == '_' || c == '.';
                       }) && user_id.front() != '.';
    return plain ? user_id : "user-" + sha256_hex(user_id).substr(0, 16);
  }

  void explain_stage() {
    std::unordered_map<std::string, AnnotationResult> ann;
    for (const auto& a : annotations()) ann.emplace(a.post_id, a);
    std::unordered_map<std::string, const MoodCourse*> mood_of;
    for (const auto& m : moods()) mood_of.emplace(m.user_id, &m);
    std::unordered_map<std::string, const UserFeatures*> feat_of;
    for (const auto& f : features()) feat_of.emplace(f.user_id, &f);

    std::vector<const UserRecord*> targets;
    if (opts_.users.empty()) {
      for (const auto& u : dataset()) targets.push_back(&u);
    } else {
      for (const auto& id : opts_.users) {
        auto it = std::find_if(dataset().begin(), dataset().end(),
                               [&](const UserRecord& u) { return u.user_id == id; });
        if (it == dataset().end()) throw ValidationError("explain: unknown user " + id);
        targets.push_back(&*it);
      }
    }
    const auto& m = model();
    const auto reports = parallel_map(targets, providers_.chat->max_concurrency(), [&](const UserRecord* u) {
      const auto* mc = mood_of.at(u->user_id);
      const auto* f = feat_of.at(u->user_id);
      return explain_user(*u, ann, mc->summary, f->fused, m.model, m.calibrator, *providers_.chat,
                          cfg_.eval_threshold);
    });
    const auto dir = out_ / "explanations";
    std::filesystem::create_directories(dir);
    nlohmann::json index = nlohmann::json::array();
    for (const auto& r : reports) {
      const std::string file = file_stem(r.user_id) + ".json";
      write_file((dir / file).string(), to_json(r).dump(2) + "\n");
      index.push_back({{"user_id", r.user_id},
                       {"verdict", prompts::verdict_word(r.verdict)},
                       {"probability", r.probability},
                       {"evidence_posts", r.symptom_evidence.size()},
                       {"file", file}});
    }
    nlohmann::json j = {{"config_digest", config_digest(cfg_)}, {"reports", std::move(index)}};
    write_file(path(Stage::kExplain), j.dump(2) + "\n");
  }

  PipelineConfig cfg_;
  Providers providers_;
  std::filesystem::path out_;
  nlohmann::json manifest_;
  RunOptions opts_;
  AnnotationStats annotation_stats_;
  std::vector<Stage> executed_;

  std::optional<std::vector<UserRecord>> records_;
  std::optional<std::vector<ScoredPost>> scores_;
  std::optional<std::vector<AnnotationResult>> annotations_;
  std::optional<std::vector<MoodCourse>> moods_;
  std::optional<std::vector<UserFeatures>> features_;
  std::optional<Split> split_;
  std::optional<TrainedModel> model_;
};

}  // namespace doris
