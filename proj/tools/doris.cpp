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

// doris command-line interface.

#include <iostream>

#include "CLI11.hpp"
#include "doris/doris.hpp"

namespace {

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> data;
  std::optional<double> k, m, alpha, beta;
  std::optional<int> repeats;
  std::optional<std::string> model;
  std::string split = "test";
  std::vector<std::string> users;
  bool resume = false;
  bool quiet = false;
};

doris::PipelineConfig resolve(const Common& c) {
  doris::PipelineConfig cfg = c.config_path.empty() ? doris::PipelineConfig{} : doris::load_config(c.config_path);
  if (c.seed) cfg.seed = *c.seed;
  if (c.out) cfg.out_dir = *c.out;
  if (c.data) cfg.data_path = *c.data;
  if (c.k) cfg.criteria_k = *c.k;
  if (c.m) cfg.mood_m = *c.m;
  if (c.alpha) cfg.mood_alpha = *c.alpha;
  if (c.beta) cfg.mood_beta = *c.beta;
  if (c.repeats) cfg.eval_repeats = *c.repeats;
  doris::validate(cfg);
  const auto lvl = doris::to_lower_ascii(cfg.log_level);
  int threshold = lvl == "debug" ? 0 : lvl == "warning" ? 2 : lvl == "error" ? 3 : 1;
  if (c.quiet) threshold = 2;
  doris::log_threshold().store(threshold);
  return cfg;
}

int run_stage(const Common& c, doris::Stage target, bool fresh) {
  const auto cfg = resolve(c);
  std::filesystem::create_directories(cfg.out_dir);
  auto cache = std::make_shared<doris::ResponseCache>(doris::default_cache_path(cfg));
  doris::Pipeline pipeline(cfg, doris::make_providers(cfg, cache));
  doris::RunOptions opts;
  opts.resume = c.resume;
  opts.fresh = fresh;
  opts.model_path = c.model;
  opts.split = c.split;
  opts.users = c.users;
  pipeline.run(target, opts);
  const auto& ran = pipeline.executed();
  if (std::find(ran.begin(), ran.end(), doris::Stage::kEval) != ran.end()) {
    std::cout << doris::read_file((std::filesystem::path(cfg.out_dir) / "report.txt").string());
  }
  doris::log(doris::LogLevel::kInfo, "artifacts in " + cfg.out_dir);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"doris: depression screening from social media post histories"};
  app.require_subcommand(1);
  Common c;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", c.config_path, "key = value config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", c.seed, "random seed");
    sub->add_option("--out", c.out, "output directory");
    sub->add_option("--data", c.data, "input JSONL dataset");
    sub->add_flag("--resume", c.resume, "reuse every up-to-date artifact, including this stage's");
    sub->add_flag("-q,--quiet", c.quiet, "only warnings and errors on stderr");
  };

  // synth has its own flags.
  doris::SynthConfig sc;
  std::string synth_out = "cohort.jsonl";
  auto* synth = app.add_subcommand("synth", "write a synthetic cohort");
  synth->add_option("--n", sc.n_users, "number of users");
  synth->add_option("--prevalence", sc.prevalence, "fraction of depressed users");
  synth->add_option("--posts-per-user", sc.posts_per_user, "mean posts per user");
  synth->add_option("--injection-rate", sc.injection_rate, "chance a depressed user's post carries symptom text");
  synth->add_option("--seed", sc.seed, "random seed");
  synth->add_option("--out", synth_out, "output JSONL path");

  struct Sub {
    CLI::App* app;
    doris::Stage stage;
  };
  std::vector<Sub> subs;
  auto stage_cmd = [&](const char* name, const char* help, doris::Stage s) {
    auto* sub = app.add_subcommand(name, help);
    add_common(sub);
    subs.push_back({sub, s});
    return sub;
  };
  stage_cmd("ingest", "load, validate and truncate the dataset", doris::Stage::kIngest);
  stage_cmd("filter", "embed posts and score symptom risk and emotions", doris::Stage::kFilter);
  auto* annotate = stage_cmd("annotate", "annotate the riskiest k% of posts", doris::Stage::kAnnotate);
  annotate->add_option("--k", c.k, "percent of posts sent for annotation");
  auto* mood = stage_cmd("mood", "summarize each user's mood course", doris::Stage::kMood);
  mood->add_option("--m", c.m, "percent of posts kept per emotion");
  auto* featurize = stage_cmd("featurize", "build per-user feature vectors", doris::Stage::kFeaturize);
  for (auto* s : {mood, featurize}) {
    s->add_option("--alpha", c.alpha, "weight of the summary embedding");
    s->add_option("--beta", c.beta, "weight of the mean emotional-post embedding");
  }
  stage_cmd("train", "split, train and calibrate the classifier", doris::Stage::kTrain);
  auto* eval = stage_cmd("eval", "score a split and write report.json", doris::Stage::kEval);
  eval->add_option("--model", c.model, "model file (default: <out>/model.json)");
  eval->add_option("--split", c.split, "train | validation | test");
  eval->add_option("--repeats", c.repeats, "independent split/train repeats to average");
  auto* explain = stage_cmd("explain", "write per-user explanation reports", doris::Stage::kExplain);
  explain->add_option("--user", c.users, "user id (repeatable; default all users)");
  explain->add_option("--model", c.model, "model file (default: <out>/model.json)");
  auto* run = stage_cmd("run", "run every stage", doris::Stage::kExplain);
  run->add_option("--k", c.k, "percent of posts sent for annotation");
  run->add_option("--m", c.m, "percent of posts kept per emotion");
  run->add_option("--alpha", c.alpha, "weight of the summary embedding");
  run->add_option("--beta", c.beta, "weight of the mean emotional-post embedding");
  run->add_option("--repeats", c.repeats, "independent split/train repeats to average");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (synth->parsed()) {
      doris::SynthStats stats;
      const auto records = doris::generate(sc, &stats);
      doris::save_dataset(records, synth_out);
      doris::log(doris::LogLevel::kInfo,
                 "synth: " + std::to_string(records.size()) + " users (" + std::to_string(stats.positive_users) +
                     " positive), " + std::to_string(stats.total_posts) + " posts, " +
                     std::to_string(stats.injected_posts) + " injected -> " + synth_out);
      return 0;
    }
    for (const auto& s : subs) {
      if (!s.app->parsed()) continue;
      doris::Stage target = s.stage;
      if (s.app == run) {
        const auto cfg = resolve(c);
        if (!cfg.explain_enabled) target = doris::Stage::kEval;
      }
      return run_stage(c, target, s.app == run);
    }
  } catch (const doris::ValidationError& e) {
    doris::log(doris::LogLevel::kError, e.what());
    return 2;
  } catch (const doris::ProviderError& e) {
    doris::log(doris::LogLevel::kError, e.what());
    return 3;
  } catch (const std::exception& e) {
    doris::log(doris::LogLevel::kError, e.what());
    return 1;
  }
  return 0;
}
