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

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Criteria 7-9 run the full offline pipeline on synthetic
// cohorts and take a few minutes.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <mutex>
#include <random>
#include <set>
#include <sstream>

#include "doris/doris.hpp"
#include "oracles.hpp"

using namespace doris;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1e", v);
  return buf;
}

std::string fmt(double v, int prec = 4) {
  std::ostringstream os;
  os.precision(prec);
  os << std::fixed << v;
  return os.str();
}

// ---------------------------------------------------------------------------

Outcome metric_oracles() {
  const auto t0 = Clock::now();
  std::mt19937_64 g(1);
  double worst = 0.0;
  int done = 0;
  while (done < 200) {
    const std::size_t n = 2 + g() % 99;
    const auto s = oracle::tied_scores(g, n, 1 + static_cast<int>(g() % 12));
    std::vector<int> y(n);
    for (auto& v : y) v = static_cast<int>(g() % 4 == 0);
    const int pos = std::accumulate(y.begin(), y.end(), 0);
    if (pos == 0 || pos == static_cast<int>(n)) continue;
    worst = std::max(worst, std::abs(auroc(y, s) - oracle::auroc(y, s)));
    worst = std::max(worst, std::abs(auprc(y, s) - oracle::average_precision(y, s)));
    ++done;
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-12 && secs < 10.0,
          "200 instances, max |diff| " + sci(worst) + ", " + fmt(secs, 2) + " s"};
}

Outcome isotonic_oracle() {
  std::mt19937_64 g(2);
  int mismatches = 0, order_violations = 0;
  double worst_mean = 0.0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 2 + g() % 11;
    const auto x = oracle::tied_scores(g, n, 1 + static_cast<int>(g() % 10));
    std::vector<int> y(n);
    for (auto& v : y) v = static_cast<int>(g() % 2);
    const auto cal = fit_isotonic(x, y);
    const auto fit = oracle::isotonic_exhaustive(x, y);
    for (std::size_t i = 0; i < fit.scores.size(); ++i) {
      if (cal(fit.scores[i]) != fit.values[i]) ++mismatches;
    }
    double sum_p = 0.0, sum_y = 0.0;
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return x[a] < x[b]; });
    for (std::size_t k = 0; k < n; ++k) {
      sum_p += cal(x[idx[k]]);
      sum_y += y[idx[k]];
      if (k > 0 && cal(x[idx[k]]) < cal(x[idx[k - 1]])) ++order_violations;
    }
    worst_mean = std::max(worst_mean, std::abs(sum_p - sum_y) / static_cast<double>(n));
  }
  return {mismatches == 0 && order_violations == 0 && worst_mean <= 1e-9,
          "100 instances, " + std::to_string(mismatches) + " value mismatches, " +
              std::to_string(order_violations) + " order violations, mean drift " +
              sci(worst_mean)};
}

struct Fixture {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
};

Fixture random_fixture(std::uint64_t seed, std::size_t n, std::size_t d, double prevalence) {
  std::mt19937_64 g(seed);
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> u;
  Fixture f;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> r(d);
    for (auto& v : r) v = z(g);
    const double logit = 1.5 * r[0] - r[1 % d] + std::log(prevalence / (1 - prevalence));
    f.labels.push_back(u(g) < 1.0 / (1.0 + std::exp(-logit)) ? 1 : 0);
    f.rows.push_back(std::move(r));
  }
  return f;
}

Outcome gbt_soundness() {
  std::vector<std::string> failures;
  // (a) base score
  double worst_base = 0.0;
  for (std::uint64_t s = 1; s <= 5; ++s) {
    const auto f = random_fixture(s, 300, 3, 0.05 + 0.1 * static_cast<double>(s));
    GbtParams p;
    p.n_trees = 1;
    const auto m = train(f.rows, f.labels, p);
    const double best = oracle::golden_min([&](double c) { return oracle::constant_logistic_loss(f.labels, c); },
                                           -20.0, 20.0, 1e-10);
    worst_base = std::max(worst_base, std::abs(m.base_score() - best));
  }
  if (worst_base > 1e-6) failures.push_back("(a) base score off by " + sci(worst_base));

  // (b) monotone training loss
  int increases = 0;
  for (std::uint64_t s = 1; s <= 4; ++s) {
    for (double lr : {0.1, 0.05, 0.01}) {
      const auto f = random_fixture(100 + s, 400, 6, 0.2);
      GbtParams p;
      p.n_trees = 60;
      p.learning_rate = lr;
      p.min_leaf = 5;
      p.subsample = s % 2 == 0 ? 0.7 : 1.0;
      p.subsample_seed = s;
      TrainingTrace trace;
      train(f.rows, f.labels, p, &trace);
      for (std::size_t k = 1; k < trace.loss.size(); ++k) {
        if (trace.loss[k] > trace.loss[k - 1] + 1e-12) ++increases;
      }
    }
  }
  if (increases > 0) failures.push_back("(b) " + std::to_string(increases) + " loss increases");

  // (c) separable 1-D fixture with stumps
  Fixture sep;
  for (int i = 0; i < 200; ++i) {
    sep.rows.push_back({static_cast<double>(i)});
    sep.labels.push_back(i >= 137 ? 1 : 0);
  }
  GbtParams stumps;
  stumps.n_trees = 10;
  stumps.max_depth = 1;
  stumps.min_leaf = 1;
  const auto sm = train(sep.rows, sep.labels, stumps);
  int correct = 0;
  for (std::size_t i = 0; i < sep.rows.size(); ++i) correct += sm.predict_label(sep.rows[i]) == sep.labels[i];
  if (correct != 200) failures.push_back("(c) training accuracy " + std::to_string(correct) + "/200");

  // (d) save/load
  const auto f = random_fixture(9, 300, 4, 0.3);
  GbtParams p;
  p.n_trees = 40;
  p.min_leaf = 5;
  const auto model = train(f.rows, f.labels, p);
  const auto cal = fit_isotonic(model.raw_scores(f.rows), f.labels);
  const auto path = (fs::temp_directory_path() / ("doris_acc_model_" + std::to_string(::getpid()) + ".json")).string();
  save_model(model, cal, path);
  const auto loaded = load_model(path);
  fs::remove(path);
  if (loaded.model.raw_scores(f.rows) != model.raw_scores(f.rows) || !(loaded.calibrator == cal)) {
    failures.push_back("(d) round trip changed scores");
  }

  std::string detail = "base |diff| " + sci(worst_base) + ", 12 loss traces, separable " +
                       std::to_string(correct) + "/200, round trip";
  for (const auto& s : failures) detail += "; " + s;
  return {failures.empty(), detail};
}

Embedding random_unit(std::mt19937_64& g, std::size_t d) {
  std::normal_distribution<double> z;
  Vector v(d);
  for (auto& x : v) x = z(g);
  normalize_l2(v);
  return {v};
}

Outcome equation_conformance() {
  std::mt19937_64 g(4);
  HashingEncoder enc(48, 3);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    // criteria feature
    UserRecord u{"u", {}, 0};
    const std::size_t n = 1 + g() % 40;
    std::unordered_map<std::string, SymptomVector> ann;
    std::vector<std::array<int, 9>> dense(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::string id = "p" + std::to_string(i);
      u.posts.push_back({id, "x", Timestamp{}});
      if (g() % 3 == 0) continue;
      SymptomVector v;
      for (int c = 0; c < 9; ++c) {
        v.flags[c] = static_cast<std::uint8_t>(g() % 2);
        dense[i][c] = v.flags[c];
      }
      ann[id] = v;
    }
    const auto cf = criteria_feature(u, ann).values;
    for (int c = 0; c < 9; ++c) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += dense[i][c];
      worst = std::max(worst, std::abs(cf[c] - s / static_cast<double>(n)));
    }

    // mood representation
    const std::size_t k = g() % 6;
    std::vector<Embedding> emo;
    for (std::size_t i = 0; i < k; ++i) emo.push_back(random_unit(g, 48));
    const double alpha = std::uniform_real_distribution<double>(0, 2)(g);
    const double beta = std::uniform_real_distribution<double>(0, 2)(g);
    const std::string summary = "summary number " + std::to_string(t);
    const auto mr = mood_representation(summary, emo, alpha, beta, enc);
    const auto h = enc.encode(summary);
    for (std::size_t i = 0; i < 48; ++i) {
      double expected = 0.0;
      if (k > 0) {
        double s = 0.0;
        for (const auto& e : emo) s += e.values[i];
        expected = alpha * h.values[i] + beta * s / static_cast<double>(k);
      }
      worst = std::max(worst, std::abs(mr[i] - expected));
    }

    // post history
    const std::size_t m = 1 + g() % 30;
    std::vector<Embedding> posts;
    for (std::size_t i = 0; i < m; ++i) posts.push_back(random_unit(g, 48));
    const auto ph = post_history_representation(posts);
    for (std::size_t i = 0; i < 48; ++i) {
      double s = 0.0;
      for (const auto& e : posts) s += e.values[i];
      worst = std::max(worst, std::abs(ph[i] - s / static_cast<double>(m)));
    }

    // fuse
    const auto fused = fuse(mr, ph, cf);
    if (fused.size() != 57) return {false, "fused vector has length " + std::to_string(fused.size())};
    for (std::size_t i = 0; i < 48; ++i) worst = std::max(worst, std::abs(fused[i] - (mr[i] + ph[i])));
    for (int c = 0; c < 9; ++c) worst = std::max(worst, std::abs(fused[48 + c] - cf[c]));
  }
  return {worst <= 1e-12, "50 fixtures, max |diff| " + sci(worst)};
}

Outcome annotation_format() {
  int bad = 0;
  for (int mask = 0; mask < 512; ++mask) {
    SymptomVector v;
    for (int c = 0; c < 9; ++c) v.flags[c] = static_cast<std::uint8_t>((mask >> c) & 1);
    if (!(parse_annotation(format_annotation(v)) == v)) ++bad;
  }
  auto vec = [](std::string_view letters) {
    SymptomVector v;
    for (char c : letters) v.flags[c - 'A'] = 1;
    return v;
  };
  const bool gi = parse_annotation("(G, I)") == vec("GI");
  const bool abc = parse_annotation("(A, B, C)") == vec("ABC");
  const bool none = parse_annotation("None") == SymptomVector{};
  return {bad == 0 && gi && abc && none,
          std::to_string(512 - bad) + "/512 round trips, examples " + (gi && abc && none ? "ok" : "wrong")};
}

Outcome filtering_laws() {
  std::mt19937_64 g(6);
  std::vector<RiskScore> risk;
  std::vector<EmotionScores> emo;
  for (int i = 0; i < 10000; ++i) {
    char id[16];
    std::snprintf(id, sizeof(id), "p%05d", static_cast<int>(g() % 100000));
    const std::string pid = std::string(id) + "-" + std::to_string(i);
    risk.push_back({pid, static_cast<double>(g() % 500) / 500.0});
    EmotionScores e{pid, {}};
    for (auto& s : e.scores) s = static_cast<double>(g() % 300) / 300.0;
    emo.push_back(e);
  }
  const std::vector<double> sweep{0, 5, 10, 20, 50, 100};
  int oracle_mismatch = 0, monotone_violations = 0;
  PostIdSet prev_k, prev_m;
  for (double p : sweep) {
    const auto k = select_top_k(risk, p);
    const auto want = oracle::top_percent_sorted(
        risk, p, [](const RiskScore& r) { return r.post_id; }, [](const RiskScore& r) { return r.score; });
    if (k != PostIdSet(want.begin(), want.end())) ++oracle_mismatch;

    const auto m = select_emotional(emo, p);
    PostIdSet want_m;
    for (int j = 0; j < kNumEmotions; ++j) {
      const auto ids = oracle::top_percent_sorted(
          emo, p, [](const EmotionScores& e) { return e.post_id; },
          [j](const EmotionScores& e) { return e.scores[j]; });
      want_m.insert(ids.begin(), ids.end());
    }
    if (m != want_m) ++oracle_mismatch;

    for (const auto& id : prev_k) monotone_violations += !k.contains(id);
    for (const auto& id : prev_m) monotone_violations += !m.contains(id);
    prev_k = k;
    prev_m = m;
  }
  return {oracle_mismatch == 0 && monotone_violations == 0,
          "10000 posts, k/m sweep {0,5,10,20,50,100}: " + std::to_string(oracle_mismatch) +
              " oracle mismatches, " + std::to_string(monotone_violations) + " monotonicity violations"};
}

// ---------------------------------------------------------------------------
// Closed-loop experiments.

constexpr int kSeeds = 5;

PipelineConfig experiment_config(std::uint64_t seed) {
  PipelineConfig c;
  c.seed = seed;
  return c;
}

struct SeedRun {
  std::map<FeatureSet, double> auprc;
  double featurize_s = 0.0;
  double full_model_s = 0.0;
};

SeedRun run_cohort(std::uint64_t seed, double injection_rate, std::span<const FeatureSet> sets) {
  SynthConfig sc;
  sc.seed = seed;
  sc.injection_rate = injection_rate;
  const auto records = generate(sc);
  const auto cfg = experiment_config(seed);
  HashingEncoder enc(cfg.encoder_dim, cfg.encoder_seed);
  MockChat chat(cfg.max_concurrency, cfg.max_prompt_chars);
  SeedRun out;
  auto t0 = Clock::now();
  const auto cohort = featurize_cohort(records, cfg, enc, chat, TemplateRegistry::builtin());
  out.featurize_s = seconds_since(t0);
  for (auto s : sets) {
    t0 = Clock::now();
    const FeatureSet one[] = {s};
    const auto rows = run_ablations(cohort.features, seed, 1, cfg.gbt, cfg.eval_threshold, one);
    if (s == FeatureSet::kFull) out.full_model_s = seconds_since(t0);
    out.auprc[s] = rows[0].metrics.auprc;
  }
  return out;
}

std::vector<SeedRun> signal_runs;

const std::vector<SeedRun>& signal_experiment() {
  if (signal_runs.empty()) {
    const FeatureSet sets[] = {FeatureSet::kFull, FeatureSet::kHistoryOnly, FeatureSet::kNoCriteria,
                               FeatureSet::kNoMood, FeatureSet::kNoHistory};
    for (int s = 1; s <= kSeeds; ++s) signal_runs.push_back(run_cohort(static_cast<std::uint64_t>(s), 0.3, sets));
  }
  return signal_runs;
}

Outcome closed_loop() {
  const auto& runs = signal_experiment();
  double full = 0.0, ph = 0.0, min_full = 1.0, slowest = 0.0;
  std::string per_seed;
  for (const auto& r : runs) {
    const double f = r.auprc.at(FeatureSet::kFull), h = r.auprc.at(FeatureSet::kHistoryOnly);
    full += f / kSeeds;
    ph += h / kSeeds;
    min_full = std::min(min_full, f);
    slowest = std::max(slowest, r.featurize_s + r.full_model_s);
    per_seed += (per_seed.empty() ? "" : " ") + fmt(f, 3) + "/" + fmt(h, 3);
  }
  const bool pass = min_full >= 0.90 && full - ph >= 0.03 && slowest < 300.0;
  return {pass, "AUPRC full/post-history per seed [" + per_seed + "], mean full " + fmt(full) +
                    ", mean gap " + fmt(full - ph) + ", slowest full run " + fmt(slowest, 1) + " s"};
}

Outcome ablation_ordering() {
  const auto& runs = signal_experiment();
  std::map<FeatureSet, double> mean;
  for (const auto& r : runs) {
    for (const auto& [s, v] : r.auprc) mean[s] += v / kSeeds;
  }
  bool pass = true;
  std::string detail = "mean AUPRC full " + fmt(mean[FeatureSet::kFull]);
  for (auto s : {FeatureSet::kNoCriteria, FeatureSet::kNoMood, FeatureSet::kNoHistory}) {
    detail += ", " + std::string(to_string(s)) + " " + fmt(mean[s]);
    if (mean[FeatureSet::kFull] < mean[s]) pass = false;
  }
  return {pass, detail};
}

Outcome null_control() {
  const FeatureSet full[] = {FeatureSet::kFull};
  double mean = 0.0;
  std::string per_seed;
  for (int s = 1; s <= kSeeds; ++s) {
    const auto r = run_cohort(static_cast<std::uint64_t>(100 + s), 0.0, full);
    const double v = r.auprc.at(FeatureSet::kFull);
    mean += v / kSeeds;
    per_seed += (per_seed.empty() ? "" : " ") + fmt(v, 3);
  }
  return {std::abs(mean - 0.05) <= 0.03,
          "AUPRC per seed [" + per_seed + "], mean " + fmt(mean) + " vs prevalence 0.05"};
}

class RecordingChat : public ChatProvider {
 public:
  std::string name() const override { return inner_.name(); }

  std::size_t calls() const {
    std::lock_guard lock(mu_);
    return calls_;
  }
  std::size_t unique() const {
    std::lock_guard lock(mu_);
    return prompts_.size();
  }

 protected:
  std::string complete_impl(std::string_view prompt) const override {
    {
      std::lock_guard lock(mu_);
      ++calls_;
      prompts_.emplace(prompt);
    }
    return inner_.complete(prompt);
  }

 private:
  MockChat inner_;
  mutable std::mutex mu_;
  mutable std::size_t calls_ = 0;
  mutable std::set<std::string> prompts_;
};

Outcome determinism() {
  const auto dir = fs::temp_directory_path() / ("doris_acc_det_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  SynthConfig sc;
  sc.n_users = 600;
  sc.prevalence = 0.1;
  sc.seed = 21;
  save_dataset(generate(sc), (dir / "cohort.jsonl").string());

  PipelineConfig cfg;
  cfg.data_path = (dir / "cohort.jsonl").string();
  cfg.out_dir = (dir / "out").string();
  cfg.gbt.n_trees = 100;

  struct Result {
    std::string model, report;
    std::size_t calls = 0, unique = 0;
    std::size_t second_pass_calls = 0;
  };
  auto once = [&] {
    fs::remove_all(cfg.out_dir);
    auto inner = std::make_shared<RecordingChat>();
    Providers p;
    p.cache = std::make_shared<ResponseCache>(default_cache_path(cfg));
    p.encoder = std::make_shared<HashingEncoder>(cfg.encoder_dim, cfg.encoder_seed);
    p.chat = std::make_shared<CachedChat>(inner, p.cache);
    Pipeline pipe(cfg, p);
    pipe.run(Stage::kExplain, RunOptions{.fresh = true});
    Result r;
    r.model = read_file(pipe.path(Stage::kTrain));
    r.report = read_file(pipe.path(Stage::kEval));
    r.calls = inner->calls();
    r.unique = inner->unique();
    // A forced recompute must be served from the cache.
    Pipeline again(cfg, p);
    again.run(Stage::kExplain, RunOptions{.fresh = true});
    r.second_pass_calls = inner->calls() - r.calls;
    return r;
  };
  const auto a = once();
  const auto b = once();
  fs::remove_all(dir);
  const bool same = a.model == b.model && a.report == b.report;
  const bool cached = a.calls == a.unique && b.calls == b.unique && a.second_pass_calls == 0 &&
                      b.second_pass_calls == 0;
  return {same && cached, std::string("model.json and report.json ") + (same ? "identical" : "DIFFER") +
                              "; " + std::to_string(a.calls) + " provider calls for " + std::to_string(a.unique) +
                              " unique prompts, " + std::to_string(a.second_pass_calls) + " on recompute"};
}

}  // namespace

int main() {
  log_threshold() = static_cast<int>(LogLevel::kError);
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"metric oracles", metric_oracles},
      {"isotonic oracle", isotonic_oracle},
      {"gbt soundness", gbt_soundness},
      {"feature equations", equation_conformance},
      {"annotation format", annotation_format},
      {"filtering laws", filtering_laws},
      {"closed-loop synthetic experiment", closed_loop},
      {"ablation ordering", ablation_ordering},
      {"null-signal control", null_control},
      {"determinism and caching", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << (i + 1) << " (" << criteria[i].first
              << "): " << o.detail << "  [" << fmt(seconds_since(t0), 1) << " s]" << std::endl;
  }
  std::cout << (failed == 0 ? "all acceptance criteria passed" : std::to_string(failed) + " criterion/criteria failed")
            << std::endl;
  return failed == 0 ? 0 : 1;
}
