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

// Cohort splitting and imbalanced-classification metrics.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "doris/core.hpp"
#include "doris/error.hpp"
#include "doris/util.hpp"
#include "json.hpp"

namespace doris {

struct Split {
  std::vector<std::string> train;
  std::vector<std::string> validation;
  std::vector<std::string> test;
};

inline nlohmann::json to_json(const Split& s) {
  return {{"train", s.train}, {"validation", s.validation}, {"test", s.test}};
}

inline Split split_from_json(const nlohmann::json& j) {
  return {j.at("train").get<std::vector<std::string>>(),
          j.at("validation").get<std::vector<std::string>>(),
          j.at("test").get<std::vector<std::string>>()};
}

// Stratified 7:1:2 split. Within each class the users are shuffled with
// `seed`; train and validation get floor(0.7 n) and floor(0.1 n), test the
// rest. Each part lists user ids in dataset order.
inline Split split_cohort(const std::vector<UserRecord>& records, std::uint64_t seed) {
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!records[i].label) {
      throw ValidationError("split_cohort: user " + records[i].user_id + " has no label");
    }
    by_class[*records[i].label].push_back(i);
  }
  if (by_class[0].empty() || by_class[1].empty()) {
    throw ValidationError("split_cohort: cohort must contain both classes");
  }
  std::vector<int> part(records.size(), 2);
  Rng rng(seed);
  for (int c = 0; c < 2; ++c) {
    auto& members = by_class[c];
    if (members.size() < 10) {
      log(LogLevel::kWarning, "split_cohort: class " + std::to_string(c) + " has only " +
                                  std::to_string(members.size()) + " member(s)");
    }
    rng.shuffle(members);
    const std::size_t n_train = members.size() * 7 / 10;
    const std::size_t n_val = members.size() / 10;
    for (std::size_t k = 0; k < members.size(); ++k) {
      part[members[k]] = k < n_train ? 0 : (k < n_train + n_val ? 1 : 2);
    }
  }
  Split s;
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto& dst = part[i] == 0 ? s.train : (part[i] == 1 ? s.validation : s.test);
    dst.push_back(records[i].user_id);
  }
  return s;
}

// ---------------------------------------------------------------------------

struct ConfusionCounts {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
};

struct PrecisionRecallF1 {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  ConfusionCounts counts;
  // Set when nothing was predicted positive; precision is then reported as 0.
  bool no_predicted_positives = false;
};

inline PrecisionRecallF1 precision_recall_f1(std::span<const int> labels,
                                             std::span<const int> predictions) {
  if (labels.size() != predictions.size()) {
    throw ValidationError("precision_recall_f1: length mismatch");
  }
  PrecisionRecallF1 r;
  auto& c = r.counts;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool y = labels[i] == 1, p = predictions[i] == 1;
    if (y && p) ++c.tp;
    else if (!y && p) ++c.fp;
    else if (!y && !p) ++c.tn;
    else ++c.fn;
  }
  r.no_predicted_positives = c.tp + c.fp == 0;
  r.precision = r.no_predicted_positives ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  r.recall = c.tp + c.fn == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  r.f1 = r.precision + r.recall > 0 ? 2 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

namespace detail {

// Indices sorted by descending score.
inline std::vector<std::size_t> descending_order(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

inline void check_scores(std::span<const int> labels, std::span<const double> scores,
                         const char* what) {
  if (labels.size() != scores.size()) {
    throw ValidationError(std::string(what) + ": labels and scores differ in length");
  }
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (std::isnan(scores[i])) throw ValidationError(std::string(what) + ": NaN score");
    if (labels[i] != 0 && labels[i] != 1) {
      throw ValidationError(std::string(what) + ": labels must be 0/1");
    }
  }
}

}  // namespace detail

// P(score+ > score-) + 0.5 P(score+ == score-), exactly: tied blocks are
// processed together and the pair count is kept in integer half-units.
inline double auroc(std::span<const int> labels, std::span<const double> scores) {
  detail::check_scores(labels, scores, "auroc");
  const auto order = detail::descending_order(scores);
  std::uint64_t pos = 0, neg = 0;
  for (int y : labels) (y == 1 ? pos : neg) += 1;
  if (pos == 0 || neg == 0) throw ValidationError("auroc: both classes must be present");

  // Walk from the highest score down; negatives seen so far rank above.
  std::uint64_t half_units = 0;  // 2 * (#pos > neg pairs) + (#tied pairs)
  std::uint64_t neg_above = 0;
  for (std::size_t k = 0; k < order.size();) {
    const double s = scores[order[k]];
    std::uint64_t bp = 0, bn = 0;
    for (; k < order.size() && scores[order[k]] == s; ++k) (labels[order[k]] == 1 ? bp : bn) += 1;
    // Each positive here beats every negative below and ties with bn.
    half_units += 2 * bp * (neg - neg_above - bn) + bp * bn;
    neg_above += bn;
  }
  return static_cast<double>(half_units) / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
}

// Average precision: sum over descending-score blocks of
// (R_i - R_{i-1}) * P_i, with tied scores entering as one block.
inline double auprc(std::span<const int> labels, std::span<const double> scores) {
  detail::check_scores(labels, scores, "auprc");
  std::size_t pos = 0;
  for (int y : labels) pos += static_cast<std::size_t>(y == 1);
  if (pos == 0) throw ValidationError("auprc: no positive labels");
  const auto order = detail::descending_order(scores);
  double ap = 0.0;
  std::size_t tp = 0, seen = 0;
  for (std::size_t k = 0; k < order.size();) {
    const double s = scores[order[k]];
    std::size_t block_tp = 0;
    for (; k < order.size() && scores[order[k]] == s; ++k) {
      block_tp += static_cast<std::size_t>(labels[order[k]] == 1);
      ++seen;
    }
    if (block_tp == 0) continue;
    tp += block_tp;
    ap += static_cast<double>(block_tp) * static_cast<double>(tp) / static_cast<double>(seen);
  }
  return std::min(1.0, ap / static_cast<double>(pos));
}

// ---------------------------------------------------------------------------

struct MetricsReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double auroc = 0.0;
  double auprc = 0.0;
  double threshold = kDefaultDecisionThreshold;
  ConfusionCounts counts;
  bool no_predicted_positives = false;
  std::size_t n = 0;
  std::size_t positives = 0;
};

// Ranking metrics use the raw ensemble scores; the thresholded metrics use the
// calibrated probabilities.
inline MetricsReport evaluate(std::span<const int> labels, std::span<const double> raw_scores,
                              std::span<const double> probabilities,
                              double threshold = kDefaultDecisionThreshold) {
  if (labels.size() != raw_scores.size() || labels.size() != probabilities.size()) {
    throw ValidationError("evaluate: length mismatch");
  }
  std::vector<int> predicted(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    predicted[i] = probabilities[i] >= threshold ? 1 : 0;
  }
  const auto prf = precision_recall_f1(labels, predicted);
  MetricsReport m;
  m.precision = prf.precision;
  m.recall = prf.recall;
  m.f1 = prf.f1;
  m.counts = prf.counts;
  m.no_predicted_positives = prf.no_predicted_positives;
  m.threshold = threshold;
  m.auroc = auroc(labels, raw_scores);
  m.auprc = auprc(labels, raw_scores);
  m.n = labels.size();
  m.positives = prf.counts.tp + prf.counts.fn;
  return m;
}

inline nlohmann::json to_json(const MetricsReport& m) {
  return {{"precision", m.precision},
          {"recall", m.recall},
          {"f1", m.f1},
          {"auroc", m.auroc},
          {"auprc", m.auprc},
          {"threshold", m.threshold},
          {"no_predicted_positives", m.no_predicted_positives},
          {"n", m.n},
          {"positives", m.positives},
          {"counts", {{"tp", m.counts.tp}, {"fp", m.counts.fp}, {"tn", m.counts.tn}, {"fn", m.counts.fn}}}};
}

// Element-wise mean of the five headline metrics; counts are summed.
inline MetricsReport average_reports(std::span<const MetricsReport> runs) {
  if (runs.empty()) throw ValidationError("average_reports: no runs");
  MetricsReport avg;
  avg.threshold = runs.front().threshold;
  for (const auto& r : runs) {
    avg.precision += r.precision;
    avg.recall += r.recall;
    avg.f1 += r.f1;
    avg.auroc += r.auroc;
    avg.auprc += r.auprc;
    avg.counts.tp += r.counts.tp;
    avg.counts.fp += r.counts.fp;
    avg.counts.tn += r.counts.tn;
    avg.counts.fn += r.counts.fn;
    avg.n += r.n;
    avg.positives += r.positives;
    avg.no_predicted_positives = avg.no_predicted_positives || r.no_predicted_positives;
  }
  const double k = static_cast<double>(runs.size());
  avg.precision /= k;
  avg.recall /= k;
  avg.f1 /= k;
  avg.auroc /= k;
  avg.auprc /= k;
  return avg;
}

// Best published result on the full-scale cohort, kept in reports for scale.
inline nlohmann::json reference_row() {
  return {{"dataset", "SWDD (1,000 depressed / 19,000 control users)"},
          {"precision", 0.7606},
          {"recall", 0.7902},
          {"f1", 0.7750},
          {"auroc", 0.9722},
          {"auprc", 0.8147}};
}

struct ReportProvenance {
  std::string config_digest;
  std::string data_digest;
  std::string model_digest;
  std::string split;
};

inline nlohmann::json report_json(const MetricsReport& metrics,
                                  std::span<const MetricsReport> runs,
                                  const ReportProvenance& prov) {
  nlohmann::json j;
  j["metrics"] = to_json(metrics);
  nlohmann::json per_run = nlohmann::json::array();
  for (const auto& r : runs) per_run.push_back(to_json(r));
  j["runs"] = std::move(per_run);
  j["repeats"] = runs.empty() ? 1 : runs.size();
  j["split"] = prov.split;
  j["config_digest"] = prov.config_digest;
  j["data_digest"] = prov.data_digest;
  j["model_digest"] = prov.model_digest;
  j["reference"] = reference_row();
  return j;
}

inline std::string report_table(const MetricsReport& m, const ReportProvenance& prov,
                                std::size_t repeats) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4);
  os << "split: " << prov.split << "   users: " << m.n / std::max<std::size_t>(1, repeats)
     << "   repeats: " << repeats << "\n";
  os << "+-----------+-----------+-----------+-----------+-----------+\n";
  os << "| Precision | Recall    | F1-score  | AUROC     | AUPRC     |\n";
  os << "+-----------+-----------+-----------+-----------+-----------+\n";
  os << "| " << std::setw(9) << m.precision << " | " << std::setw(9) << m.recall << " | "
     << std::setw(9) << m.f1 << " | " << std::setw(9) << m.auroc << " | " << std::setw(9)
     << m.auprc << " |\n";
  os << "+-----------+-----------+-----------+-----------+-----------+\n";
  os << "threshold: " << m.threshold << "   tp=" << m.counts.tp << " fp=" << m.counts.fp
     << " tn=" << m.counts.tn << " fn=" << m.counts.fn << "\n";
  if (m.no_predicted_positives) os << "note: no positive predictions; precision reported as 0\n";
  os << "config digest: " << prov.config_digest << "\n";
  os << "data digest:   " << prov.data_digest << "\n";
  return os.str();
}

// Writes <path> (JSON) and <path minus .json>.txt (table).
inline void emit_report(const MetricsReport& metrics, std::span<const MetricsReport> runs,
                        const ReportProvenance& prov, const std::string& path) {
  write_file(path, report_json(metrics, runs, prov).dump(2) + "\n");
  std::string txt = path;
  if (txt.size() > 5 && txt.ends_with(".json")) txt.resize(txt.size() - 5);
  txt += ".txt";
  write_file(txt, report_table(metrics, prov, runs.empty() ? 1 : runs.size()));
}

}  // namespace doris
