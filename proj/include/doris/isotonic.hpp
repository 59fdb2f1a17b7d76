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

// Isotonic-regression calibration of classifier scores via
// pool-adjacent-violators.

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "doris/error.hpp"
#include "json.hpp"

namespace doris {

// Right-continuous, non-decreasing step function. A score maps to the value
// of the last threshold <= score; scores below the first threshold map to the
// first value.
class IsotonicCalibrator {
 public:
  IsotonicCalibrator() = default;
  IsotonicCalibrator(std::vector<double> thresholds, std::vector<double> values)
      : thresholds_(std::move(thresholds)), values_(std::move(values)) {
    validate();
  }

  double operator()(double score) const {
    if (values_.empty()) throw ValidationError("calibrator is not fitted");
    const auto it = std::upper_bound(thresholds_.begin(), thresholds_.end(), score);
    const std::size_t idx =
        it == thresholds_.begin() ? 0 : static_cast<std::size_t>(it - thresholds_.begin()) - 1;
    return std::clamp(values_[idx], 0.0, 1.0);
  }

  bool fitted() const { return !values_.empty(); }
  const std::vector<double>& thresholds() const { return thresholds_; }
  const std::vector<double>& values() const { return values_; }

  bool operator==(const IsotonicCalibrator&) const = default;

 private:
  void validate() const {
    if (thresholds_.size() != values_.size() || thresholds_.empty()) {
      throw ValidationError("calibrator: thresholds and values must be non-empty and equal length");
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (!std::isfinite(thresholds_[i]) || !std::isfinite(values_[i])) {
        throw ValidationError("calibrator: non-finite entry");
      }
      if (i > 0 && !(thresholds_[i] > thresholds_[i - 1])) {
        throw ValidationError("calibrator: thresholds must be strictly ascending");
      }
      if (i > 0 && values_[i] < values_[i - 1]) {
        throw ValidationError("calibrator: values must be non-decreasing");
      }
    }
  }

  std::vector<double> thresholds_;
  std::vector<double> values_;
};

inline IsotonicCalibrator fit_isotonic(std::span<const double> scores,
                                       std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw ValidationError("fit_isotonic: scores and labels differ in length");
  }
  if (scores.size() < 2) throw ValidationError("fit_isotonic: need at least 2 points");
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i])) throw ValidationError("fit_isotonic: non-finite score");
    if (labels[i] != 0 && labels[i] != 1) throw ValidationError("fit_isotonic: labels must be 0/1");
  }

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Blocks of pooled points. Sums and weights are integer-valued, so the
  // violation test by cross-multiplication is exact.
  struct Block {
    double threshold;  // smallest score in the block
    double sum;
    double weight;
  };
  std::vector<Block> blocks;
  for (std::size_t k = 0; k < order.size();) {
    const double s = scores[order[k]];
    double sum = 0.0, weight = 0.0;
    for (; k < order.size() && scores[order[k]] == s; ++k) {
      sum += labels[order[k]];
      weight += 1.0;
    }
    blocks.push_back({s, sum, weight});
    while (blocks.size() >= 2) {
      const Block& last = blocks.back();
      const Block& prev = blocks[blocks.size() - 2];
      if (!(prev.sum * last.weight > last.sum * prev.weight)) break;
      Block merged{prev.threshold, prev.sum + last.sum, prev.weight + last.weight};
      blocks.pop_back();
      blocks.back() = merged;
    }
  }

  std::vector<double> thresholds, values;
  for (const auto& b : blocks) {
    const double v = b.sum / b.weight;
    if (!values.empty() && values.back() == v) continue;
    thresholds.push_back(b.threshold);
    values.push_back(v);
  }
  return IsotonicCalibrator(std::move(thresholds), std::move(values));
}

inline double calibrated_probability(const IsotonicCalibrator& cal, double score) {
  return cal(score);
}

inline nlohmann::json to_json(const IsotonicCalibrator& c) {
  return {{"thresholds", c.thresholds()}, {"values", c.values()}};
}

inline IsotonicCalibrator calibrator_from_json(const nlohmann::json& j) {
  return IsotonicCalibrator(j.at("thresholds").get<std::vector<double>>(),
                            j.at("values").get<std::vector<double>>());
}

}  // namespace doris
