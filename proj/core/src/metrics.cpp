/*
 * Copyright 2026 The cxrprep Authors.
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

#include "cxrprep/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <unordered_set>

#include "cxrprep/error.hpp"

namespace cxrprep::metrics {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::kBaseline: return "baseline";
    case Method::kMasking: return "masking";
    case Method::kCropping: return "cropping";
    case Method::kClahe: return "clahe";
  }
  return "baseline";
}

std::string_view display_name(Method m) {
  switch (m) {
    case Method::kBaseline: return "Baseline";
    case Method::kMasking: return "Masking";
    case Method::kCropping: return "Cropping";
    case Method::kClahe: return "CLAHE";
  }
  return "Baseline";
}

std::string_view to_string(Dataset d) { return d == Dataset::kInternal ? "internal" : "external"; }

std::optional<Method> method_from_name(std::string_view name) {
  for (auto m : {Method::kBaseline, Method::kMasking, Method::kCropping, Method::kClahe}) {
    if (to_string(m) == name) return m;
  }
  return std::nullopt;
}

std::optional<Dataset> dataset_from_name(std::string_view name) {
  if (name == "internal") return Dataset::kInternal;
  if (name == "external") return Dataset::kExternal;
  return std::nullopt;
}

std::string_view to_string(DisparityMode m) {
  return m == DisparityMode::kPairwiseMean ? "pairwise_mean" : "max_min";
}

std::optional<DisparityMode> disparity_from_name(std::string_view name) {
  if (name == "pairwise_mean") return DisparityMode::kPairwiseMean;
  if (name == "max_min") return DisparityMode::kMaxMin;
  return std::nullopt;
}

double auroc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) {
    fail(ErrorCode::kInvalidArgument, "auroc: scores and labels differ in length");
  }
  std::uint64_t pos = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i])) fail(ErrorCode::kInvalidArgument, "auroc: non-finite score");
    if (labels[i]) ++pos;
  }
  const std::uint64_t neg = scores.size() - pos;
  if (pos == 0 || neg == 0) {
    fail(ErrorCode::kDegenerateLabels, "auroc needs at least one positive and one negative");
  }

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });

  // Twice the Mann-Whitney U, kept integral until the final division.
  std::uint64_t twice_u = 0;
  std::uint64_t neg_below = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    std::uint64_t p = 0;
    std::uint64_t n = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] ? p : n) += 1;
      ++j;
    }
    twice_u += 2 * p * neg_below + p * n;
    neg_below += n;
    i = j;
  }
  return static_cast<double>(twice_u) / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
}

namespace {

// Scores/labels for one label column, optionally restricted to one group.
struct Column {
  std::vector<double> scores;
  std::vector<std::uint8_t> labels;
  std::uint64_t positives = 0;

  bool degenerate() const { return positives == 0 || positives == labels.size(); }
};

Column label_column(const PredictionSet& set, std::size_t label, const std::string* group) {
  Column c;
  for (const auto& row : set.rows) {
    if (group && row.race_group != *group) continue;
    const std::int8_t t = row.truth[label];
    if (t == kAbsent) continue;
    c.scores.push_back(row.scores[label]);
    c.labels.push_back(static_cast<std::uint8_t>(t));
    c.positives += static_cast<std::uint64_t>(t);
  }
  return c;
}

// Canonical group order: sorted names. Fixes the summation order.
std::vector<std::string> groups_in(const PredictionSet& set) {
  std::vector<std::string> groups;
  std::unordered_set<std::string> seen;
  for (const auto& row : set.rows) {
    if (seen.insert(row.race_group).second) groups.push_back(row.race_group);
  }
  std::sort(groups.begin(), groups.end());
  return groups;
}

}  // namespace

double macro_diagnostic_auroc(const PredictionSet& set) {
  if (set.labels.empty()) fail(ErrorCode::kDegenerateLabels, "prediction set has no labels");
  double sum = 0.0;
  for (std::size_t l = 0; l < set.labels.size(); ++l) {
    const Column c = label_column(set, l, nullptr);
    if (c.degenerate()) {
      fail(ErrorCode::kDegenerateLabels,
           "label '" + set.labels[l] + "' lacks a positive or a negative sample");
    }
    sum += auroc(c.scores, c.labels);
  }
  return sum / static_cast<double>(set.labels.size());
}

double race_auroc(const PredictionSet& set) {
  if (!set.has_race_scores()) fail(ErrorCode::kMissingRaceScores, "prediction set has no race_score columns");
  std::vector<double> scores(set.rows.size());
  std::vector<std::uint8_t> member(set.rows.size());
  double sum = 0.0;
  int used = 0;
  for (std::size_t g = 0; g < set.race_groups.size(); ++g) {
    std::uint64_t members = 0;
    for (std::size_t i = 0; i < set.rows.size(); ++i) {
      scores[i] = set.rows[i].race_scores[g];
      member[i] = set.rows[i].race_group == set.race_groups[g];
      members += member[i];
    }
    if (members == 0) continue;
    if (members == set.rows.size()) {
      fail(ErrorCode::kSingleGroup, "race AUROC needs at least two groups represented");
    }
    sum += auroc(scores, member);
    ++used;
  }
  if (used < 2) fail(ErrorCode::kSingleGroup, "race AUROC needs at least two scored groups represented");
  return sum / used;
}

Disparity group_disparity(const PredictionSet& set, DisparityMode mode) {
  const auto groups = groups_in(set);
  Disparity d;
  double sum = 0.0;
  for (std::size_t l = 0; l < set.labels.size(); ++l) {
    std::vector<double> per_group;
    for (const auto& g : groups) {
      ++d.total_cells;
      const Column c = label_column(set, l, &g);
      if (c.labels.empty() || c.degenerate()) continue;
      ++d.valid_cells;
      per_group.push_back(auroc(c.scores, c.labels));
    }
    if (per_group.size() < 2) continue;
    double spread = 0.0;
    if (mode == DisparityMode::kPairwiseMean) {
      double acc = 0.0;
      std::size_t pairs = 0;
      for (std::size_t a = 0; a < per_group.size(); ++a) {
        for (std::size_t b = a + 1; b < per_group.size(); ++b) {
          acc += std::abs(per_group[a] - per_group[b]);
          ++pairs;
        }
      }
      spread = acc / static_cast<double>(pairs);
    } else {
      const auto [lo, hi] = std::minmax_element(per_group.begin(), per_group.end());
      spread = *hi - *lo;
    }
    sum += spread;
    ++d.labels_used;
  }
  if (d.labels_used == 0) {
    fail(ErrorCode::kNoValidCells, "no label has two or more groups with both classes present");
  }
  d.value = sum / d.labels_used;
  return d;
}

SeedSummary aggregate_seeds(std::span<const double> values) {
  if (values.empty()) fail(ErrorCode::kInvalidArgument, "aggregate_seeds needs at least one value");
  SeedSummary s;
  s.n = static_cast<int>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / s.n;
  if (s.n >= 2) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / (s.n - 1));
  }
  return s;
}

}  // namespace cxrprep::metrics
