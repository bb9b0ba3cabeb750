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

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cxrprep::metrics {

enum class Method { kBaseline, kMasking, kCropping, kClahe };
enum class Dataset { kInternal, kExternal };

std::string_view to_string(Method m);
std::string_view display_name(Method m);
std::string_view to_string(Dataset d);
std::optional<Method> method_from_name(std::string_view name);
std::optional<Dataset> dataset_from_name(std::string_view name);

inline constexpr std::int8_t kAbsent = -1;

struct PredictionRow {
  std::string sample_id;
  std::string race_group;
  std::vector<std::int8_t> truth;   // per label: 0, 1 or kAbsent
  std::vector<double> scores;       // per label
  std::vector<double> race_scores;  // per PredictionSet::race_groups; empty if none
};

// One (method, seed, dataset) run of model outputs.
struct PredictionSet {
  Method method = Method::kBaseline;
  std::int64_t seed = 0;
  Dataset dataset = Dataset::kInternal;
  std::vector<std::string> labels;
  std::vector<std::string> race_groups;  // groups with a race_score column
  std::vector<PredictionRow> rows;

  bool has_race_scores() const { return !race_groups.empty(); }
};

// Prediction CSV: '#method=', '#seed=', '#dataset=' lines, then a header
// with sample_id, race_group, score:<label>, gt:<label> and optionally
// race_score:<group>. Errors name the file and line (SchemaMismatch).
PredictionSet read_predictions(const std::filesystem::path& path);
PredictionSet parse_predictions(std::string_view text, const std::string& source);
std::string render_predictions(const PredictionSet& set);

// Throws SchemaMismatch on duplicate sample ids, non-finite scores, rows
// without a race group or ragged vectors.
void validate(const PredictionSet& set);

// Mann-Whitney AUROC: (concordant + 0.5 * tied) / (pos * neg), computed by
// sorting, so O(n log n). Throws DegenerateLabels without both classes.
double auroc(std::span<const double> scores, std::span<const std::uint8_t> labels);

// Unweighted mean of per-label AUROC; samples without ground truth for a
// label are left out of that label only.
double macro_diagnostic_auroc(const PredictionSet& set);

// Macro one-vs-rest AUROC over race groups that have a score column and at
// least one member. Throws MissingRaceScores, SingleGroup.
double race_auroc(const PredictionSet& set);

enum class DisparityMode { kPairwiseMean, kMaxMin };
std::string_view to_string(DisparityMode m);
std::optional<DisparityMode> disparity_from_name(std::string_view name);

struct Disparity {
  double value = 0.0;
  int valid_cells = 0;  // (label, group) cells with both classes present
  int total_cells = 0;
  int labels_used = 0;  // labels with >= 2 valid groups
};

// Per label, AUROC within each race group; the spread across groups is the
// mean absolute difference over unordered group pairs (or max - min), and
// the result averages it over labels with >= 2 valid groups. Single-class
// cells are skipped and counted in the coverage fields. Throws NoValidCells.
Disparity group_disparity(const PredictionSet& set,
                          DisparityMode mode = DisparityMode::kPairwiseMean);

struct SeedSummary {
  double mean = 0.0;
  std::optional<double> stddev;  // sample std (n - 1); absent for n == 1
  int n = 0;
};

SeedSummary aggregate_seeds(std::span<const double> values);

}  // namespace cxrprep::metrics
