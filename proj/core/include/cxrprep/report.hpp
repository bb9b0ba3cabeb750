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

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cxrprep/metrics.hpp"

namespace cxrprep::metrics {

struct ReportRow {
  Method method = Method::kBaseline;
  // Indexed by Dataset: [internal, external].
  std::array<std::optional<SeedSummary>, 2> race;
  std::array<std::optional<SeedSummary>, 2> diagnostic;
  std::array<std::optional<SeedSummary>, 2> disparity;
  std::array<int, 2> valid_cells{0, 0};
  std::array<int, 2> total_cells{0, 0};
};

struct ReportTable {
  std::string tool;
  std::string config_hash;
  DisparityMode mode = DisparityMode::kPairwiseMean;
  std::vector<ReportRow> rows;  // Baseline, Masking, Cropping, CLAHE order
};

struct ReportOptions {
  DisparityMode mode = DisparityMode::kPairwiseMean;
  std::string tool;
  std::string config_hash;
};

// Groups runs by (method, dataset) and summarises each Table-1 cell across
// seeds. Throws EmptyRunSet, DuplicateRun.
ReportTable build_report(const std::vector<PredictionSet>& runs, const ReportOptions& options);

std::string render_report_csv(const ReportTable& table);
std::string render_report_markdown(const ReportTable& table);

// "mean ± std" with the given number of decimals; mean alone when std is absent.
std::string format_cell(const std::optional<SeedSummary>& cell, int decimals);

// Hash of the eval configuration plus every input file (by name and content),
// independent of argument order.
std::string eval_config_hash(DisparityMode mode, const std::vector<std::filesystem::path>& inputs);

}  // namespace cxrprep::metrics
