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

#include "cxrprep/report.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>
#include <tuple>

#include "cxrprep/error.hpp"
#include "cxrprep/hash.hpp"

namespace cxrprep::metrics {

namespace {

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

}  // namespace

ReportTable build_report(const std::vector<PredictionSet>& runs, const ReportOptions& options) {
  if (runs.empty()) fail(ErrorCode::kEmptyRunSet, "no prediction runs given");

  std::map<std::tuple<int, std::int64_t, int>, const PredictionSet*> by_key;
  for (const auto& run : runs) {
    const auto key = std::make_tuple(static_cast<int>(run.method), run.seed, static_cast<int>(run.dataset));
    if (!by_key.emplace(key, &run).second) {
      fail(ErrorCode::kDuplicateRun, "duplicate run: method=" + std::string(to_string(run.method)) +
                                         " seed=" + std::to_string(run.seed) +
                                         " dataset=" + std::string(to_string(run.dataset)));
    }
  }

  ReportTable table;
  table.tool = options.tool;
  table.config_hash = options.config_hash;
  table.mode = options.mode;
  for (auto method : {Method::kBaseline, Method::kMasking, Method::kCropping, Method::kClahe}) {
    ReportRow row;
    row.method = method;
    bool any = false;
    for (auto dataset : {Dataset::kInternal, Dataset::kExternal}) {
      const auto d = static_cast<std::size_t>(dataset);
      std::vector<double> race;
      std::vector<double> diag;
      std::vector<double> disp;
      // std::map order: ascending seed within (method, dataset).
      for (const auto& [key, run] : by_key) {
        if (run->method != method || run->dataset != dataset) continue;
        any = true;
        if (run->has_race_scores()) race.push_back(race_auroc(*run));
        diag.push_back(macro_diagnostic_auroc(*run));
        const Disparity g = group_disparity(*run, options.mode);
        disp.push_back(g.value);
        row.valid_cells[d] += g.valid_cells;
        row.total_cells[d] += g.total_cells;
      }
      if (!race.empty()) row.race[d] = aggregate_seeds(race);
      if (!diag.empty()) row.diagnostic[d] = aggregate_seeds(diag);
      if (!disp.empty()) row.disparity[d] = aggregate_seeds(disp);
    }
    if (any) table.rows.push_back(row);
  }
  return table;
}

std::string format_cell(const std::optional<SeedSummary>& cell, int decimals) {
  if (!cell) return "n/a";
  std::string out = fixed(cell->mean, decimals);
  if (cell->stddev) out += " ± " + fixed(*cell->stddev, decimals);
  return out;
}

std::string render_report_csv(const ReportTable& table) {
  std::ostringstream out;
  out << "#tool=" << table.tool << "\n";
  out << "#config_hash=" << table.config_hash << "\n";
  out << "#disparity=" << to_string(table.mode) << "\n";
  out << "method";
  for (const char* metric : {"race", "diagnostic", "disparity"}) {
    for (const char* ds : {"internal", "external"}) {
      out << "," << metric << "_" << ds << "_mean," << metric << "_" << ds << "_std";
    }
  }
  out << ",seeds_internal,seeds_external,coverage_internal,coverage_external\n";
  auto emit = [&](const std::optional<SeedSummary>& c) {
    out << "," << (c ? fixed(c->mean, 6) : "") << ","
        << (c && c->stddev ? fixed(*c->stddev, 6) : "");
  };
  for (const auto& row : table.rows) {
    out << to_string(row.method);
    for (const auto* cells : {&row.race, &row.diagnostic, &row.disparity}) {
      emit((*cells)[0]);
      emit((*cells)[1]);
    }
    for (std::size_t d = 0; d < 2; ++d) out << "," << (row.diagnostic[d] ? row.diagnostic[d]->n : 0);
    for (std::size_t d = 0; d < 2; ++d) out << "," << row.valid_cells[d] << "/" << row.total_cells[d];
    out << "\n";
  }
  return out.str();
}

std::string render_report_markdown(const ReportTable& table) {
  std::ostringstream out;
  out << "<!-- " << table.tool << " | config_hash=" << table.config_hash
      << " | disparity=" << to_string(table.mode) << " -->\n\n";
  out << "Race and diagnostic AUROC, mean ± standard deviation across seeds.\n\n";
  out << "| Method | Race AUROC Internal | Race AUROC External | Diagnostic AUROC Internal | "
         "Diagnostic AUROC External |\n";
  out << "|:---|:---:|:---:|:---:|:---:|\n";
  for (const auto& row : table.rows) {
    out << "| " << display_name(row.method) << " | " << format_cell(row.race[0], 3) << " | "
        << format_cell(row.race[1], 3) << " | " << format_cell(row.diagnostic[0], 3) << " | "
        << format_cell(row.diagnostic[1], 3) << " |\n";
  }
  out << "\nAverage inter-group diagnostic AUROC difference ("
      << (table.mode == DisparityMode::kPairwiseMean ? "mean absolute pairwise difference"
                                                     : "max - min")
      << "), with (label, group) cell coverage.\n\n";
  out << "| Method | Disparity Internal | Disparity External | Coverage Internal | Coverage External |\n";
  out << "|:---|:---:|:---:|:---:|:---:|\n";
  for (const auto& row : table.rows) {
    out << "| " << display_name(row.method) << " | " << format_cell(row.disparity[0], 4) << " | "
        << format_cell(row.disparity[1], 4) << " | " << row.valid_cells[0] << "/"
        << row.total_cells[0] << " | " << row.valid_cells[1] << "/" << row.total_cells[1] << " |\n";
  }
  return out.str();
}

std::string eval_config_hash(DisparityMode mode, const std::vector<std::filesystem::path>& inputs) {
  std::vector<std::pair<std::string, std::string>> entries;
  for (const auto& p : inputs) entries.emplace_back(p.filename().string(), file_hash_hex(p));
  std::sort(entries.begin(), entries.end());
  std::string canonical = "disparity=" + std::string(to_string(mode)) + "\n";
  for (const auto& [name, hash] : entries) canonical += "input=" + name + ":" + hash + "\n";
  return fnv1a64_hex(canonical);
}

}  // namespace cxrprep::metrics
