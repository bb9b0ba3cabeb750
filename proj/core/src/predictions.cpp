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

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "cxrprep/csv.hpp"
#include "cxrprep/error.hpp"
#include "cxrprep/metrics.hpp"

namespace cxrprep::metrics {

namespace {

constexpr std::string_view kScore = "score:";
constexpr std::string_view kTruth = "gt:";
constexpr std::string_view kRace = "race_score:";

std::string format_real(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

bool starts_with(std::string_view s, std::string_view prefix) {
  return s.substr(0, prefix.size()) == prefix;
}

}  // namespace

PredictionSet parse_predictions(std::string_view text, const std::string& source) {
  PredictionSet set;
  auto error = [&](std::size_t line, const std::string& what) {
    fail(ErrorCode::kSchemaMismatch, source + ":" + std::to_string(line) + ": " + what);
  };

  std::optional<Method> method;
  std::optional<std::int64_t> seed;
  std::optional<Dataset> dataset;
  std::vector<std::string> header;
  std::size_t header_line = 0;
  std::vector<int> score_col;
  std::vector<int> truth_col;
  std::vector<int> race_col;
  int id_col = -1;
  int group_col = -1;
  std::unordered_set<std::string> ids;

  auto parse_unit = [&](const std::string& field, std::size_t line, const std::string& column) {
    double v = 0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (field.empty() || ec != std::errc() || ptr != last || !std::isfinite(v) || v < 0.0 || v > 1.0) {
      error(line, "column '" + column + "': '" + field + "' is not a finite score in [0,1]");
    }
    return v;
  };

  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> fields;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (header.empty() && line.front() == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = line.substr(1, eq - 1);
      const std::string value = line.substr(eq + 1);
      if (key == "method") {
        method = method_from_name(value);
        if (!method) error(line_no, "unknown method '" + value + "'");
      } else if (key == "seed") {
        std::int64_t s = 0;
        auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), s);
        if (ec != std::errc() || ptr != value.data() + value.size()) error(line_no, "bad seed '" + value + "'");
        seed = s;
      } else if (key == "dataset") {
        dataset = dataset_from_name(value);
        if (!dataset) error(line_no, "unknown dataset '" + value + "'");
      }
      continue;
    }
    if (!csv::split_line(line, fields)) error(line_no, "unterminated quote");

    if (header.empty()) {
      header = fields;
      header_line = line_no;
      for (std::size_t i = 0; i < header.size(); ++i) {
        const std::string& h = header[i];
        if (h == "sample_id") {
          id_col = static_cast<int>(i);
        } else if (h == "race_group") {
          group_col = static_cast<int>(i);
        } else if (starts_with(h, kScore)) {
          set.labels.push_back(h.substr(kScore.size()));
          score_col.push_back(static_cast<int>(i));
        } else if (starts_with(h, kRace)) {
          set.race_groups.push_back(h.substr(kRace.size()));
          race_col.push_back(static_cast<int>(i));
        } else if (!starts_with(h, kTruth)) {
          error(line_no, "unexpected column '" + h + "'");
        }
      }
      if (id_col < 0) error(line_no, "missing column 'sample_id'");
      if (group_col < 0) error(line_no, "missing column 'race_group'");
      if (set.labels.empty()) error(line_no, "no score:<label> columns");
      for (const auto& label : set.labels) {
        int c = -1;
        for (std::size_t i = 0; i < header.size(); ++i) {
          if (header[i] == std::string(kTruth) + label) c = static_cast<int>(i);
        }
        if (c < 0) error(line_no, "missing column 'gt:" + label + "'");
        truth_col.push_back(c);
      }
      std::size_t truth_columns = 0;
      for (const auto& h : header) truth_columns += starts_with(h, kTruth);
      if (truth_columns != set.labels.size()) error(line_no, "gt: column without matching score:");
      continue;
    }

    if (fields.size() != header.size()) {
      error(line_no, "expected " + std::to_string(header.size()) + " fields, found " +
                         std::to_string(fields.size()));
    }
    PredictionRow row;
    row.sample_id = fields[static_cast<std::size_t>(id_col)];
    row.race_group = fields[static_cast<std::size_t>(group_col)];
    if (row.sample_id.empty()) error(line_no, "empty sample_id");
    if (row.race_group.empty()) error(line_no, "empty race_group");
    if (!ids.insert(row.sample_id).second) error(line_no, "duplicate sample_id '" + row.sample_id + "'");
    for (std::size_t l = 0; l < set.labels.size(); ++l) {
      row.scores.push_back(parse_unit(fields[static_cast<std::size_t>(score_col[l])], line_no,
                                      header[static_cast<std::size_t>(score_col[l])]));
      const std::string& t = fields[static_cast<std::size_t>(truth_col[l])];
      if (t.empty()) {
        row.truth.push_back(kAbsent);
      } else if (t == "1" || t == "1.0") {
        row.truth.push_back(1);
      } else if (t == "0" || t == "0.0") {
        row.truth.push_back(0);
      } else {
        error(line_no, "column 'gt:" + set.labels[l] + "': '" + t + "' is not 0, 1 or empty");
      }
    }
    for (std::size_t g = 0; g < race_col.size(); ++g) {
      row.race_scores.push_back(parse_unit(fields[static_cast<std::size_t>(race_col[g])], line_no,
                                           header[static_cast<std::size_t>(race_col[g])]));
    }
    set.rows.push_back(std::move(row));
  }

  if (header.empty()) error(line_no, "missing header row");
  if (!method) error(header_line, "missing '#method=' line");
  if (!seed) error(header_line, "missing '#seed=' line");
  if (!dataset) error(header_line, "missing '#dataset=' line");
  if (set.rows.empty()) error(header_line, "no prediction rows");
  set.method = *method;
  set.seed = *seed;
  set.dataset = *dataset;
  return set;
}

PredictionSet read_predictions(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kFileNotFound, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_predictions(buf.str(), path.string());
}

void validate(const PredictionSet& set) {
  std::unordered_set<std::string> ids;
  for (const auto& row : set.rows) {
    if (!ids.insert(row.sample_id).second) {
      fail(ErrorCode::kSchemaMismatch, "duplicate sample_id '" + row.sample_id + "'");
    }
    if (row.race_group.empty()) fail(ErrorCode::kSchemaMismatch, row.sample_id + ": empty race_group");
    if (row.scores.size() != set.labels.size() || row.truth.size() != set.labels.size() ||
        row.race_scores.size() != set.race_groups.size()) {
      fail(ErrorCode::kSchemaMismatch, row.sample_id + ": row width does not match columns");
    }
    for (double v : row.scores) {
      if (!std::isfinite(v)) fail(ErrorCode::kSchemaMismatch, row.sample_id + ": non-finite score");
    }
    for (double v : row.race_scores) {
      if (!std::isfinite(v)) fail(ErrorCode::kSchemaMismatch, row.sample_id + ": non-finite race score");
    }
  }
}

std::string render_predictions(const PredictionSet& set) {
  validate(set);
  std::ostringstream out;
  out << "#method=" << to_string(set.method) << "\n";
  out << "#seed=" << set.seed << "\n";
  out << "#dataset=" << to_string(set.dataset) << "\n";
  std::vector<std::string> header = {"sample_id", "race_group"};
  for (const auto& l : set.labels) header.push_back(std::string(kScore) + l);
  for (const auto& l : set.labels) header.push_back(std::string(kTruth) + l);
  for (const auto& g : set.race_groups) header.push_back(std::string(kRace) + g);
  out << csv::join(header) << "\n";
  for (const auto& row : set.rows) {
    std::vector<std::string> f = {row.sample_id, row.race_group};
    for (double s : row.scores) f.push_back(format_real(s));
    for (std::int8_t t : row.truth) f.push_back(t == kAbsent ? "" : std::to_string(t));
    for (double s : row.race_scores) f.push_back(format_real(s));
    out << csv::join(f) << "\n";
  }
  return out.str();
}

}  // namespace cxrprep::metrics
