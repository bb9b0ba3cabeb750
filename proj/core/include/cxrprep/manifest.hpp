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
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cxrprep::manifest {

enum class View { kAP, kPA, kLateral, kOther };
enum class RaceGroup { kWhite, kBlack, kAsian, kHispanic, kOther };
enum class LabelValue : std::int8_t { kNegative = 0, kPositive = 1, kUnlabeled = -1 };
enum class Split { kTrain, kVal, kTest, kExcluded };

std::string_view to_string(View v);
std::string_view to_string(RaceGroup g);
std::string_view to_string(Split s);

// Lenient parsers used on dataset metadata. Unknown views become kOther,
// unknown race strings become RaceGroup::kOther.
View parse_view(std::string_view text);
RaceGroup parse_race(std::string_view text);
// Strict round-trip parsers for our own manifest files.
std::optional<RaceGroup> race_from_name(std::string_view name);
std::optional<Split> split_from_name(std::string_view name);
std::optional<View> view_from_name(std::string_view name);
// "1" positive, "0" negative, "-1" (uncertain) or empty -> unlabeled.
// Accepts the trailing ".0" forms written by pandas. nullopt if unparseable.
std::optional<LabelValue> parse_label(std::string_view text);

// Eleven of the fourteen CheXpert observations: No Finding, Pleural Other
// and Support Devices are left out.
std::vector<std::string> default_labels();
std::vector<RaceGroup> default_groups();

struct Record {
  std::string record_id;
  std::string patient_id;
  View view = View::kOther;
  std::vector<LabelValue> labels;  // aligned with Manifest::label_names
  RaceGroup race = RaceGroup::kOther;
  std::optional<double> rca_score;
  std::string image_path;
  std::optional<std::string> mask_path;
  std::optional<Split> split;

  int labeled_count() const;
};

struct Exclusion {
  std::string record_id;
  std::string reason;
  std::string detail;
  bool operator==(const Exclusion&) const = default;
};

// A metadata row that could not be used, kept for the error report.
struct IngestIssue {
  std::string file;
  std::size_t line = 0;
  std::string record_id;
  std::string message;
};

struct SamplingSpec {
  int positives_per_cell = 35;
  std::vector<std::string> label_list = default_labels();
  std::vector<RaceGroup> groups = default_groups();
  std::uint64_t seed = 0;
  double val_fraction = 0.05;

  void validate() const;
};

struct MetadataFiles {
  std::filesystem::path records;                      // record_id, patient_id, view, image_path, labels...
  std::optional<std::filesystem::path> demographics;  // record_id or patient_id, race
  std::optional<std::filesystem::path> rca;           // record_id, rca_score
};

struct IngestResult {
  std::vector<Record> records;  // sorted by record_id
  std::vector<IngestIssue> issues;
};

// Joins the metadata files on record_id (demographics may key on
// patient_id instead). Throws FileNotFound, SchemaMismatch (missing column
// or configured label), DuplicateRecordId.
IngestResult ingest_metadata(const MetadataFiles& files, const std::vector<std::string>& labels);

// Each filter returns the kept records in input order and appends one
// Exclusion per dropped record when 'log' is non-null.
std::vector<Record> select_frontal(const std::vector<Record>& records,
                                   std::vector<Exclusion>* log = nullptr);

// One record per patient: most non-unlabeled entries, ties to the
// lexicographically smallest record_id. Output sorted by record_id.
std::vector<Record> select_one_per_patient(const std::vector<Record>& records,
                                           std::vector<Exclusion>* log = nullptr);

// Strictly greater than threshold; records without a score are dropped.
std::vector<Record> filter_by_rca(const std::vector<Record>& records, double threshold,
                                  std::vector<Exclusion>* log = nullptr);

struct Shortfall {
  std::string label;
  RaceGroup group;
  int wanted = 0;
  int found = 0;
};

struct SamplingResult {
  std::vector<Record> test;  // sorted by record_id
  std::vector<Shortfall> shortfalls;
};

// Stratified positive sampling over (label, group) cells in list order.
// A record already drawn for an earlier cell counts toward every later cell
// it is positive for, so multi-label positives appear once and shrink the
// total. Cells short of candidates take all of them and report a shortfall.
SamplingResult sample_test_set(const std::vector<Record>& records, const SamplingSpec& spec,
                               const std::vector<std::string>& label_names);

// Patient-level split of the remaining records; val gets
// round(val_fraction * patients) patients. Throws OverlapViolation if any
// patient would appear in two of train/val/test.
std::pair<std::vector<Record>, std::vector<Record>> split_train_val(
    const std::vector<Record>& records, const SamplingSpec& spec,
    const std::vector<Record>& test = {});

enum class BuildMode { kSplit, kEvalOnly };

struct BuildOptions {
  MetadataFiles files;
  SamplingSpec sampling;
  BuildMode mode = BuildMode::kSplit;
  bool require_masks = false;
  double rca_threshold = 0.7;
  std::string tool_version;
};

struct Manifest {
  std::vector<std::string> label_names;
  std::vector<std::pair<std::string, std::string>> header;  // key=value comment lines
  std::vector<Record> records;  // every ingested record, split assigned, sorted by record_id
};

struct BuildResult {
  Manifest manifest;
  std::vector<Exclusion> exclusions;
  std::vector<IngestIssue> issues;
  std::vector<Shortfall> shortfalls;
};

BuildResult build_manifest(const BuildOptions& options);

// Canonical text of the options that determine a build (inputs by content hash).
std::string canonical_options(const BuildOptions& options);

std::string render_manifest(const Manifest& manifest);
std::string render_exclusions(const BuildResult& result);
Manifest read_manifest(const std::filesystem::path& path);

// Throws OverlapViolation if a patient appears in more than one split.
void check_disjoint(const std::vector<Record>& records);

}  // namespace cxrprep::manifest
