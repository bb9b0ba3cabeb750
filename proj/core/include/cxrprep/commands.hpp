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

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cxrprep/config.hpp"
#include "cxrprep/image.hpp"
#include "cxrprep/mask.hpp"
#include "cxrprep/report.hpp"

namespace cxrprep {

// Progress and warning sink; calls are serialised by the commands.
using LogFn = std::function<void(const std::string&)>;

struct ManifestArgs {
  manifest::MetadataFiles files;
  std::filesystem::path out_dir;
  manifest::BuildMode mode = manifest::BuildMode::kSplit;
  bool require_masks = false;
  bool force = false;
};

struct ManifestSummary {
  std::size_t train = 0;
  std::size_t val = 0;
  std::size_t test = 0;
  std::size_t excluded = 0;
  std::size_t issues = 0;
  std::size_t shortfalls = 0;
};

// Writes <out>/manifest.csv and <out>/exclusions.csv. Nothing is written
// unless the whole build succeeds. Throws OutputExists without force.
ManifestSummary cmd_manifest(const PipelineConfig& config, const ManifestArgs& args,
                             const LogFn& log = {});

// Applies the configured method to one image. The mask is required for
// masking and cropping. Throws EmptyMask for masks without foreground.
GrayImage preprocess(const GrayImage& img, const std::optional<mask::BinaryMask>& lung_mask,
                     const PipelineConfig& config, unsigned workers = 1);

bool method_needs_mask(metrics::Method method);

struct PrepArgs {
  std::filesystem::path manifest;
  std::filesystem::path image_root;  // base for relative image/mask paths; default: manifest dir
  std::filesystem::path out_dir;
  bool force = false;
  // Stop after this many newly processed records (simulates an interrupted run).
  std::optional<std::size_t> limit;
};

struct PrepSummary {
  std::size_t total = 0;
  std::size_t written = 0;
  std::size_t resumed = 0;
  std::size_t failed = 0;
  std::size_t pending = 0;  // not attempted because of 'limit'
};

// One output per usable record, named <record_id>.<png|pgm>, with a
// <name>.sum sidecar (size, checksum, config hash) used to resume. Writes
// prep_log.csv. Throws FailureRateExceeded after writing everything if
// failed / total exceeds config.max_failure_rate.
PrepSummary cmd_prep(const PipelineConfig& config, const PrepArgs& args, const LogFn& log = {});

std::string output_stem(const std::string& record_id);

struct EvalArgs {
  std::vector<std::filesystem::path> predictions;  // files or directories of *.csv
  std::filesystem::path out_dir;
  bool force = false;
};

// Writes <out>/report.csv and <out>/report.md.
metrics::ReportTable cmd_eval(const PipelineConfig& config, const EvalArgs& args,
                              const LogFn& log = {});

struct ProbeArgs {
  std::filesystem::path manifest;
  std::filesystem::path images;  // cmd_prep output directory
  std::filesystem::path model;
  std::string split = "train";
  std::filesystem::path report;  // probe eval: probe_report.csv
  bool force = false;
};

probe::ProbeModel cmd_probe_train(const PipelineConfig& config, const ProbeArgs& args,
                                  const LogFn& log = {});

// Appends one row to args.report (created with a header if absent) and
// returns the macro one-vs-rest AUROC.
double cmd_probe_eval(const PipelineConfig& config, const ProbeArgs& args, const LogFn& log = {});

}  // namespace cxrprep
