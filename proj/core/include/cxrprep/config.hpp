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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cxrprep/clahe.hpp"
#include "cxrprep/manifest.hpp"
#include "cxrprep/metrics.hpp"
#include "cxrprep/probe.hpp"

namespace cxrprep {

std::string_view tool_version();

enum class ClaheOrder { kNative, kDownscaled };
enum class BoxSource { kDilated, kRaw };
enum class ProbeBackground { kAuto, kInclude, kExclude };

// Every tunable of the tool. Keys are the snake_case field names; the same
// keys are accepted in a --config file, as CXRPREP_<KEY> environment
// variables and as --<key-with-dashes> flags, in increasing precedence.
struct PipelineConfig {
  metrics::Method method = metrics::Method::kBaseline;
  int target_width = 224;
  int target_height = 224;

  clahe::Params clahe;
  ClaheOrder clahe_order = ClaheOrder::kNative;

  int margin_px = 60;
  int mask_native_res = 1024;
  bool letterbox = false;
  BoxSource bbox_source = BoxSource::kDilated;
  std::uint16_t background = 0;
  bool export_8bit = false;

  double rca_threshold = 0.7;
  manifest::SamplingSpec sampling;

  unsigned workers = 1;
  double max_failure_rate = 0.05;

  metrics::DisparityMode disparity = metrics::DisparityMode::kPairwiseMean;

  probe::Hyper probe;
  ProbeBackground probe_background = ProbeBackground::kAuto;

  // Sets one key from its text form. Throws InvalidArgument on an unknown
  // key or a malformed value.
  void set(const std::string& key, const std::string& value);

  // key -> canonical text value for every key.
  std::map<std::string, std::string> values() const;

  void validate() const;

  // Background exclusion the probe uses for this method.
  bool probe_excludes_background() const;
};

// Keys that determine preprocessed pixels; workers and paths are excluded
// so outputs hash identically at any worker count.
std::vector<std::string> prep_keys();
std::vector<std::string> probe_keys();

// "key=value\n" lines in key order for the given keys (all keys if empty).
std::string canonical_text(const PipelineConfig& config, const std::vector<std::string>& keys = {});
std::string config_hash(const PipelineConfig& config, const std::vector<std::string>& keys = {});

// key=value lines; blank lines and '#' comments ignored. Throws
// FileNotFound, InvalidArgument naming the line.
void load_config_file(PipelineConfig& config, const std::filesystem::path& path);

// Applies CXRPREP_<KEY> variables found in the environment.
void apply_environment(PipelineConfig& config);

std::string env_name(const std::string& key);

}  // namespace cxrprep
