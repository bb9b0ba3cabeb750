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

#include "cxrprep/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>

#include "cxrprep/error.hpp"
#include "cxrprep/hash.hpp"

namespace cxrprep {

#ifndef CXRPREP_VERSION
#define CXRPREP_VERSION "0.0.0"
#endif

std::string_view tool_version() { return CXRPREP_VERSION; }

namespace {

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* expected) {
  fail(ErrorCode::kInvalidArgument,
       "config key '" + key + "': '" + value + "' is not " + expected);
}

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

template <typename T>
T parse_int(const std::string& key, const std::string& value) {
  T v{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size()) bad_value(key, value, "an integer");
  return v;
}

double parse_double(const std::string& key, const std::string& value) {
  if (value == "inf" || value == "infinity") return INFINITY;
  double v = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size() || std::isnan(v)) {
    bad_value(key, value, "a number");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  bad_value(key, value, "a boolean");
}

std::pair<int, int> parse_pair(const std::string& key, const std::string& value) {
  const auto x = value.find_first_of("xX");
  if (x == std::string::npos) bad_value(key, value, "of the form AxB");
  return {parse_int<int>(key, value.substr(0, x)), parse_int<int>(key, value.substr(x + 1))};
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= value.size()) {
    const auto comma = value.find(',', start);
    const auto end = comma == std::string::npos ? value.size() : comma;
    const std::string item = trim(std::string_view(value).substr(start, end - start));
    if (!item.empty()) out.push_back(item);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string format_double(double v) {
  if (std::isinf(v)) return "inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + items[i];
  return out;
}

}  // namespace

void PipelineConfig::set(const std::string& raw_key, const std::string& raw_value) {
  std::string key = trim(raw_key);
  std::replace(key.begin(), key.end(), '-', '_');
  const std::string value = trim(raw_value);

  if (key == "method") {
    const auto m = metrics::method_from_name(value);
    if (!m) bad_value(key, value, "one of baseline, masking, cropping, clahe");
    method = *m;
  } else if (key == "target") {
    std::tie(target_width, target_height) = parse_pair(key, value);
  } else if (key == "clahe_grid") {
    std::tie(clahe.grid_rows, clahe.grid_cols) = parse_pair(key, value);
  } else if (key == "clahe_clip") {
    clahe.clip_limit = parse_double(key, value);
  } else if (key == "clahe_bins") {
    clahe.bins = parse_int<int>(key, value);
  } else if (key == "clahe_order") {
    if (value == "native") {
      clahe_order = ClaheOrder::kNative;
    } else if (value == "downscaled") {
      clahe_order = ClaheOrder::kDownscaled;
    } else {
      bad_value(key, value, "native or downscaled");
    }
  } else if (key == "margin_px") {
    margin_px = parse_int<int>(key, value);
  } else if (key == "mask_native_res") {
    mask_native_res = parse_int<int>(key, value);
  } else if (key == "letterbox") {
    letterbox = parse_bool(key, value);
  } else if (key == "bbox_source") {
    if (value == "dilated") {
      bbox_source = BoxSource::kDilated;
    } else if (value == "raw") {
      bbox_source = BoxSource::kRaw;
    } else {
      bad_value(key, value, "dilated or raw");
    }
  } else if (key == "background") {
    background = parse_int<std::uint16_t>(key, value);
  } else if (key == "export_8bit") {
    export_8bit = parse_bool(key, value);
  } else if (key == "rca_threshold") {
    rca_threshold = parse_double(key, value);
  } else if (key == "positives_per_cell") {
    sampling.positives_per_cell = parse_int<int>(key, value);
  } else if (key == "val_fraction") {
    sampling.val_fraction = parse_double(key, value);
  } else if (key == "labels") {
    sampling.label_list = split_list(value);
  } else if (key == "groups") {
    sampling.groups.clear();
    for (const auto& name : split_list(value)) {
      const auto g = manifest::race_from_name(name);
      if (!g) bad_value(key, name, "one of White, Black, Asian, Hispanic, Other");
      sampling.groups.push_back(*g);
    }
  } else if (key == "seed") {
    sampling.seed = parse_int<std::uint64_t>(key, value);
    probe.seed = sampling.seed;
  } else if (key == "workers") {
    workers = parse_int<unsigned>(key, value);
  } else if (key == "max_failure_rate") {
    max_failure_rate = parse_double(key, value);
  } else if (key == "disparity") {
    const auto d = metrics::disparity_from_name(value);
    if (!d) bad_value(key, value, "pairwise_mean or max_min");
    disparity = *d;
  } else if (key == "probe_lr") {
    probe.learning_rate = parse_double(key, value);
  } else if (key == "probe_steps") {
    probe.steps = parse_int<int>(key, value);
  } else if (key == "probe_l2") {
    probe.l2 = parse_double(key, value);
  } else if (key == "probe_batch") {
    probe.batch_size = parse_int<int>(key, value);
  } else if (key == "probe_background") {
    if (value == "auto") {
      probe_background = ProbeBackground::kAuto;
    } else if (value == "include") {
      probe_background = ProbeBackground::kInclude;
    } else if (value == "exclude") {
      probe_background = ProbeBackground::kExclude;
    } else {
      bad_value(key, value, "auto, include or exclude");
    }
  } else {
    fail(ErrorCode::kInvalidArgument, "unknown config key '" + key + "'");
  }
}

std::map<std::string, std::string> PipelineConfig::values() const {
  std::vector<std::string> groups;
  for (auto g : sampling.groups) groups.emplace_back(manifest::to_string(g));
  auto probe_bg = [&] {
    switch (probe_background) {
      case ProbeBackground::kAuto: return "auto";
      case ProbeBackground::kInclude: return "include";
      case ProbeBackground::kExclude: return "exclude";
    }
    return "auto";
  };
  return {
      {"method", std::string(metrics::to_string(method))},
      {"target", std::to_string(target_width) + "x" + std::to_string(target_height)},
      {"clahe_grid", std::to_string(clahe.grid_rows) + "x" + std::to_string(clahe.grid_cols)},
      {"clahe_clip", format_double(clahe.clip_limit)},
      {"clahe_bins", std::to_string(clahe.bins)},
      {"clahe_order", clahe_order == ClaheOrder::kNative ? "native" : "downscaled"},
      {"margin_px", std::to_string(margin_px)},
      {"mask_native_res", std::to_string(mask_native_res)},
      {"letterbox", letterbox ? "true" : "false"},
      {"bbox_source", bbox_source == BoxSource::kDilated ? "dilated" : "raw"},
      {"background", std::to_string(background)},
      {"export_8bit", export_8bit ? "true" : "false"},
      {"rca_threshold", format_double(rca_threshold)},
      {"positives_per_cell", std::to_string(sampling.positives_per_cell)},
      {"val_fraction", format_double(sampling.val_fraction)},
      {"labels", join(sampling.label_list)},
      {"groups", join(groups)},
      {"seed", std::to_string(sampling.seed)},
      {"workers", std::to_string(workers)},
      {"max_failure_rate", format_double(max_failure_rate)},
      {"disparity", std::string(metrics::to_string(disparity))},
      {"probe_lr", format_double(probe.learning_rate)},
      {"probe_steps", std::to_string(probe.steps)},
      {"probe_l2", format_double(probe.l2)},
      {"probe_batch", std::to_string(probe.batch_size)},
      {"probe_background", probe_bg()},
  };
}

void PipelineConfig::validate() const {
  if (target_width < 1 || target_height < 1) fail(ErrorCode::kInvalidArgument, "target must be >= 1x1");
  clahe.validate();
  if (margin_px < 0) fail(ErrorCode::kInvalidArgument, "margin_px must be >= 0");
  if (mask_native_res < 1) fail(ErrorCode::kInvalidArgument, "mask_native_res must be >= 1");
  if (workers < 1) fail(ErrorCode::kInvalidArgument, "workers must be >= 1");
  if (!(max_failure_rate >= 0.0 && max_failure_rate <= 1.0)) {
    fail(ErrorCode::kInvalidArgument, "max_failure_rate must be in [0, 1]");
  }
  if (!(rca_threshold >= 0.0 && rca_threshold <= 1.0)) {
    fail(ErrorCode::kInvalidArgument, "rca_threshold must be in [0, 1]");
  }
  sampling.validate();
}

bool PipelineConfig::probe_excludes_background() const {
  switch (probe_background) {
    case ProbeBackground::kInclude: return false;
    case ProbeBackground::kExclude: return true;
    case ProbeBackground::kAuto: break;
  }
  return method == metrics::Method::kMasking || method == metrics::Method::kCropping;
}

std::vector<std::string> prep_keys() {
  return {"method",    "target",          "clahe_grid", "clahe_clip",  "clahe_bins",
          "clahe_order", "margin_px",     "mask_native_res", "letterbox", "bbox_source",
          "background", "export_8bit"};
}

std::vector<std::string> probe_keys() {
  return {"method", "probe_lr", "probe_steps", "probe_l2", "probe_batch", "probe_background",
          "groups", "seed"};
}

std::string canonical_text(const PipelineConfig& config, const std::vector<std::string>& keys) {
  const auto all = config.values();
  std::vector<std::string> chosen = keys;
  if (chosen.empty()) {
    for (const auto& [k, v] : all) chosen.push_back(k);
  }
  std::sort(chosen.begin(), chosen.end());
  std::string out;
  for (const auto& k : chosen) out += k + "=" + all.at(k) + "\n";
  return out;
}

std::string config_hash(const PipelineConfig& config, const std::vector<std::string>& keys) {
  return fnv1a64_hex(canonical_text(config, keys));
}

void load_config_file(PipelineConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kFileNotFound, "cannot open config " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      fail(ErrorCode::kInvalidArgument,
           path.string() + ":" + std::to_string(line_no) + ": expected key=value");
    }
    try {
      config.set(t.substr(0, eq), t.substr(eq + 1));
    } catch (const Error& e) {
      fail(e.code(), path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

std::string env_name(const std::string& key) {
  std::string out = "CXRPREP_";
  for (char c : key) out.push_back(c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  return out;
}

void apply_environment(PipelineConfig& config) {
  for (const auto& [key, value] : config.values()) {
    if (const char* env = std::getenv(env_name(key).c_str())) {
      try {
        config.set(key, env);
      } catch (const Error& e) {
        fail(e.code(), env_name(key) + ": " + e.what());
      }
    }
  }
}

}  // namespace cxrprep
