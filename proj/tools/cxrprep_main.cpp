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

// cxrprep: dataset manifests, CXR preprocessing, histogram probes and
// AUROC/disparity reports from one command line.

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cxrprep/commands.hpp"
#include "cxrprep/config.hpp"
#include "cxrprep/error.hpp"

namespace {

constexpr const char* kExitCodes = R"(Exit codes:
  0   success
  1   unexpected internal error
  2   usage error or invalid configuration value
  3   input file not found
  4   unsupported or corrupt image
  5   I/O error while writing outputs
  6   schema mismatch in a CSV input (message names file and line)
  7   duplicate record id or duplicate (method, seed, dataset) run
  8   outputs already exist (rerun with --force)
  9   prep failure rate above --max-failure-rate (outputs and log are written)
  10  metric not computable (degenerate labels, missing race scores, ...)
  11  image geometry error (too small, mismatched mask, empty mask)
  12  patient overlap between splits (internal invariant)

Every configuration key can also be set in a --config file (key=value per
line) or through an environment variable CXRPREP_<KEY>, e.g.
CXRPREP_CLAHE_CLIP=3. Precedence: defaults < file < environment < flags.)";

struct Overrides {
  std::map<std::string, std::string> values;
};

void cerr_log(const std::string& message) { std::cerr << message << "\n"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cxrprep - chest X-ray preprocessing and fairness evaluation toolkit"};
  app.footer(kExitCodes);
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_file;
  bool force = false;
  Overrides overrides;
  app.add_option("--config", config_file, "key=value configuration file");
  app.add_flag("--force", force, "overwrite existing outputs / ignore resume state");

  const std::vector<std::pair<std::string, std::string>> keyed = {
      {"method", "baseline | masking | cropping | clahe"},
      {"workers", "worker threads"},
      {"seed", "seed for sampling, splitting and probe minibatches"},
      {"target", "output size WxH (default 224x224)"},
      {"clahe-grid", "CLAHE tile grid RxC (default 8x8)"},
      {"clahe-clip", "CLAHE clip limit, multiple of the mean bin count (default 2)"},
      {"clahe-bins", "CLAHE histogram bins (default 256)"},
      {"clahe-order", "native (CLAHE before downscaling) | downscaled"},
      {"margin-px", "dilation margin at the native mask resolution (default 60)"},
      {"mask-native-res", "resolution the margin is defined at (default 1024)"},
      {"letterbox", "pad crops to square before resizing (true|false)"},
      {"bbox-source", "dilated | raw mask for the crop box"},
      {"background", "intensity outside the mask (default 0)"},
      {"export-8bit", "write 8-bit PNG, min-max rescaling 16-bit data (true|false)"},
      {"rca-threshold", "keep masks with RCA strictly above this (default 0.7)"},
      {"positives-per-cell", "test positives per (label, group) cell (default 35)"},
      {"val-fraction", "fraction of patients for validation (default 0.05)"},
      {"labels", "comma-separated label columns"},
      {"groups", "comma-separated race groups"},
      {"max-failure-rate", "prep exits nonzero above this failure fraction (default 0.05)"},
      {"disparity", "pairwise_mean | max_min"},
      {"probe-lr", "probe learning rate (default 0.1)"},
      {"probe-steps", "probe gradient steps (default 2000)"},
      {"probe-l2", "probe L2 strength (default 1e-3)"},
      {"probe-batch", "probe minibatch size, 0 = full batch"},
      {"probe-background", "auto | include | exclude zero pixels in probe features"},
  };
  for (const auto& [flag, help] : keyed) {
    std::string key = flag;
    std::replace(key.begin(), key.end(), '-', '_');
    app.add_option_function<std::string>(
        "--" + flag, [&overrides, key](const std::string& v) { overrides.values[key] = v; }, help);
  }
  std::vector<std::string> sets;
  app.add_option("--set", sets, "KEY=VALUE override, repeatable");

  // manifest
  auto* manifest_cmd = app.add_subcommand("manifest", "build train/val/test manifest from metadata CSVs");
  cxrprep::ManifestArgs manifest_args;
  std::string demographics;
  std::string rca;
  std::string mode = "split";
  bool require_masks = false;
  manifest_cmd->add_option("--records", manifest_args.files.records, "records/labels CSV")->required();
  manifest_cmd->add_option("--demographics", demographics, "race CSV keyed by record_id or patient_id");
  manifest_cmd->add_option("--rca", rca, "mask quality CSV (record_id, rca_score)");
  manifest_cmd->add_option("--out", manifest_args.out_dir, "output directory")->required();
  manifest_cmd->add_option("--mode", mode, "split | eval (single external-evaluation manifest)")
      ->check(CLI::IsMember({"split", "eval"}));
  manifest_cmd->add_flag("--require-masks", require_masks, "apply mask and RCA filters regardless of method");

  // prep
  auto* prep_cmd = app.add_subcommand("prep", "preprocess every manifest record");
  cxrprep::PrepArgs prep_args;
  prep_cmd->add_option("--manifest", prep_args.manifest, "manifest.csv")->required();
  prep_cmd->add_option("--image-root", prep_args.image_root, "base directory for relative paths");
  prep_cmd->add_option("--out", prep_args.out_dir, "output directory")->required();

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "aggregate prediction CSVs into report.csv / report.md");
  cxrprep::EvalArgs eval_args;
  eval_cmd->add_option("predictions", eval_args.predictions, "prediction CSV files or directories")
      ->required();
  eval_cmd->add_option("--out", eval_args.out_dir, "output directory")->required();

  // probe
  auto* probe_cmd = app.add_subcommand("probe", "histogram race probe");
  probe_cmd->require_subcommand(1);
  cxrprep::ProbeArgs probe_args;
  auto* probe_train = probe_cmd->add_subcommand("train", "fit the probe on one split");
  auto* probe_eval = probe_cmd->add_subcommand("eval", "evaluate a probe, append to probe_report.csv");
  for (auto* sub : {probe_train, probe_eval}) {
    sub->add_option("--manifest", probe_args.manifest, "manifest.csv")->required();
    sub->add_option("--images", probe_args.images, "prep output directory")->required();
    sub->add_option("--model", probe_args.model, "probe model JSON")->required();
  }
  probe_train->add_option("--split", probe_args.split, "split to train on (default train)");
  probe_eval->add_option("--split", probe_args.split, "split to evaluate (default test)");
  probe_eval->add_option("--report", probe_args.report, "report CSV (default probe_report.csv)");
  probe_eval->callback([&] {
    if (probe_args.split == "train" && probe_eval->count("--split") == 0) probe_args.split = "test";
    if (probe_args.report.empty()) probe_args.report = "probe_report.csv";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    cxrprep::PipelineConfig config;
    if (!config_file.empty()) cxrprep::load_config_file(config, config_file);
    cxrprep::apply_environment(config);
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) {
        throw cxrprep::Error(cxrprep::ErrorCode::kInvalidArgument, "--set expects KEY=VALUE, got '" + s + "'");
      }
      config.set(s.substr(0, eq), s.substr(eq + 1));
    }
    for (const auto& [key, value] : overrides.values) config.set(key, value);
    config.validate();

    if (*manifest_cmd) {
      if (!demographics.empty()) manifest_args.files.demographics = demographics;
      if (!rca.empty()) manifest_args.files.rca = rca;
      manifest_args.mode = mode == "eval" ? cxrprep::manifest::BuildMode::kEvalOnly
                                          : cxrprep::manifest::BuildMode::kSplit;
      manifest_args.require_masks = require_masks;
      manifest_args.force = force;
      cxrprep::cmd_manifest(config, manifest_args, cerr_log);
    } else if (*prep_cmd) {
      prep_args.force = force;
      cxrprep::cmd_prep(config, prep_args, cerr_log);
    } else if (*eval_cmd) {
      eval_args.force = force;
      cxrprep::cmd_eval(config, eval_args, cerr_log);
    } else if (*probe_train) {
      probe_args.force = force;
      cxrprep::cmd_probe_train(config, probe_args, cerr_log);
    } else if (*probe_eval) {
      cxrprep::cmd_probe_eval(config, probe_args, cerr_log);
    }
  } catch (const cxrprep::Error& e) {
    std::cerr << "error [" << cxrprep::to_string(e.code()) << "]: " << e.what() << "\n";
    return cxrprep::exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
