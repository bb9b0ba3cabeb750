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

#include "cxrprep/commands.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>

#include <json.hpp>

#include "cxrprep/csv.hpp"
#include "cxrprep/error.hpp"
#include "cxrprep/hash.hpp"
#include "cxrprep/parallel.hpp"

namespace cxrprep {

namespace fs = std::filesystem;

namespace {

void write_atomic(const fs::path& path, std::string_view bytes) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::kIoError, "cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(ErrorCode::kIoError, "short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) fail(ErrorCode::kIoError, "cannot rename " + tmp.string() + ": " + ec.message());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kFileNotFound, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void require_file(const fs::path& path, const char* what) {
  if (!fs::is_regular_file(path)) {
    fail(ErrorCode::kFileNotFound, std::string(what) + " not found: " + path.string());
  }
}

void refuse_existing(const std::vector<fs::path>& outputs, bool force) {
  if (force) return;
  for (const auto& p : outputs) {
    if (fs::exists(p)) {
      fail(ErrorCode::kOutputExists, p.string() + " already exists; pass --force to overwrite");
    }
  }
}

// Serialises log calls from worker threads.
class SerialLog {
 public:
  explicit SerialLog(const LogFn& sink) : sink_(sink) {}
  void operator()(const std::string& message) {
    if (!sink_) return;
    std::lock_guard lock(mutex_);
    sink_(message);
  }

 private:
  const LogFn& sink_;
  std::mutex mutex_;
};

fs::path resolve(const fs::path& root, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : root / path;
}

std::string lower_ext(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

std::string sidecar_text(std::size_t size, const std::string& checksum, const std::string& hash) {
  return "size=" + std::to_string(size) + "\nfnv1a64=" + checksum + "\nconfig_hash=" + hash + "\n";
}

fs::path sidecar_path(const fs::path& output) {
  fs::path p = output;
  p += ".sum";
  return p;
}

bool output_is_valid(const fs::path& output, const std::string& hash) {
  std::error_code ec;
  if (!fs::is_regular_file(output, ec) || !fs::is_regular_file(sidecar_path(output), ec)) return false;
  const auto size = fs::file_size(output, ec);
  if (ec) return false;
  return read_text(sidecar_path(output)) ==
         sidecar_text(static_cast<std::size_t>(size), file_hash_hex(output), hash);
}

std::vector<std::uint8_t> encode_for(const GrayImage& img, const std::string& ext) {
  return ext == ".pgm" ? encode_pgm(img) : encode_png(img);
}

fs::path find_prepped(const fs::path& dir, const std::string& record_id) {
  for (const char* ext : {".png", ".pgm"}) {
    fs::path p = dir / (output_stem(record_id) + ext);
    if (fs::is_regular_file(p)) return p;
  }
  fail(ErrorCode::kFileNotFound, "no preprocessed image for record '" + record_id + "' in " + dir.string());
}

}  // namespace

bool method_needs_mask(metrics::Method method) {
  return method == metrics::Method::kMasking || method == metrics::Method::kCropping;
}

std::string output_stem(const std::string& record_id) {
  std::string out = record_id;
  for (char& c : out) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
    if (!ok) c = '_';
  }
  if (out.empty() || out.front() == '.') out.insert(out.begin(), '_');
  return out;
}

// ---------------------------------------------------------------- manifest

ManifestSummary cmd_manifest(const PipelineConfig& config, const ManifestArgs& args, const LogFn& log) {
  config.validate();
  require_file(args.files.records, "records file");
  if (args.files.demographics) require_file(*args.files.demographics, "demographics file");
  if (args.files.rca) require_file(*args.files.rca, "rca file");
  const fs::path manifest_path = args.out_dir / "manifest.csv";
  const fs::path exclusions_path = args.out_dir / "exclusions.csv";
  refuse_existing({manifest_path, exclusions_path}, args.force);

  manifest::BuildOptions options;
  options.files = args.files;
  options.sampling = config.sampling;
  options.mode = args.mode;
  options.require_masks = args.require_masks || method_needs_mask(config.method);
  options.rca_threshold = config.rca_threshold;
  options.tool_version = std::string(tool_version());
  const manifest::BuildResult result = manifest::build_manifest(options);

  const std::string manifest_text = manifest::render_manifest(result.manifest);
  const std::string exclusions_text = manifest::render_exclusions(result);
  fs::create_directories(args.out_dir);
  write_atomic(manifest_path, manifest_text);
  write_atomic(exclusions_path, exclusions_text);

  ManifestSummary s;
  for (const auto& r : result.manifest.records) {
    switch (r.split.value_or(manifest::Split::kExcluded)) {
      case manifest::Split::kTrain: ++s.train; break;
      case manifest::Split::kVal: ++s.val; break;
      case manifest::Split::kTest: ++s.test; break;
      case manifest::Split::kExcluded: ++s.excluded; break;
    }
  }
  s.issues = result.issues.size();
  s.shortfalls = result.shortfalls.size();
  if (log) {
    for (const auto& sf : result.shortfalls) {
      log("warning: cell (" + sf.label + ", " + std::string(manifest::to_string(sf.group)) + ") has " +
          std::to_string(sf.found) + " of " + std::to_string(sf.wanted) + " positives");
    }
    for (const auto& i : result.issues) {
      log("warning: " + i.file + ":" + std::to_string(i.line) + ": " + i.message);
    }
    log("manifest: train=" + std::to_string(s.train) + " val=" + std::to_string(s.val) +
        " test=" + std::to_string(s.test) + " excluded=" + std::to_string(s.excluded));
  }
  return s;
}

// ---------------------------------------------------------------- prep

GrayImage preprocess(const GrayImage& img, const std::optional<mask::BinaryMask>& lung_mask,
                     const PipelineConfig& config, unsigned workers) {
  const int tw = config.target_width;
  const int th = config.target_height;
  GrayImage out;
  switch (config.method) {
    case metrics::Method::kBaseline:
      out = downscale(img, tw, th);
      break;
    case metrics::Method::kClahe:
      if (config.clahe_order == ClaheOrder::kNative) {
        out = downscale(clahe::apply_clahe(img, config.clahe, workers), tw, th);
      } else {
        out = clahe::apply_clahe(downscale(img, tw, th), config.clahe, workers);
      }
      break;
    case metrics::Method::kMasking:
    case metrics::Method::kCropping: {
      if (!lung_mask) fail(ErrorCode::kInvalidArgument, "method requires a lung mask");
      if (!lung_mask->any()) fail(ErrorCode::kEmptyMask, "lung mask has no foreground pixels");
      const int radius = mask::scaled_margin(config.margin_px, lung_mask->native_resolution(),
                                             lung_mask->width());
      if (config.method == metrics::Method::kMasking) {
        const auto dilated = mask::dilate(*lung_mask, radius);
        const auto aligned = mask::resample_mask(dilated, img.width(), img.height());
        if (!aligned.any()) fail(ErrorCode::kEmptyMask, "lung mask vanishes at image resolution");
        out = downscale(mask::apply_mask(img, aligned, config.background), tw, th);
      } else {
        const auto source = config.bbox_source == BoxSource::kDilated ? mask::dilate(*lung_mask, radius)
                                                                      : *lung_mask;
        const auto box = mask::scale_box(mask::bounding_box(source), source.width(), source.height(),
                                         img.width(), img.height());
        GrayImage cropped = mask::crop(img, box);
        if (config.letterbox) cropped = mask::letterbox(cropped, config.background);
        out = downscale(cropped, tw, th);
      }
      break;
    }
  }
  return config.export_8bit ? to_8bit(out) : out;
}

PrepSummary cmd_prep(const PipelineConfig& config, const PrepArgs& args, const LogFn& log) {
  config.validate();
  require_file(args.manifest, "manifest");
  const manifest::Manifest m = manifest::read_manifest(args.manifest);
  const fs::path root = args.image_root.empty() ? args.manifest.parent_path() : args.image_root;
  const std::string hash = config_hash(config, prep_keys());
  const bool needs_mask = method_needs_mask(config.method);

  fs::create_directories(args.out_dir);
  const fs::path stamp = args.out_dir / ".cxrprep-prep";
  if (fs::exists(stamp) && !args.force && read_text(stamp) != hash + "\n") {
    fail(ErrorCode::kOutputExists, args.out_dir.string() +
                                       " holds outputs of a different configuration; pass --force");
  }
  write_atomic(stamp, hash + "\n");

  std::vector<const manifest::Record*> records;
  std::set<std::string> stems;
  for (const auto& r : m.records) {
    if (r.split.value_or(manifest::Split::kExcluded) == manifest::Split::kExcluded) continue;
    if (!stems.insert(output_stem(r.record_id)).second) {
      fail(ErrorCode::kInvalidArgument, "record ids collide after sanitising: '" + r.record_id + "'");
    }
    records.push_back(&r);
  }

  enum class Status { kOk, kResumed, kFailed, kPending };
  struct Outcome {
    Status status = Status::kPending;
    std::string output;
    std::string detail;
  };
  std::vector<Outcome> outcomes(records.size());
  std::atomic<std::size_t> started{0};
  SerialLog serial(log);

  parallel_for(records.size(), config.workers, [&](std::size_t i) {
    const manifest::Record& r = *records[i];
    Outcome& o = outcomes[i];
    const fs::path image_path = resolve(root, r.image_path);
    std::string ext = config.export_8bit ? ".png" : lower_ext(image_path);
    if (ext != ".png" && ext != ".pgm") ext = ".png";
    const fs::path output = args.out_dir / (output_stem(r.record_id) + ext);
    o.output = output.filename().string();

    if (!args.force && output_is_valid(output, hash)) {
      o.status = Status::kResumed;
      return;
    }
    if (args.limit && started.fetch_add(1) >= *args.limit) return;
    try {
      const GrayImage img = load_image(image_path);
      std::optional<mask::BinaryMask> lung;
      if (needs_mask) {
        if (!r.mask_path) fail(ErrorCode::kFileNotFound, "record has no mask_path");
        lung = mask::from_image(load_image(resolve(root, *r.mask_path)), config.mask_native_res);
      }
      const auto bytes = encode_for(preprocess(img, lung, config), ext);
      write_atomic(output, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
      Fnv1a64 checksum;
      checksum.update(bytes);
      write_atomic(sidecar_path(output), sidecar_text(bytes.size(), checksum.hex(), hash));
      o.status = Status::kOk;
    } catch (const Error& e) {
      o.status = Status::kFailed;
      o.detail = std::string(to_string(e.code())) + ": " + e.what();
      serial("skip " + r.record_id + ": " + o.detail);
    }
  });

  PrepSummary s;
  s.total = records.size();
  std::ostringstream out;
  out << "#tool=cxrprep " << tool_version() << "\n#config_hash=" << hash << "\n";
  out << "record_id,status,output,detail\n";
  for (std::size_t i = 0; i < records.size(); ++i) {
    const Outcome& o = outcomes[i];
    const char* status = "ok";
    switch (o.status) {
      case Status::kOk: ++s.written; break;
      case Status::kResumed: ++s.resumed; break;
      case Status::kFailed: ++s.failed; status = "failed"; break;
      case Status::kPending: ++s.pending; status = "pending"; break;
    }
    out << csv::join({records[i]->record_id, status,
                      o.status == Status::kFailed || o.status == Status::kPending ? "" : o.output,
                      o.detail})
        << "\n";
  }
  write_atomic(args.out_dir / "prep_log.csv", out.str());
  serial("prep: " + std::to_string(s.written) + " written, " + std::to_string(s.resumed) +
         " already valid, " + std::to_string(s.failed) + " failed, " + std::to_string(s.pending) +
         " pending");

  if (s.total > 0 &&
      static_cast<double>(s.failed) / static_cast<double>(s.total) > config.max_failure_rate) {
    fail(ErrorCode::kFailureRateExceeded,
         std::to_string(s.failed) + " of " + std::to_string(s.total) +
             " records failed, above max_failure_rate");
  }
  return s;
}

// ---------------------------------------------------------------- eval

metrics::ReportTable cmd_eval(const PipelineConfig& config, const EvalArgs& args, const LogFn& log) {
  std::vector<fs::path> files;
  for (const auto& p : args.predictions) {
    if (fs::is_directory(p)) {
      std::vector<fs::path> found;
      for (const auto& entry : fs::directory_iterator(p)) {
        if (entry.is_regular_file() && lower_ext(entry.path()) == ".csv") found.push_back(entry.path());
      }
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else {
      require_file(p, "prediction file");
      files.push_back(p);
    }
  }
  if (files.empty()) fail(ErrorCode::kEmptyRunSet, "no prediction files given");

  const fs::path csv_path = args.out_dir / "report.csv";
  const fs::path md_path = args.out_dir / "report.md";
  refuse_existing({csv_path, md_path}, args.force);

  std::vector<metrics::PredictionSet> runs;
  runs.reserve(files.size());
  for (const auto& f : files) runs.push_back(metrics::read_predictions(f));

  metrics::ReportOptions options;
  options.mode = config.disparity;
  options.tool = "cxrprep " + std::string(tool_version());
  options.config_hash = metrics::eval_config_hash(config.disparity, files);
  auto table = metrics::build_report(runs, options);

  fs::create_directories(args.out_dir);
  write_atomic(csv_path, metrics::render_report_csv(table));
  write_atomic(md_path, metrics::render_report_markdown(table));
  if (log) log("eval: " + std::to_string(runs.size()) + " runs, " + std::to_string(table.rows.size()) + " methods");
  return table;
}

// ---------------------------------------------------------------- probe

namespace {

struct ProbeData {
  Eigen::MatrixXd features;
  std::vector<int> labels;
};

ProbeData load_probe_data(const manifest::Manifest& m, const fs::path& images,
                          const std::string& split, const std::vector<std::string>& groups,
                          bool exclude_zero, unsigned workers) {
  const auto wanted = manifest::split_from_name(split);
  if (!wanted) fail(ErrorCode::kInvalidArgument, "unknown split '" + split + "'");
  std::vector<const manifest::Record*> chosen;
  std::vector<int> labels;
  for (const auto& r : m.records) {
    if (r.split != wanted) continue;
    const auto it = std::find(groups.begin(), groups.end(), manifest::to_string(r.race));
    if (it == groups.end()) continue;
    chosen.push_back(&r);
    labels.push_back(static_cast<int>(it - groups.begin()));
  }
  ProbeData data;
  data.features.resize(static_cast<Eigen::Index>(chosen.size()), probe::kFeatureBins);
  parallel_for(chosen.size(), workers, [&](std::size_t i) {
    const GrayImage img = load_image(find_prepped(images, chosen[i]->record_id));
    data.features.row(static_cast<Eigen::Index>(i)) =
        probe::featurize(img, nullptr, {exclude_zero}).transpose();
  });
  data.labels = std::move(labels);
  return data;
}

}  // namespace

probe::ProbeModel cmd_probe_train(const PipelineConfig& config, const ProbeArgs& args, const LogFn& log) {
  config.validate();
  require_file(args.manifest, "manifest");
  refuse_existing({args.model}, args.force);
  const auto m = manifest::read_manifest(args.manifest);
  std::vector<std::string> groups;
  for (auto g : config.sampling.groups) groups.emplace_back(manifest::to_string(g));
  const bool exclude = config.probe_excludes_background();
  const ProbeData data = load_probe_data(m, args.images, args.split, groups, exclude, config.workers);
  auto model = probe::train_probe(data.features, data.labels, groups, config.probe);

  auto j = nlohmann::json::parse(probe::to_json(model));
  j["method"] = std::string(metrics::to_string(config.method));
  j["exclude_background"] = exclude;
  j["tool"] = "cxrprep " + std::string(tool_version());
  j["config_hash"] = config_hash(config, probe_keys());
  if (!args.model.parent_path().empty()) fs::create_directories(args.model.parent_path());
  write_atomic(args.model, j.dump(1) + "\n");
  if (log) {
    log("probe train: " + std::to_string(data.labels.size()) + " samples, final loss " +
        std::to_string(model.final_loss));
  }
  return model;
}

double cmd_probe_eval(const PipelineConfig& config, const ProbeArgs& args, const LogFn& log) {
  require_file(args.manifest, "manifest");
  require_file(args.model, "probe model");
  const std::string text = read_text(args.model);
  const probe::ProbeModel model = probe::from_json(text);
  std::string method;
  bool exclude = false;
  try {
    const auto j = nlohmann::json::parse(text);
    method = j.at("method").get<std::string>();
    exclude = j.at("exclude_background").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kCorruptData, args.model.string() + ": " + e.what());
  }
  const auto m = manifest::read_manifest(args.manifest);
  const ProbeData data = load_probe_data(m, args.images, args.split, model.groups, exclude, config.workers);
  const double auc = probe::probe_auroc(model, data.features, data.labels);
  const double acc = probe::accuracy(model, data.features, data.labels);

  std::string report;
  if (fs::exists(args.report)) {
    report = read_text(args.report);
  } else {
    report = "#tool=cxrprep " + std::string(tool_version()) + "\n" +
             "method,exclude_background,split,n_samples,macro_ovr_auroc,accuracy,model_hash\n";
  }
  char num[64];
  std::snprintf(num, sizeof(num), "%.6f,%.6f", auc, acc);
  report += method + "," + (exclude ? "true" : "false") + "," + args.split + "," +
            std::to_string(data.labels.size()) + "," + num + "," + fnv1a64_hex(text) + "\n";
  if (!args.report.parent_path().empty()) fs::create_directories(args.report.parent_path());
  write_atomic(args.report, report);
  if (log) log("probe eval: macro OvR AUROC " + std::string(num));
  return auc;
}

}  // namespace cxrprep
