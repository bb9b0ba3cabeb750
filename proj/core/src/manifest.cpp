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

#include "cxrprep/manifest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "cxrprep/csv.hpp"
#include "cxrprep/error.hpp"
#include "cxrprep/hash.hpp"
#include "cxrprep/rng.hpp"

namespace cxrprep::manifest {

namespace {

std::string upper_trim(std::string_view text) {
  std::size_t b = 0;
  std::size_t e = text.size();
  while (b < e && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
  std::string out(text.substr(b, e - b));
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}

bool contains(const std::string& haystack, std::string_view needle) {
  return haystack.find(needle) != std::string::npos;
}

std::string format_real(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

std::optional<double> parse_real(std::string_view text) {
  double v = 0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return v;
}

int require_column(const csv::Table& t, std::string_view name) {
  const int c = t.column(name);
  if (c < 0) {
    fail(ErrorCode::kSchemaMismatch,
         t.source.string() + ": missing required column '" + std::string(name) + "'");
  }
  return c;
}

constexpr std::string_view kNonFrontal = "non_frontal";
constexpr std::string_view kNotMostLabeled = "not_most_labeled";
constexpr std::string_view kRcaBelow = "rca_not_above_threshold";
constexpr std::string_view kRcaMissing = "rca_missing";
constexpr std::string_view kMaskMissing = "mask_missing";
constexpr std::string_view kGroupNotEvaluated = "group_not_evaluated";
constexpr std::string_view kTestPatient = "patient_in_test";

}  // namespace

std::string_view to_string(View v) {
  switch (v) {
    case View::kAP: return "AP";
    case View::kPA: return "PA";
    case View::kLateral: return "LATERAL";
    case View::kOther: return "OTHER";
  }
  return "OTHER";
}

std::string_view to_string(RaceGroup g) {
  switch (g) {
    case RaceGroup::kWhite: return "White";
    case RaceGroup::kBlack: return "Black";
    case RaceGroup::kAsian: return "Asian";
    case RaceGroup::kHispanic: return "Hispanic";
    case RaceGroup::kOther: return "Other";
  }
  return "Other";
}

std::string_view to_string(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
    case Split::kExcluded: return "excluded";
  }
  return "excluded";
}

View parse_view(std::string_view text) {
  const std::string v = upper_trim(text);
  if (v == "AP") return View::kAP;
  if (v == "PA") return View::kPA;
  if (v == "LATERAL" || v == "LL" || v == "RL" || v == "LAT") return View::kLateral;
  return View::kOther;
}

RaceGroup parse_race(std::string_view text) {
  const std::string v = upper_trim(text);
  const bool negated_hispanic =
      contains(v, "NON-HISPANIC") || contains(v, "NON HISPANIC") || contains(v, "NOT HISPANIC");
  if ((contains(v, "HISPANIC") || contains(v, "LATINO")) && !negated_hispanic) {
    return RaceGroup::kHispanic;
  }
  if (contains(v, "BLACK")) return RaceGroup::kBlack;
  if (contains(v, "ASIAN")) return RaceGroup::kAsian;
  if (contains(v, "WHITE")) return RaceGroup::kWhite;
  return RaceGroup::kOther;
}

std::optional<RaceGroup> race_from_name(std::string_view name) {
  for (auto g : {RaceGroup::kWhite, RaceGroup::kBlack, RaceGroup::kAsian, RaceGroup::kHispanic,
                 RaceGroup::kOther}) {
    if (to_string(g) == name) return g;
  }
  return std::nullopt;
}

std::optional<Split> split_from_name(std::string_view name) {
  for (auto s : {Split::kTrain, Split::kVal, Split::kTest, Split::kExcluded}) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

std::optional<View> view_from_name(std::string_view name) {
  for (auto v : {View::kAP, View::kPA, View::kLateral, View::kOther}) {
    if (to_string(v) == name) return v;
  }
  return std::nullopt;
}

std::optional<LabelValue> parse_label(std::string_view text) {
  if (text.empty()) return LabelValue::kUnlabeled;
  if (text == "1" || text == "1.0") return LabelValue::kPositive;
  if (text == "0" || text == "0.0") return LabelValue::kNegative;
  if (text == "-1" || text == "-1.0") return LabelValue::kUnlabeled;
  return std::nullopt;
}

std::vector<std::string> default_labels() {
  return {"Enlarged Cardiomediastinum", "Cardiomegaly", "Lung Opacity", "Lung Lesion",
          "Edema",                      "Consolidation", "Pneumonia",  "Atelectasis",
          "Pneumothorax",               "Pleural Effusion", "Fracture"};
}

std::vector<RaceGroup> default_groups() {
  return {RaceGroup::kWhite, RaceGroup::kBlack, RaceGroup::kAsian, RaceGroup::kHispanic};
}

int Record::labeled_count() const {
  return static_cast<int>(std::count_if(labels.begin(), labels.end(), [](LabelValue v) {
    return v != LabelValue::kUnlabeled;
  }));
}

void SamplingSpec::validate() const {
  if (positives_per_cell < 1) fail(ErrorCode::kInvalidArgument, "positives_per_cell must be >= 1");
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) {
    fail(ErrorCode::kInvalidArgument, "val_fraction must be in (0, 1)");
  }
  if (label_list.empty()) fail(ErrorCode::kInvalidArgument, "label list is empty");
  if (groups.empty()) fail(ErrorCode::kInvalidArgument, "group list is empty");
}

// ------------------------------------------------------------------ ingest

IngestResult ingest_metadata(const MetadataFiles& files, const std::vector<std::string>& labels) {
  IngestResult result;
  const csv::Table table = csv::read(files.records);
  const int c_id = require_column(table, "record_id");
  const int c_patient = require_column(table, "patient_id");
  const int c_view = require_column(table, "view");
  const int c_image = require_column(table, "image_path");
  const int c_mask = table.column("mask_path");
  const int c_race = table.column("race");
  const int c_rca = table.column("rca_score");
  std::vector<int> c_labels;
  for (const auto& name : labels) c_labels.push_back(require_column(table, name));

  const std::string src = files.records.string();
  std::unordered_map<std::string, std::size_t> index;
  for (const auto& row : table.rows) {
    const auto& f = row.fields;
    auto issue = [&](const std::string& msg) {
      result.issues.push_back({src, row.line, f[static_cast<std::size_t>(c_id)], msg});
    };
    Record r;
    r.record_id = f[static_cast<std::size_t>(c_id)];
    r.patient_id = f[static_cast<std::size_t>(c_patient)];
    if (r.record_id.empty() || r.patient_id.empty()) {
      issue("empty record_id or patient_id");
      continue;
    }
    if (index.count(r.record_id)) {
      fail(ErrorCode::kDuplicateRecordId,
           src + ":" + std::to_string(row.line) + ": duplicate record_id '" + r.record_id + "'");
    }
    r.view = parse_view(f[static_cast<std::size_t>(c_view)]);
    r.image_path = f[static_cast<std::size_t>(c_image)];
    if (c_mask >= 0 && !f[static_cast<std::size_t>(c_mask)].empty()) {
      r.mask_path = f[static_cast<std::size_t>(c_mask)];
    }
    if (c_race >= 0) r.race = parse_race(f[static_cast<std::size_t>(c_race)]);
    bool ok = true;
    for (std::size_t i = 0; i < c_labels.size() && ok; ++i) {
      const auto v = parse_label(f[static_cast<std::size_t>(c_labels[i])]);
      if (!v) {
        issue("unparseable value '" + f[static_cast<std::size_t>(c_labels[i])] +
              "' for label '" + labels[i] + "'");
        ok = false;
      } else {
        r.labels.push_back(*v);
      }
    }
    if (ok && c_rca >= 0 && !f[static_cast<std::size_t>(c_rca)].empty()) {
      const auto v = parse_real(f[static_cast<std::size_t>(c_rca)]);
      if (!v || *v < 0.0 || *v > 1.0) {
        issue("rca_score '" + f[static_cast<std::size_t>(c_rca)] + "' is not a real in [0,1]");
        ok = false;
      } else {
        r.rca_score = *v;
      }
    }
    if (!ok) continue;
    index.emplace(r.record_id, result.records.size());
    result.records.push_back(std::move(r));
  }

  if (files.demographics) {
    const csv::Table demo = csv::read(*files.demographics);
    const std::string dsrc = files.demographics->string();
    const int c_race_col = require_column(demo, "race");
    const int d_id = demo.column("record_id");
    const int d_patient = demo.column("patient_id");
    if (d_id < 0 && d_patient < 0) {
      fail(ErrorCode::kSchemaMismatch, dsrc + ": needs a record_id or patient_id column");
    }
    if (d_id >= 0) {
      std::unordered_set<std::string> seen;
      for (const auto& row : demo.rows) {
        const auto& id = row.fields[static_cast<std::size_t>(d_id)];
        if (!seen.insert(id).second) {
          fail(ErrorCode::kDuplicateRecordId,
               dsrc + ":" + std::to_string(row.line) + ": duplicate record_id '" + id + "'");
        }
        auto it = index.find(id);
        if (it == index.end()) {
          result.issues.push_back({dsrc, row.line, id, "orphan: record_id not in records file"});
          continue;
        }
        result.records[it->second].race = parse_race(row.fields[static_cast<std::size_t>(c_race_col)]);
      }
    } else {
      std::unordered_map<std::string, RaceGroup> by_patient;
      for (const auto& row : demo.rows) {
        const auto& pid = row.fields[static_cast<std::size_t>(d_patient)];
        const RaceGroup g = parse_race(row.fields[static_cast<std::size_t>(c_race_col)]);
        auto [it, inserted] = by_patient.emplace(pid, g);
        if (!inserted && it->second != g) {
          result.issues.push_back(
              {dsrc, row.line, "", "conflicting race for patient '" + pid + "'; first row kept"});
        }
      }
      std::unordered_set<std::string> used;
      for (auto& r : result.records) {
        auto it = by_patient.find(r.patient_id);
        if (it != by_patient.end()) {
          r.race = it->second;
          used.insert(r.patient_id);
        }
      }
      for (const auto& row : demo.rows) {
        const auto& pid = row.fields[static_cast<std::size_t>(d_patient)];
        if (!used.count(pid)) {
          result.issues.push_back({dsrc, row.line, "", "orphan: patient_id '" + pid + "' has no records"});
        }
      }
    }
  }

  if (files.rca) {
    const csv::Table rca = csv::read(*files.rca);
    const std::string rsrc = files.rca->string();
    const int r_id = require_column(rca, "record_id");
    const int r_score = require_column(rca, "rca_score");
    std::unordered_set<std::string> seen;
    for (const auto& row : rca.rows) {
      const auto& id = row.fields[static_cast<std::size_t>(r_id)];
      if (!seen.insert(id).second) {
        fail(ErrorCode::kDuplicateRecordId,
             rsrc + ":" + std::to_string(row.line) + ": duplicate record_id '" + id + "'");
      }
      auto it = index.find(id);
      if (it == index.end()) {
        result.issues.push_back({rsrc, row.line, id, "orphan: record_id not in records file"});
        continue;
      }
      const auto& text = row.fields[static_cast<std::size_t>(r_score)];
      if (text.empty()) continue;
      const auto v = parse_real(text);
      if (!v || *v < 0.0 || *v > 1.0) {
        result.issues.push_back({rsrc, row.line, id, "rca_score '" + text + "' is not a real in [0,1]"});
        continue;
      }
      result.records[it->second].rca_score = *v;
    }
  }

  std::sort(result.records.begin(), result.records.end(),
            [](const Record& a, const Record& b) { return a.record_id < b.record_id; });
  return result;
}

// ------------------------------------------------------------------ filters

std::vector<Record> select_frontal(const std::vector<Record>& records, std::vector<Exclusion>* log) {
  std::vector<Record> kept;
  for (const auto& r : records) {
    if (r.view == View::kAP || r.view == View::kPA) {
      kept.push_back(r);
    } else if (log) {
      log->push_back({r.record_id, std::string(kNonFrontal), std::string(to_string(r.view))});
    }
  }
  return kept;
}

std::vector<Record> select_one_per_patient(const std::vector<Record>& records,
                                           std::vector<Exclusion>* log) {
  std::map<std::string, const Record*> best;
  for (const auto& r : records) {
    auto [it, inserted] = best.emplace(r.patient_id, &r);
    if (inserted) continue;
    const Record* cur = it->second;
    const int a = r.labeled_count();
    const int b = cur->labeled_count();
    if (a > b || (a == b && r.record_id < cur->record_id)) it->second = &r;
  }
  std::vector<Record> kept;
  kept.reserve(best.size());
  for (const auto& [pid, rec] : best) kept.push_back(*rec);
  std::sort(kept.begin(), kept.end(),
            [](const Record& a, const Record& b) { return a.record_id < b.record_id; });
  if (log) {
    for (const auto& r : records) {
      const Record* chosen = best.at(r.patient_id);
      if (chosen != &r) log->push_back({r.record_id, std::string(kNotMostLabeled), chosen->record_id});
    }
  }
  return kept;
}

std::vector<Record> filter_by_rca(const std::vector<Record>& records, double threshold,
                                  std::vector<Exclusion>* log) {
  std::vector<Record> kept;
  for (const auto& r : records) {
    if (!r.rca_score) {
      if (log) log->push_back({r.record_id, std::string(kRcaMissing), ""});
    } else if (*r.rca_score > threshold) {
      kept.push_back(r);
    } else if (log) {
      log->push_back({r.record_id, std::string(kRcaBelow), format_real(*r.rca_score)});
    }
  }
  return kept;
}

// ------------------------------------------------------------------ sampling

SamplingResult sample_test_set(const std::vector<Record>& records, const SamplingSpec& spec,
                               const std::vector<std::string>& label_names) {
  spec.validate();
  std::vector<std::size_t> label_index;
  for (const auto& name : spec.label_list) {
    auto it = std::find(label_names.begin(), label_names.end(), name);
    if (it == label_names.end()) {
      fail(ErrorCode::kSchemaMismatch, "sampling label '" + name + "' not present in records");
    }
    label_index.push_back(static_cast<std::size_t>(it - label_names.begin()));
  }

  std::vector<const Record*> sorted;
  sorted.reserve(records.size());
  for (const auto& r : records) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(),
            [](const Record* a, const Record* b) { return a->record_id < b->record_id; });

  SeededRng rng(spec.seed, 1);
  SamplingResult result;
  std::unordered_set<const Record*> chosen;
  for (std::size_t l = 0; l < label_index.size(); ++l) {
    for (RaceGroup g : spec.groups) {
      std::vector<const Record*> pool;
      int already = 0;
      for (const Record* r : sorted) {
        if (r->race != g || r->labels.at(label_index[l]) != LabelValue::kPositive) continue;
        if (chosen.count(r)) {
          ++already;
        } else {
          pool.push_back(r);
        }
      }
      const int need = spec.positives_per_cell - already;
      if (need <= 0) continue;
      rng.shuffle(pool);
      const int take = std::min<int>(need, static_cast<int>(pool.size()));
      for (int i = 0; i < take; ++i) chosen.insert(pool[static_cast<std::size_t>(i)]);
      if (take < need) {
        result.shortfalls.push_back(
            {spec.label_list[l], g, spec.positives_per_cell, already + take});
      }
    }
  }
  for (const Record* r : sorted) {
    if (chosen.count(r)) result.test.push_back(*r);
  }
  return result;
}

std::pair<std::vector<Record>, std::vector<Record>> split_train_val(
    const std::vector<Record>& records, const SamplingSpec& spec, const std::vector<Record>& test) {
  spec.validate();
  std::set<std::string> patient_set;
  for (const auto& r : records) patient_set.insert(r.patient_id);
  std::vector<std::string> patients(patient_set.begin(), patient_set.end());
  SeededRng rng(spec.seed, 2);
  rng.shuffle(patients);
  const auto n_val = static_cast<std::size_t>(
      std::llround(spec.val_fraction * static_cast<double>(patients.size())));
  const std::set<std::string> val_patients(patients.begin(),
                                           patients.begin() + static_cast<std::ptrdiff_t>(n_val));

  std::pair<std::vector<Record>, std::vector<Record>> out;
  for (const auto& r : records) {
    (val_patients.count(r.patient_id) ? out.second : out.first).push_back(r);
  }

  std::vector<Record> all;
  using Part = std::pair<const std::vector<Record>*, Split>;
  for (auto [part, split] : {Part{&out.first, Split::kTrain}, Part{&out.second, Split::kVal},
                             Part{&test, Split::kTest}}) {
    for (Record r : *part) {
      r.split = split;
      all.push_back(std::move(r));
    }
  }
  check_disjoint(all);
  return out;
}

void check_disjoint(const std::vector<Record>& records) {
  std::unordered_map<std::string, Split> owner;
  for (const auto& r : records) {
    if (!r.split || *r.split == Split::kExcluded) continue;
    auto [it, inserted] = owner.emplace(r.patient_id, *r.split);
    if (!inserted && it->second != *r.split) {
      fail(ErrorCode::kOverlapViolation, "patient '" + r.patient_id + "' appears in both " +
                                             std::string(to_string(it->second)) + " and " +
                                             std::string(to_string(*r.split)));
    }
  }
}

// ------------------------------------------------------------------ build

std::string canonical_options(const BuildOptions& o) {
  std::ostringstream out;
  out << "mode=" << (o.mode == BuildMode::kSplit ? "split" : "eval") << "\n";
  out << "require_masks=" << (o.require_masks ? 1 : 0) << "\n";
  out << "rca_threshold=" << format_real(o.rca_threshold) << "\n";
  out << "positives_per_cell=" << o.sampling.positives_per_cell << "\n";
  out << "val_fraction=" << format_real(o.sampling.val_fraction) << "\n";
  out << "seed=" << o.sampling.seed << "\n";
  out << "rng=" << SeededRng::kAlgorithm << "\n";
  out << "labels=";
  for (std::size_t i = 0; i < o.sampling.label_list.size(); ++i) {
    out << (i ? "|" : "") << o.sampling.label_list[i];
  }
  out << "\ngroups=";
  for (std::size_t i = 0; i < o.sampling.groups.size(); ++i) {
    out << (i ? "|" : "") << to_string(o.sampling.groups[i]);
  }
  out << "\nrecords=" << file_hash_hex(o.files.records) << "\n";
  if (o.files.demographics) out << "demographics=" << file_hash_hex(*o.files.demographics) << "\n";
  if (o.files.rca) out << "rca=" << file_hash_hex(*o.files.rca) << "\n";
  return out.str();
}

BuildResult build_manifest(const BuildOptions& options) {
  options.sampling.validate();
  // Hash first so a missing input fails before any work.
  const std::string spec_hash = fnv1a64_hex(canonical_options(options));
  const auto& labels = options.sampling.label_list;

  BuildResult result;
  IngestResult ingested = ingest_metadata(options.files, labels);
  result.issues = std::move(ingested.issues);

  std::vector<Exclusion>& log = result.exclusions;
  std::vector<Record> pool = select_frontal(ingested.records, &log);
  if (options.require_masks) {
    std::vector<Record> with_mask;
    for (auto& r : pool) {
      if (r.mask_path) {
        with_mask.push_back(std::move(r));
      } else {
        log.push_back({r.record_id, std::string(kMaskMissing), ""});
      }
    }
    pool = filter_by_rca(with_mask, options.rca_threshold, &log);
  }
  pool = select_one_per_patient(pool, &log);

  std::unordered_map<std::string, Split> assigned;
  if (options.mode == BuildMode::kEvalOnly) {
    const auto& groups = options.sampling.groups;
    for (const auto& r : pool) {
      if (std::find(groups.begin(), groups.end(), r.race) != groups.end()) {
        assigned[r.record_id] = Split::kTest;
      } else {
        log.push_back({r.record_id, std::string(kGroupNotEvaluated), std::string(to_string(r.race))});
      }
    }
  } else {
    SamplingResult sampled = sample_test_set(pool, options.sampling, labels);
    result.shortfalls = sampled.shortfalls;
    std::unordered_set<std::string> test_patients;
    std::unordered_set<std::string> test_ids;
    for (const auto& r : sampled.test) {
      test_patients.insert(r.patient_id);
      test_ids.insert(r.record_id);
    }
    std::vector<Record> rest;
    for (const auto& r : pool) {
      if (test_ids.count(r.record_id)) continue;
      if (test_patients.count(r.patient_id)) {
        log.push_back({r.record_id, std::string(kTestPatient), r.patient_id});
        continue;
      }
      rest.push_back(r);
    }
    auto [train, val] = split_train_val(rest, options.sampling, sampled.test);
    for (const auto& r : sampled.test) assigned[r.record_id] = Split::kTest;
    for (const auto& r : train) assigned[r.record_id] = Split::kTrain;
    for (const auto& r : val) assigned[r.record_id] = Split::kVal;
  }

  Manifest& m = result.manifest;
  m.label_names = labels;
  m.header = {{"tool", "cxrprep " + options.tool_version},
              {"mode", options.mode == BuildMode::kSplit ? "split" : "eval"},
              {"seed", std::to_string(options.sampling.seed)},
              {"rng", std::string(SeededRng::kAlgorithm)},
              {"spec_hash", spec_hash}};
  m.records = std::move(ingested.records);
  for (auto& r : m.records) {
    auto it = assigned.find(r.record_id);
    r.split = it == assigned.end() ? Split::kExcluded : it->second;
  }
  check_disjoint(m.records);
  std::stable_sort(result.exclusions.begin(), result.exclusions.end(),
                   [](const Exclusion& a, const Exclusion& b) { return a.record_id < b.record_id; });
  return result;
}

// ------------------------------------------------------------------ files

std::string render_manifest(const Manifest& m) {
  std::ostringstream out;
  for (const auto& [k, v] : m.header) out << "#" << k << "=" << v << "\n";
  std::vector<std::string> header = {"record_id",  "patient_id", "view",  "race_group",
                                     "rca_score",  "image_path", "mask_path", "split"};
  header.insert(header.end(), m.label_names.begin(), m.label_names.end());
  out << csv::join(header) << "\n";
  for (const auto& r : m.records) {
    std::vector<std::string> f = {r.record_id,
                                  r.patient_id,
                                  std::string(to_string(r.view)),
                                  std::string(to_string(r.race)),
                                  r.rca_score ? format_real(*r.rca_score) : "",
                                  r.image_path,
                                  r.mask_path.value_or(""),
                                  std::string(to_string(r.split.value_or(Split::kExcluded)))};
    for (LabelValue v : r.labels) {
      f.push_back(v == LabelValue::kPositive ? "1" : v == LabelValue::kNegative ? "0" : "");
    }
    out << csv::join(f) << "\n";
  }
  return out.str();
}

std::string render_exclusions(const BuildResult& result) {
  std::ostringstream out;
  out << "record_id,reason,detail\n";
  for (const auto& e : result.exclusions) {
    out << csv::join({e.record_id, e.reason, e.detail}) << "\n";
  }
  for (const auto& i : result.issues) {
    const std::string file = std::filesystem::path(i.file).filename().string();
    out << csv::join({i.record_id, "parse_error", file + ":" + std::to_string(i.line) + ": " + i.message})
        << "\n";
  }
  return out.str();
}

Manifest read_manifest(const std::filesystem::path& path) {
  const csv::Table t = csv::read(path);
  Manifest m;
  for (const auto& c : t.comments) {
    const auto eq = c.find('=');
    if (eq != std::string::npos) m.header.emplace_back(c.substr(0, eq), c.substr(eq + 1));
  }
  static const std::vector<std::string> fixed = {"record_id",  "patient_id", "view",  "race_group",
                                                 "rca_score",  "image_path", "mask_path", "split"};
  if (t.header.size() < fixed.size() ||
      !std::equal(fixed.begin(), fixed.end(), t.header.begin())) {
    fail(ErrorCode::kSchemaMismatch, path.string() + ":" + std::to_string(t.header_line) +
                                         ": not a cxrprep manifest header");
  }
  m.label_names.assign(t.header.begin() + static_cast<std::ptrdiff_t>(fixed.size()), t.header.end());
  for (const auto& row : t.rows) {
    const auto& f = row.fields;
    auto bad = [&](const std::string& what) {
      fail(ErrorCode::kSchemaMismatch, path.string() + ":" + std::to_string(row.line) + ": " + what);
    };
    Record r;
    r.record_id = f[0];
    r.patient_id = f[1];
    const auto view = view_from_name(f[2]);
    const auto race = race_from_name(f[3]);
    const auto split = split_from_name(f[7]);
    if (!view) bad("bad view '" + f[2] + "'");
    if (!race) bad("bad race_group '" + f[3] + "'");
    if (!split) bad("bad split '" + f[7] + "'");
    r.view = *view;
    r.race = *race;
    r.split = *split;
    if (!f[4].empty()) {
      r.rca_score = parse_real(f[4]);
      if (!r.rca_score) bad("bad rca_score '" + f[4] + "'");
    }
    r.image_path = f[5];
    if (!f[6].empty()) r.mask_path = f[6];
    for (std::size_t i = fixed.size(); i < f.size(); ++i) {
      const auto v = parse_label(f[i]);
      if (!v) bad("bad label value '" + f[i] + "'");
      r.labels.push_back(*v);
    }
    m.records.push_back(std::move(r));
  }
  return m;
}

}  // namespace cxrprep::manifest
