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

#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>

#include "cxrprep/manifest.hpp"
#include "expect_error.hpp"
#include "testkit.hpp"

using cxrprep::ErrorCode;
using namespace cxrprep::manifest;

namespace {

Record rec(std::string id, std::string patient, View view = View::kPA,
           RaceGroup race = RaceGroup::kWhite, std::vector<LabelValue> labels = {}) {
  Record r;
  r.record_id = std::move(id);
  r.patient_id = std::move(patient);
  r.view = view;
  r.race = race;
  r.labels = std::move(labels);
  r.image_path = r.record_id + ".png";
  return r;
}

std::vector<LabelValue> labeled(int count, int width = 11) {
  std::vector<LabelValue> v(static_cast<std::size_t>(width), LabelValue::kUnlabeled);
  for (int i = 0; i < count; ++i) v[static_cast<std::size_t>(i)] = LabelValue::kNegative;
  return v;
}

std::vector<std::string> ids(const std::vector<Record>& rs) {
  std::vector<std::string> out;
  for (const auto& r : rs) out.push_back(r.record_id);
  return out;
}

TEST(Parsers, Views) {
  EXPECT_EQ(parse_view("AP"), View::kAP);
  EXPECT_EQ(parse_view("pa"), View::kPA);
  EXPECT_EQ(parse_view("LATERAL"), View::kLateral);
  EXPECT_EQ(parse_view("LL"), View::kLateral);
  EXPECT_EQ(parse_view("AP AXIAL"), View::kOther);
  EXPECT_EQ(parse_view(""), View::kOther);
}

TEST(Parsers, Race) {
  EXPECT_EQ(parse_race("WHITE"), RaceGroup::kWhite);
  EXPECT_EQ(parse_race("WHITE - RUSSIAN"), RaceGroup::kWhite);
  EXPECT_EQ(parse_race("BLACK/AFRICAN AMERICAN"), RaceGroup::kBlack);
  EXPECT_EQ(parse_race("Asian"), RaceGroup::kAsian);
  EXPECT_EQ(parse_race("HISPANIC/LATINO - DOMINICAN"), RaceGroup::kHispanic);
  EXPECT_EQ(parse_race("Non-Hispanic/Non-Latino"), RaceGroup::kOther);
  EXPECT_EQ(parse_race("Martian"), RaceGroup::kOther);
  EXPECT_EQ(parse_race(""), RaceGroup::kOther);
}

TEST(Parsers, Labels) {
  EXPECT_EQ(parse_label("1"), LabelValue::kPositive);
  EXPECT_EQ(parse_label("1.0"), LabelValue::kPositive);
  EXPECT_EQ(parse_label("0.0"), LabelValue::kNegative);
  EXPECT_EQ(parse_label("-1.0"), LabelValue::kUnlabeled);
  EXPECT_EQ(parse_label(""), LabelValue::kUnlabeled);
  EXPECT_FALSE(parse_label("yes").has_value());
  EXPECT_EQ(default_labels().size(), 11u);
}

TEST(Ingest, ToyCsv) {
  testkit::TempDir dir;
  testkit::write_text(dir / "records.csv",
                      "record_id,patient_id,view,image_path,race,Edema\n"
                      "a,p1,PA,a.png,WHITE,1\n"
                      "b,p2,LATERAL,b.png,Klingon,0\n"
                      "c,p3,AP,c.png,ASIAN,\n");
  const auto res = ingest_metadata({dir / "records.csv", {}, {}}, {"Edema"});
  ASSERT_EQ(res.records.size(), 3u);
  EXPECT_EQ(res.records[1].view, View::kLateral);
  EXPECT_EQ(res.records[1].race, RaceGroup::kOther);
  EXPECT_EQ(res.records[0].labels[0], LabelValue::kPositive);
  EXPECT_EQ(res.records[2].labels[0], LabelValue::kUnlabeled);
  EXPECT_TRUE(res.issues.empty());
}

TEST(Ingest, JoinReportsOrphan) {
  testkit::TempDir dir;
  testkit::write_text(dir / "records.csv",
                      "record_id,patient_id,view,image_path,Edema\n"
                      "a,p1,PA,a.png,1\nb,p2,PA,b.png,0\n");
  testkit::write_text(dir / "demo.csv", "record_id,race\na,BLACK\nb,ASIAN\nzz,WHITE\n");
  testkit::write_text(dir / "rca.csv", "record_id,rca_score\na,0.9\nghost,0.8\n");
  const auto res = ingest_metadata({dir / "records.csv", dir / "demo.csv", dir / "rca.csv"}, {"Edema"});
  ASSERT_EQ(res.records.size(), 2u);
  EXPECT_EQ(res.records[0].race, RaceGroup::kBlack);
  EXPECT_EQ(res.records[1].race, RaceGroup::kAsian);
  EXPECT_EQ(res.records[0].rca_score, 0.9);
  EXPECT_FALSE(res.records[1].rca_score.has_value());
  ASSERT_EQ(res.issues.size(), 2u);
  EXPECT_EQ(res.issues[0].record_id, "zz");
  EXPECT_EQ(res.issues[0].line, 4u);
  EXPECT_EQ(res.issues[1].record_id, "ghost");
}

TEST(Ingest, Errors) {
  testkit::TempDir dir;
  EXPECT_ERROR_CODE(ingest_metadata({dir / "nope.csv", {}, {}}, {}), ErrorCode::kFileNotFound);
  testkit::write_text(dir / "r.csv", "record_id,patient_id,view\na,p,PA\n");
  EXPECT_ERROR_CODE(ingest_metadata({dir / "r.csv", {}, {}}, {}), ErrorCode::kSchemaMismatch);
  testkit::write_text(dir / "r2.csv", "record_id,patient_id,view,image_path\na,p,PA,x\n");
  EXPECT_ERROR_CODE(ingest_metadata({dir / "r2.csv", {}, {}}, {"Edema"}), ErrorCode::kSchemaMismatch);
  testkit::write_text(dir / "r3.csv", "record_id,patient_id,view,image_path\na,p,PA,x\na,q,PA,y\n");
  EXPECT_ERROR_CODE(ingest_metadata({dir / "r3.csv", {}, {}}, {}), ErrorCode::kDuplicateRecordId);
  testkit::write_text(dir / "r4.csv", "record_id,patient_id,view,image_path,Edema\na,p,PA,x,maybe\n");
  const auto res = ingest_metadata({dir / "r4.csv", {}, {}}, {"Edema"});
  EXPECT_TRUE(res.records.empty());
  ASSERT_EQ(res.issues.size(), 1u);
  EXPECT_EQ(res.issues[0].line, 2u);
}

TEST(SelectFrontal, Examples) {
  const std::vector<Record> rs = {rec("a", "1", View::kAP), rec("b", "2", View::kPA),
                                  rec("c", "3", View::kLateral)};
  std::vector<Exclusion> log;
  EXPECT_EQ(ids(select_frontal(rs, &log)), (std::vector<std::string>{"a", "b"}));
  ASSERT_EQ(log.size(), 1u);
  EXPECT_EQ(log[0].reason, "non_frontal");
  EXPECT_TRUE(select_frontal({rec("x", "1", View::kLateral), rec("y", "1", View::kLateral)}).empty());

  cxrprep::SeededRng rng(1, 1);
  std::vector<Record> many;
  for (int i = 0; i < 100; ++i) many.push_back(rec(std::to_string(i), "p", static_cast<View>(rng.below(4))));
  std::vector<std::string> expect;
  for (const auto& r : many) {
    if (r.view == View::kAP || r.view == View::kPA) expect.push_back(r.record_id);
  }
  EXPECT_EQ(ids(select_frontal(many)), expect);
}

TEST(OnePerPatient, MostLabeledThenSmallestId) {
  EXPECT_EQ(ids(select_one_per_patient({rec("x3", "p", View::kPA, RaceGroup::kWhite, labeled(3)),
                                        rec("x5", "p", View::kPA, RaceGroup::kWhite, labeled(5))})),
            (std::vector<std::string>{"x5"}));
  std::vector<Exclusion> log;
  EXPECT_EQ(ids(select_one_per_patient({rec("s100", "p", View::kPA, RaceGroup::kWhite, labeled(4)),
                                        rec("s099", "p", View::kPA, RaceGroup::kWhite, labeled(4))},
                                       &log)),
            (std::vector<std::string>{"s099"}));
  ASSERT_EQ(log.size(), 1u);
  EXPECT_EQ(log[0].record_id, "s100");
  EXPECT_EQ(log[0].reason, "not_most_labeled");
}

TEST(OnePerPatient, RandomMatchesExhaustiveScan) {
  cxrprep::SeededRng rng(2, 1);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Record> rs;
    for (int i = 0; i < 60; ++i) {
      rs.push_back(rec("r" + std::to_string(rng.below(1000)) + "_" + std::to_string(i),
                       "p" + std::to_string(rng.below(15)), View::kPA, RaceGroup::kWhite,
                       labeled(static_cast<int>(rng.below(12)))));
    }
    const auto kept = select_one_per_patient(rs);
    std::set<std::string> patients;
    for (const auto& r : rs) patients.insert(r.patient_id);
    ASSERT_EQ(kept.size(), patients.size());
    for (const auto& k : kept) {
      for (const auto& r : rs) {
        if (r.patient_id != k.patient_id) continue;
        EXPECT_TRUE(r.labeled_count() < k.labeled_count() ||
                    (r.labeled_count() == k.labeled_count() && r.record_id >= k.record_id));
      }
    }
  }
}

TEST(FilterByRca, StrictBoundary) {
  std::vector<Record> rs = {rec("a", "1"), rec("b", "2"), rec("c", "3")};
  rs[0].rca_score = 0.69;
  rs[1].rca_score = 0.70;
  rs[2].rca_score = 0.71;
  EXPECT_EQ(ids(filter_by_rca(rs, 0.7)), (std::vector<std::string>{"c"}));

  std::vector<Record> none = {rec("a", "1"), rec("b", "2"), rec("c", "3")};
  std::vector<Exclusion> log;
  EXPECT_TRUE(filter_by_rca(none, 0.7, &log).empty());
  ASSERT_EQ(log.size(), 3u);
  for (const auto& e : log) EXPECT_EQ(e.reason, "rca_missing");

  cxrprep::SeededRng rng(3, 1);
  std::vector<Record> many;
  for (int i = 0; i < 200; ++i) {
    many.push_back(rec(std::to_string(i), std::to_string(i)));
    if (rng.below(10) != 0) many.back().rca_score = rng.uniform();
  }
  std::vector<std::string> expect;
  for (const auto& r : many) {
    if (r.rca_score && *r.rca_score > 0.4) expect.push_back(r.record_id);
  }
  EXPECT_EQ(ids(filter_by_rca(many, 0.4)), expect);
}

std::vector<LabelValue> positives(std::initializer_list<int> which, int width) {
  std::vector<LabelValue> v(static_cast<std::size_t>(width), LabelValue::kNegative);
  for (int i : which) v[static_cast<std::size_t>(i)] = LabelValue::kPositive;
  return v;
}

TEST(SampleTestSet, DisjointCellsFillExactly) {
  SamplingSpec spec;
  spec.positives_per_cell = 3;
  spec.label_list = {"A", "B"};
  spec.groups = {RaceGroup::kWhite, RaceGroup::kBlack};
  std::vector<Record> rs;
  int n = 0;
  for (int l = 0; l < 2; ++l) {
    for (RaceGroup g : spec.groups) {
      for (int k = 0; k < 5; ++k) {
        const auto id = "r" + std::to_string(n++);
        rs.push_back(rec(id, "p" + id, View::kPA, g, positives({l}, 2)));
      }
    }
  }
  const auto res = sample_test_set(rs, spec, {"A", "B"});
  EXPECT_EQ(res.test.size(), 12u);
  EXPECT_TRUE(res.shortfalls.empty());
  EXPECT_EQ(ids(sample_test_set(rs, spec, {"A", "B"}).test), ids(res.test));
}

TEST(SampleTestSet, MultiLabelRecordCreditsBothCells) {
  SamplingSpec spec;
  spec.positives_per_cell = 1;
  spec.label_list = {"A", "B"};
  spec.groups = {RaceGroup::kWhite};
  const auto res = sample_test_set({rec("r", "p", View::kPA, RaceGroup::kWhite, positives({0, 1}, 2))},
                                   spec, {"A", "B"});
  EXPECT_EQ(res.test.size(), 1u);
  EXPECT_TRUE(res.shortfalls.empty());
}

TEST(SampleTestSet, ShortfallReported) {
  SamplingSpec spec;
  spec.positives_per_cell = 4;
  spec.label_list = {"A"};
  spec.groups = {RaceGroup::kWhite, RaceGroup::kAsian};
  const auto res = sample_test_set({rec("r1", "p1", View::kPA, RaceGroup::kWhite, positives({0}, 1)),
                                    rec("r2", "p2", View::kPA, RaceGroup::kWhite, positives({0}, 1))},
                                   spec, {"A"});
  EXPECT_EQ(res.test.size(), 2u);
  ASSERT_EQ(res.shortfalls.size(), 2u);
  EXPECT_EQ(res.shortfalls[0].found, 2);
  EXPECT_EQ(res.shortfalls[1].group, RaceGroup::kAsian);
  EXPECT_EQ(res.shortfalls[1].found, 0);
}

TEST(SplitTrainVal, TwentyPatients) {
  SamplingSpec spec;
  spec.seed = 11;
  std::vector<Record> rs;
  for (int i = 0; i < 20; ++i) rs.push_back(rec("r" + std::to_string(i), "p" + std::to_string(i)));
  const auto [train, val] = split_train_val(rs, spec);
  EXPECT_EQ(train.size(), 19u);
  EXPECT_EQ(val.size(), 1u);
  const auto again = split_train_val(rs, spec);
  EXPECT_EQ(ids(again.second), ids(val));
}

TEST(SplitTrainVal, PatientStaysTogether) {
  SamplingSpec spec;
  spec.val_fraction = 0.5;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    spec.seed = seed;
    std::vector<Record> rs = {rec("a1", "A"), rec("a2", "A"), rec("b", "B"), rec("c", "C"), rec("d", "D")};
    const auto [train, val] = split_train_val(rs, spec);
    const bool a_val = std::count_if(val.begin(), val.end(), [](const Record& r) { return r.patient_id == "A"; });
    const auto a_in = std::count_if((a_val ? val : train).begin(), (a_val ? val : train).end(),
                                    [](const Record& r) { return r.patient_id == "A"; });
    EXPECT_EQ(a_in, 2);
  }
}

TEST(SplitTrainVal, TestOverlapDetected) {
  SamplingSpec spec;
  EXPECT_ERROR_CODE(split_train_val({rec("a", "P")}, spec, {rec("b", "P")}), ErrorCode::kOverlapViolation);
}

TEST(SamplingSpec, Validation) {
  SamplingSpec s;
  s.positives_per_cell = 0;
  EXPECT_ERROR_CODE(s.validate(), ErrorCode::kInvalidArgument);
  s = {};
  s.val_fraction = 1.0;
  EXPECT_ERROR_CODE(s.validate(), ErrorCode::kInvalidArgument);
}

TEST(BuildManifest, DeterministicDisjointAndRoundTrips) {
  testkit::TempDir dir;
  const auto fx = testkit::write_metadata_fixture(dir.path(), 800, 5);
  BuildOptions o;
  o.files = {fx.records, fx.demographics, fx.rca};
  o.sampling.positives_per_cell = 3;
  o.sampling.seed = 9;
  o.require_masks = true;
  o.tool_version = "test";
  const auto a = build_manifest(o);
  const auto b = build_manifest(o);
  const auto text = render_manifest(a.manifest);
  EXPECT_EQ(text, render_manifest(b.manifest));
  EXPECT_EQ(render_exclusions(a), render_exclusions(b));
  EXPECT_NO_THROW(check_disjoint(a.manifest.records));

  std::map<Split, int> counts;
  for (const auto& r : a.manifest.records) {
    ++counts[*r.split];
    if (*r.split != Split::kExcluded) {
      ASSERT_TRUE(r.rca_score.has_value());
      EXPECT_GT(*r.rca_score, 0.7);
      EXPECT_TRUE(r.view == View::kAP || r.view == View::kPA);
    }
  }
  EXPECT_GT(counts[Split::kTrain], 0);
  EXPECT_GT(counts[Split::kVal], 0);
  EXPECT_GT(counts[Split::kTest], 0);
  EXPECT_LE(counts[Split::kTest], 3 * 11 * 4);

  testkit::write_text(dir / "manifest.csv", text);
  const auto back = read_manifest(dir / "manifest.csv");
  EXPECT_EQ(render_manifest(back), text);

  o.sampling.seed = 10;
  EXPECT_NE(render_manifest(build_manifest(o).manifest), text);
}

TEST(BuildManifest, EvalOnlyKeepsConfiguredGroups) {
  testkit::TempDir dir;
  const auto fx = testkit::write_metadata_fixture(dir.path(), 200, 6);
  BuildOptions o;
  o.files = {fx.records, fx.demographics, fx.rca};
  o.mode = BuildMode::kEvalOnly;
  const auto res = build_manifest(o);
  int test = 0;
  for (const auto& r : res.manifest.records) {
    EXPECT_TRUE(*r.split == Split::kTest || *r.split == Split::kExcluded);
    if (*r.split == Split::kTest) {
      ++test;
      EXPECT_NE(r.race, RaceGroup::kOther);
    }
  }
  EXPECT_GT(test, 0);
  EXPECT_TRUE(std::any_of(res.exclusions.begin(), res.exclusions.end(),
                          [](const Exclusion& e) { return e.reason == "group_not_evaluated"; }));
}

TEST(ReadManifest, RejectsBadSplit) {
  testkit::TempDir dir;
  testkit::write_text(dir / "m.csv",
                      "record_id,patient_id,view,race_group,rca_score,image_path,mask_path,split,Edema\n"
                      "a,p,PA,White,,a.png,,holdout,1\n");
  EXPECT_ERROR_CODE(read_manifest(dir / "m.csv"), ErrorCode::kSchemaMismatch);
}

}  // namespace
