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

#include <cmath>

#include "cxrprep/metrics.hpp"
#include "expect_error.hpp"
#include "testkit.hpp"

using cxrprep::ErrorCode;
using namespace cxrprep::metrics;

namespace {

double auroc_of(std::vector<double> s, std::vector<std::uint8_t> l) { return auroc(s, l); }

TEST(Auroc, SpecExamples) {
  EXPECT_EQ(auroc_of({0.9, 0.1}, {1, 0}), 1.0);
  EXPECT_EQ(auroc_of({0.3, 0.3, 0.3, 0.3}, {1, 0, 1, 0}), 0.5);
  EXPECT_EQ(auroc_of({0.2, 0.4, 0.6, 0.8}, {0, 1, 0, 1}), 0.75);
  EXPECT_EQ(auroc_of({0.9, 0.1}, {0, 1}), 0.0);
}

TEST(Auroc, Degenerate) {
  EXPECT_ERROR_CODE(auroc_of({0.1, 0.2}, {1, 1}), ErrorCode::kDegenerateLabels);
  EXPECT_ERROR_CODE(auroc_of({}, {}), ErrorCode::kDegenerateLabels);
  EXPECT_ERROR_CODE(auroc_of({0.1}, {1, 0}), ErrorCode::kInvalidArgument);
}

TEST(Auroc, MatchesPairCountingWithTies) {
  cxrprep::SeededRng rng(1, 1);
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = 2 + rng.below(120);
    std::vector<double> s(n);
    std::vector<std::uint8_t> l(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng.below(10)) / 10.0;
      l[i] = static_cast<std::uint8_t>(rng.below(2));
    }
    l[0] = 0;
    l[1] = 1;
    EXPECT_NEAR(auroc(s, l), testkit::pair_count_auroc(s, l), 1e-12);
  }
}

TEST(Auroc, NegationAntisymmetry) {
  cxrprep::SeededRng rng(2, 1);
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = 2 + rng.below(80);
    std::vector<double> s(n);
    std::vector<double> neg(n);
    std::vector<std::uint8_t> l(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = rng.uniform() + static_cast<double>(i) * 1e-9;  // tie-free
      neg[i] = -s[i];
      l[i] = static_cast<std::uint8_t>(rng.below(2));
    }
    l[0] = 0;
    l[1] = 1;
    EXPECT_NEAR(auroc(s, l) + auroc(neg, l), 1.0, 1e-12);
  }
}

// Builds a one-label set from (group, truth, score) triples.
PredictionSet one_label(const std::vector<std::tuple<std::string, int, double>>& rows) {
  PredictionSet s;
  s.labels = {"L"};
  int i = 0;
  for (const auto& [g, t, sc] : rows) {
    PredictionRow r;
    r.sample_id = "s" + std::to_string(i++);
    r.race_group = g;
    r.truth = {static_cast<std::int8_t>(t)};
    r.scores = {sc};
    s.rows.push_back(r);
  }
  return s;
}

// Rows for one group whose within-group AUROC is exactly auc (a multiple of 0.1):
// one negative at 0.5 and ten positives, round(10 * auc) of them above it.
void add_group(std::vector<std::tuple<std::string, int, double>>& rows, const std::string& g, int above) {
  rows.emplace_back(g, 0, 0.5);
  for (int k = 0; k < 10; ++k) rows.emplace_back(g, 1, k < above ? 0.9 : 0.1);
}

TEST(GroupDisparity, HandEnumeratedPairs) {
  std::vector<std::tuple<std::string, int, double>> eq;
  add_group(eq, "A", 7);
  add_group(eq, "B", 7);
  EXPECT_EQ(group_disparity(one_label(eq)).value, 0.0);

  std::vector<std::tuple<std::string, int, double>> two;
  add_group(two, "A", 8);
  add_group(two, "B", 7);
  EXPECT_NEAR(group_disparity(one_label(two)).value, 0.1, 1e-15);

  std::vector<std::tuple<std::string, int, double>> three;
  add_group(three, "A", 9);
  add_group(three, "B", 8);
  add_group(three, "C", 6);
  const auto d = group_disparity(one_label(three));
  EXPECT_NEAR(d.value, 0.2, 1e-15);
  EXPECT_EQ(d.valid_cells, 3);
  EXPECT_EQ(d.total_cells, 3);
  EXPECT_NEAR(group_disparity(one_label(three), DisparityMode::kMaxMin).value, 0.3, 1e-15);
}

TEST(GroupDisparity, SkipsSingleClassCells) {
  std::vector<std::tuple<std::string, int, double>> rows;
  add_group(rows, "A", 9);
  add_group(rows, "B", 8);
  rows.emplace_back("C", 1, 0.3);
  const auto d = group_disparity(one_label(rows));
  EXPECT_NEAR(d.value, 0.1, 1e-15);
  EXPECT_EQ(d.valid_cells, 2);
  EXPECT_EQ(d.total_cells, 3);
  EXPECT_EQ(d.labels_used, 1);

  std::vector<std::tuple<std::string, int, double>> lonely;
  add_group(lonely, "A", 5);
  lonely.emplace_back("B", 1, 0.3);
  EXPECT_ERROR_CODE(group_disparity(one_label(lonely)), ErrorCode::kNoValidCells);
}

TEST(MacroDiagnostic, MeanOfLabels) {
  PredictionSet s;
  s.labels = {"A", "B"};
  const double sc[4][2] = {{0.9, 0.5}, {0.8, 0.5}, {0.2, 0.5}, {0.1, 0.5}};
  const std::int8_t t[4][2] = {{1, 1}, {1, 0}, {0, 1}, {0, kAbsent}};
  for (int i = 0; i < 4; ++i) {
    s.rows.push_back({"s" + std::to_string(i), "G", {t[i][0], t[i][1]}, {sc[i][0], sc[i][1]}, {}});
  }
  EXPECT_EQ(macro_diagnostic_auroc(s), 0.75);
  s.labels = {"A"};
  for (auto& r : s.rows) {
    r.truth.resize(1);
    r.scores.resize(1);
  }
  EXPECT_EQ(macro_diagnostic_auroc(s), 1.0);
}

TEST(MacroDiagnostic, RandomMatchesPerLabelOracle) {
  const auto s = testkit::synthetic_predictions(Method::kBaseline, 3, Dataset::kInternal, 50);
  double sum = 0;
  for (std::size_t k = 0; k < s.labels.size(); ++k) {
    std::vector<double> sc;
    std::vector<std::uint8_t> lb;
    for (const auto& r : s.rows) {
      if (r.truth[k] == kAbsent) continue;
      sc.push_back(r.scores[k]);
      lb.push_back(static_cast<std::uint8_t>(r.truth[k]));
    }
    sum += testkit::pair_count_auroc(sc, lb);
  }
  EXPECT_NEAR(macro_diagnostic_auroc(s), sum / static_cast<double>(s.labels.size()), 1e-12);
}

TEST(RaceAuroc, Examples) {
  PredictionSet s;
  s.labels = {"L"};
  s.race_groups = {"A", "B"};
  for (int i = 0; i < 6; ++i) {
    const bool a = i % 2 == 0;
    s.rows.push_back({"s" + std::to_string(i), a ? "A" : "B", {0}, {0.5}, {a ? 0.8 : 0.3, a ? 0.2 : 0.7}});
  }
  EXPECT_EQ(race_auroc(s), 1.0);
  for (auto& r : s.rows) r.race_scores = {0.5, 0.5};
  EXPECT_EQ(race_auroc(s), 0.5);
  s.race_groups.clear();
  for (auto& r : s.rows) r.race_scores.clear();
  EXPECT_ERROR_CODE(race_auroc(s), ErrorCode::kMissingRaceScores);
}

TEST(RaceAuroc, FourGroupsMatchOneVsRestOracle) {
  const auto s = testkit::synthetic_predictions(Method::kMasking, 1, Dataset::kExternal, 120);
  double sum = 0;
  for (std::size_t g = 0; g < s.race_groups.size(); ++g) {
    std::vector<double> sc;
    std::vector<std::uint8_t> lb;
    for (const auto& r : s.rows) {
      sc.push_back(r.race_scores[g]);
      lb.push_back(r.race_group == s.race_groups[g] ? 1 : 0);
    }
    sum += testkit::pair_count_auroc(sc, lb);
  }
  EXPECT_NEAR(race_auroc(s), sum / 4.0, 1e-12);
}

TEST(RaceAuroc, SingleGroupRejected) {
  PredictionSet s;
  s.labels = {"L"};
  s.race_groups = {"A", "B"};
  s.rows.push_back({"s0", "A", {0}, {0.5}, {0.6, 0.4}});
  s.rows.push_back({"s1", "A", {1}, {0.5}, {0.7, 0.3}});
  EXPECT_ERROR_CODE(race_auroc(s), ErrorCode::kSingleGroup);
}

TEST(AggregateSeeds, Examples) {
  const std::vector<double> same = {0.6, 0.6, 0.6};
  const auto a = aggregate_seeds(same);
  EXPECT_NEAR(a.mean, 0.6, 1e-15);
  EXPECT_NEAR(*a.stddev, 0.0, 1e-15);
  const std::vector<double> two = {0.5, 0.7};
  const auto b = aggregate_seeds(two);
  EXPECT_NEAR(b.mean, 0.6, 1e-15);
  EXPECT_NEAR(*b.stddev, std::sqrt(0.02), 1e-15);
  const std::vector<double> one = {0.9};
  const auto c = aggregate_seeds(one);
  EXPECT_EQ(c.mean, 0.9);
  EXPECT_FALSE(c.stddev.has_value());
  EXPECT_EQ(c.n, 1);
}

TEST(Predictions, RoundTrip) {
  const auto s = testkit::synthetic_predictions(Method::kClahe, 4, Dataset::kExternal, 30);
  const auto text = render_predictions(s);
  const auto back = parse_predictions(text, "mem");
  EXPECT_EQ(back.method, Method::kClahe);
  EXPECT_EQ(back.seed, 4);
  EXPECT_EQ(back.dataset, Dataset::kExternal);
  EXPECT_EQ(back.labels, s.labels);
  EXPECT_EQ(back.race_groups, s.race_groups);
  ASSERT_EQ(back.rows.size(), s.rows.size());
  EXPECT_EQ(render_predictions(back), text);
}

TEST(Predictions, ErrorsNameTheLine) {
  const std::string head =
      "#method=baseline\n#seed=1\n#dataset=internal\n"
      "sample_id,race_group,score:Edema,gt:Edema\n";
  try {
    parse_predictions(head + "a,White,0.5,1\nb,White,abc,0\n", "preds.csv");
    FAIL();
  } catch (const cxrprep::Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSchemaMismatch);
    EXPECT_NE(std::string(e.what()).find("preds.csv:6"), std::string::npos) << e.what();
  }
  EXPECT_ERROR_CODE(parse_predictions(head + "a,White,1.5,1\n", "p"), ErrorCode::kSchemaMismatch);
  EXPECT_ERROR_CODE(parse_predictions(head + "a,White,0.5,1\na,White,0.5,0\n", "p"),
                    ErrorCode::kSchemaMismatch);
  EXPECT_ERROR_CODE(parse_predictions(head + "a,,0.5,1\n", "p"), ErrorCode::kSchemaMismatch);
  EXPECT_ERROR_CODE(parse_predictions(head + "a,White,0.5\n", "p"), ErrorCode::kSchemaMismatch);
  EXPECT_ERROR_CODE(parse_predictions("#seed=1\n#dataset=internal\nsample_id,race_group,score:E,gt:E\n", "p"),
                    ErrorCode::kSchemaMismatch);
  EXPECT_ERROR_CODE(parse_predictions("#method=sharpen\n#seed=1\n#dataset=internal\n"
                                      "sample_id,race_group,score:E,gt:E\n", "p"),
                    ErrorCode::kSchemaMismatch);
  EXPECT_ERROR_CODE(parse_predictions("#method=baseline\n#seed=1\n#dataset=internal\n"
                                      "sample_id,race_group,score:E\n", "p"),
                    ErrorCode::kSchemaMismatch);
  // Empty ground truth means "not annotated".
  const auto ok = parse_predictions(head + "a,White,0.5,\n", "p");
  EXPECT_EQ(ok.rows[0].truth[0], kAbsent);
}

}  // namespace
