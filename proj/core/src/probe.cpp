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

#include "cxrprep/probe.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <json.hpp>

#include "cxrprep/error.hpp"
#include "cxrprep/metrics.hpp"
#include "cxrprep/rng.hpp"

namespace cxrprep::probe {

namespace {

// Appends the constant bias feature.
Eigen::MatrixXd augment(const Eigen::MatrixXd& features) {
  Eigen::MatrixXd x(features.rows(), features.cols() + 1);
  x.leftCols(features.cols()) = features;
  x.col(features.cols()).setOnes();
  return x;
}

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd p = logits;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    const double m = p.row(i).maxCoeff();
    p.row(i) = (p.row(i).array() - m).exp();
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

double loss_augmented(const Eigen::MatrixXd& w, const Eigen::MatrixXd& x,
                      std::span<const int> labels, double l2, Eigen::MatrixXd* gradient) {
  const Eigen::Index n = x.rows();
  const Eigen::MatrixXd logits = x * w.transpose();  // n x G
  double loss = 0.0;
  Eigen::MatrixXd residual(n, w.rows());
  for (Eigen::Index i = 0; i < n; ++i) {
    const double m = logits.row(i).maxCoeff();
    const Eigen::ArrayXd e = (logits.row(i).array() - m).exp().transpose();
    const double z = e.sum();
    const int y = labels[static_cast<std::size_t>(i)];
    loss += -(logits(i, y) - m - std::log(z));
    residual.row(i) = (e / z).transpose().matrix();
    residual(i, y) -= 1.0;
  }
  loss /= static_cast<double>(n);
  const auto body = w.leftCols(w.cols() - 1);
  loss += 0.5 * l2 * body.squaredNorm();
  if (gradient) {
    *gradient = residual.transpose() * x / static_cast<double>(n);
    gradient->leftCols(w.cols() - 1) += l2 * body;
  }
  return loss;
}

void check_labels(std::span<const int> labels, Eigen::Index rows, std::size_t groups) {
  if (static_cast<Eigen::Index>(labels.size()) != rows) {
    fail(ErrorCode::kInvalidArgument, "probe: features and labels differ in length");
  }
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= groups) {
      fail(ErrorCode::kInvalidArgument, "probe: label index out of range");
    }
  }
}

}  // namespace

Eigen::VectorXd featurize(const GrayImage& img, const mask::BinaryMask* mask, FeatureOptions options) {
  if (mask && (mask->width() != img.width() || mask->height() != img.height())) {
    fail(ErrorCode::kDimensionMismatch, "probe: mask does not match image");
  }
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(kFeatureBins);
  Eigen::VectorXd all = Eigen::VectorXd::Zero(kFeatureBins);
  const auto px = img.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) {
    const auto b = static_cast<Eigen::Index>(intensity_bin(px[i], kFeatureBins, img.bit_depth()));
    all[b] += 1.0;
    if (mask && !mask->bits()[i]) continue;
    if (options.exclude_zero && px[i] == 0) continue;
    counts[b] += 1.0;
  }
  const double total = counts.sum();
  if (total == 0.0) return all / all.sum();
  return counts / total;
}

double loss_and_gradient(const Eigen::MatrixXd& weights, const Eigen::MatrixXd& features,
                         std::span<const int> labels, double l2, Eigen::MatrixXd* gradient) {
  if (weights.cols() != features.cols() + 1) {
    fail(ErrorCode::kInvalidArgument, "probe: weight matrix does not match feature width");
  }
  check_labels(labels, features.rows(), static_cast<std::size_t>(weights.rows()));
  return loss_augmented(weights, augment(features), labels, l2, gradient);
}

ProbeModel train_probe(const Eigen::MatrixXd& features, std::span<const int> labels,
                       std::vector<std::string> group_names, const Hyper& hyper) {
  check_labels(labels, features.rows(), group_names.size());
  if (std::set<int>(labels.begin(), labels.end()).size() < 2) {
    fail(ErrorCode::kSingleGroup, "probe training needs at least two groups");
  }
  if (hyper.steps < 0 || !(hyper.learning_rate > 0) || hyper.l2 < 0 || hyper.batch_size < 0) {
    fail(ErrorCode::kInvalidArgument, "probe: invalid hyperparameters");
  }

  ProbeModel model;
  model.groups = std::move(group_names);
  model.hyper = hyper;
  model.weights = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(model.groups.size()),
                                        features.cols() + 1);
  const Eigen::MatrixXd x = augment(features);
  const Eigen::Index n = x.rows();
  const bool minibatch = hyper.batch_size > 0 && hyper.batch_size < n;

  Eigen::MatrixXd grad;
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  SeededRng rng(hyper.seed, 3);
  std::size_t cursor = order.size();
  Eigen::MatrixXd batch_x;
  std::vector<int> batch_y;

  model.loss_history.reserve(static_cast<std::size_t>(hyper.steps) + 1);
  for (int step = 0; step < hyper.steps; ++step) {
    if (!minibatch) {
      model.loss_history.push_back(loss_augmented(model.weights, x, labels, hyper.l2, &grad));
    } else {
      const auto bs = static_cast<std::size_t>(hyper.batch_size);
      if (cursor + bs > order.size()) {
        rng.shuffle(order);
        cursor = 0;
      }
      batch_x.resize(hyper.batch_size, x.cols());
      batch_y.resize(bs);
      for (std::size_t i = 0; i < bs; ++i) {
        batch_x.row(static_cast<Eigen::Index>(i)) = x.row(order[cursor + i]);
        batch_y[i] = labels[static_cast<std::size_t>(order[cursor + i])];
      }
      cursor += bs;
      model.loss_history.push_back(loss_augmented(model.weights, batch_x, batch_y, hyper.l2, &grad));
    }
    model.weights -= hyper.learning_rate * grad;
  }
  model.steps_run = hyper.steps;
  model.final_loss = loss_augmented(model.weights, x, labels, hyper.l2, nullptr);
  model.loss_history.push_back(model.final_loss);
  return model;
}

Eigen::MatrixXd predict_proba(const ProbeModel& model, const Eigen::MatrixXd& features) {
  if (model.weights.cols() != features.cols() + 1) {
    fail(ErrorCode::kInvalidArgument, "probe: feature width does not match model");
  }
  return softmax_rows(augment(features) * model.weights.transpose());
}

double probe_auroc(const ProbeModel& model, const Eigen::MatrixXd& features,
                   std::span<const int> labels) {
  check_labels(labels, features.rows(), model.groups.size());
  const Eigen::MatrixXd p = predict_proba(model, features);
  std::vector<double> scores(labels.size());
  std::vector<std::uint8_t> member(labels.size());
  double sum = 0.0;
  int used = 0;
  for (Eigen::Index g = 0; g < p.cols(); ++g) {
    bool present = false;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      scores[i] = p(static_cast<Eigen::Index>(i), g);
      member[i] = labels[i] == g;
      present = present || member[i];
    }
    if (!present) continue;
    sum += metrics::auroc(scores, member);
    ++used;
  }
  if (used < 2) fail(ErrorCode::kSingleGroup, "probe AUROC needs at least two groups present");
  return sum / used;
}

double accuracy(const ProbeModel& model, const Eigen::MatrixXd& features,
                std::span<const int> labels) {
  check_labels(labels, features.rows(), model.groups.size());
  const Eigen::MatrixXd p = predict_proba(model, features);
  std::size_t hits = 0;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    Eigen::Index best = 0;
    p.row(i).maxCoeff(&best);
    hits += best == labels[static_cast<std::size_t>(i)];
  }
  return labels.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(labels.size());
}

std::string to_json(const ProbeModel& model) {
  nlohmann::json j;
  j["groups"] = model.groups;
  j["features"] = model.weights.cols() - 1;
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index g = 0; g < model.weights.rows(); ++g) {
    std::vector<double> r(static_cast<std::size_t>(model.weights.cols()));
    for (Eigen::Index c = 0; c < model.weights.cols(); ++c) r[static_cast<std::size_t>(c)] = model.weights(g, c);
    rows.push_back(r);
  }
  j["weights"] = rows;
  j["hyper"] = {{"learning_rate", model.hyper.learning_rate},
                {"steps", model.hyper.steps},
                {"l2", model.hyper.l2},
                {"seed", model.hyper.seed},
                {"batch_size", model.hyper.batch_size}};
  j["steps_run"] = model.steps_run;
  j["final_loss"] = model.final_loss;
  return j.dump(1);
}

ProbeModel from_json(const std::string& text) {
  ProbeModel m;
  try {
    const auto j = nlohmann::json::parse(text);
    m.groups = j.at("groups").get<std::vector<std::string>>();
    const auto features = j.at("features").get<Eigen::Index>();
    const auto& rows = j.at("weights");
    if (rows.size() != m.groups.size()) fail(ErrorCode::kCorruptData, "probe model: row count mismatch");
    m.weights.resize(static_cast<Eigen::Index>(m.groups.size()), features + 1);
    for (std::size_t g = 0; g < rows.size(); ++g) {
      const auto r = rows[g].get<std::vector<double>>();
      if (static_cast<Eigen::Index>(r.size()) != features + 1) {
        fail(ErrorCode::kCorruptData, "probe model: column count mismatch");
      }
      for (std::size_t c = 0; c < r.size(); ++c) {
        if (!std::isfinite(r[c])) fail(ErrorCode::kCorruptData, "probe model: non-finite weight");
        m.weights(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(c)) = r[c];
      }
    }
    const auto& h = j.at("hyper");
    m.hyper.learning_rate = h.at("learning_rate").get<double>();
    m.hyper.steps = h.at("steps").get<int>();
    m.hyper.l2 = h.at("l2").get<double>();
    m.hyper.seed = h.at("seed").get<std::uint64_t>();
    m.hyper.batch_size = h.at("batch_size").get<int>();
    m.steps_run = j.at("steps_run").get<int>();
    m.final_loss = j.at("final_loss").get<double>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kCorruptData, std::string("probe model: ") + e.what());
  }
  return m;
}

}  // namespace cxrprep::probe
