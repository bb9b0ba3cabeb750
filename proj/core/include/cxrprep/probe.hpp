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

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cxrprep/image.hpp"
#include "cxrprep/mask.hpp"

namespace cxrprep::probe {

inline constexpr int kFeatureBins = 256;

struct FeatureOptions {
  // Drop zero-valued pixels, i.e. the black border that masking and
  // letterboxing inject.
  bool exclude_zero = false;
};

// 256-bin intensity histogram normalised to sum 1. With a mask only pixels
// under it are counted. If every pixel is excluded the unfiltered
// histogram is used instead.
Eigen::VectorXd featurize(const GrayImage& img, const mask::BinaryMask* mask = nullptr,
                          FeatureOptions options = {});

struct Hyper {
  double learning_rate = 0.1;
  int steps = 2000;
  double l2 = 1e-3;
  std::uint64_t seed = 0;
  // 0 = full batch. Otherwise minibatches drawn from a seeded shuffle.
  int batch_size = 0;
};

// Multinomial logistic regression. weights is groups x (features + 1); the
// last column is the bias and is not regularised.
struct ProbeModel {
  Eigen::MatrixXd weights;
  std::vector<std::string> groups;
  Hyper hyper;
  int steps_run = 0;
  double final_loss = 0.0;
  std::vector<double> loss_history;  // loss before each step, then final
};

// Mean cross-entropy plus (l2 / 2) * ||W without bias||^2. Writes the
// gradient when 'gradient' is non-null.
double loss_and_gradient(const Eigen::MatrixXd& weights, const Eigen::MatrixXd& features,
                         std::span<const int> labels, double l2, Eigen::MatrixXd* gradient);

// features: one row per sample. labels: index into group_names.
// Gradient descent from zero weights. Throws SingleGroup if fewer than two
// groups occur in labels, InvalidArgument on shape errors.
ProbeModel train_probe(const Eigen::MatrixXd& features, std::span<const int> labels,
                       std::vector<std::string> group_names, const Hyper& hyper = {});

// Row-wise softmax probabilities, samples x groups.
Eigen::MatrixXd predict_proba(const ProbeModel& model, const Eigen::MatrixXd& features);

// Macro one-vs-rest AUROC of the softmax outputs over groups present in
// labels. Errors propagate from metrics::auroc.
double probe_auroc(const ProbeModel& model, const Eigen::MatrixXd& features,
                   std::span<const int> labels);

// Fraction of samples whose arg-max group equals the label.
double accuracy(const ProbeModel& model, const Eigen::MatrixXd& features,
                std::span<const int> labels);

std::string to_json(const ProbeModel& model);
ProbeModel from_json(const std::string& text);

}  // namespace cxrprep::probe
