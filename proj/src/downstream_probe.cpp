// Copyright 2026 The cldyn Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cldyn/downstream_probe.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace cldyn {
namespace {

double Sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

LinearHead FitProbe(const Eigen::MatrixXd& features, std::span<const int> labels,
                    const ProbeOptions& opts) {
  const Eigen::Index n = features.rows();
  const Eigen::Index p = features.cols();
  if (static_cast<std::size_t>(n) != labels.size()) {
    throw DimensionError("feature rows and labels differ in count");
  }
  if (n < 2) throw ConfigError("probe needs at least two samples");
  const bool has_pos = std::find(labels.begin(), labels.end(), 1) != labels.end();
  const bool has_neg = std::find(labels.begin(), labels.end(), -1) != labels.end();
  if (!has_pos || !has_neg) throw ConfigError("probe needs both classes");

  // Augmented design [X 1] so the bias shares the update.
  Eigen::MatrixXd x(n, p + 1);
  x.leftCols(p) = features;
  x.col(p).setOnes();
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    y(i) = static_cast<double>(labels[static_cast<std::size_t>(i)]);
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(x.transpose() * x,
                                                     Eigen::EigenvaluesOnly);
  const double smooth =
      eig.eigenvalues().maxCoeff() / (4.0 * static_cast<double>(n)) +
      opts.lambda;
  const double step = 1.0 / smooth;

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(p + 1);
  Eigen::VectorXd grad(p + 1);
  for (std::size_t it = 0; it < opts.max_iter; ++it) {
    const Eigen::VectorXd margin = y.cwiseProduct(x * theta);
    Eigen::VectorXd weight(n);
    for (Eigen::Index i = 0; i < n; ++i) weight(i) = -y(i) * Sigmoid(-margin(i));
    grad = x.transpose() * weight / static_cast<double>(n);
    grad.head(p) += opts.lambda * theta.head(p);
    if (grad.norm() <= opts.grad_tol) break;
    theta -= step * grad;
  }
  LinearHead head;
  head.w = theta.head(p);
  head.b = theta(p);
  return head;
}

ProbeScore Eval01(const LinearHead& head, const Eigen::MatrixXd& features,
                  std::span<const int> labels) {
  if (static_cast<std::size_t>(features.rows()) != labels.size() ||
      features.cols() != head.w.size()) {
    throw DimensionError("probe head, features and labels disagree in shape");
  }
  ProbeScore score;
  if (labels.empty()) return score;
  const Eigen::VectorXd f = (features * head.w).array() + head.b;
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!(labels[i] * f(static_cast<Eigen::Index>(i)) > 0.0)) ++wrong;
  }
  score.error = static_cast<double>(wrong) / static_cast<double>(labels.size());
  score.accuracy = 1.0 - score.error;
  return score;
}

Eigen::MatrixXd TestEmbeddings(const EncoderWeights& enc, const TestSet& set) {
  return Relu(PreActivations(enc, set.signal)) +
         Relu(PreActivations(enc, set.noise));
}

ProbeScore ProbeAccuracy(const EncoderWeights& enc, const TestSplits& splits,
                         const ProbeOptions& opts) {
  std::set<std::size_t> seen(splits.probe.ids.begin(), splits.probe.ids.end());
  for (std::size_t id : splits.eval.ids) {
    if (seen.count(id)) throw std::logic_error("probe and eval splits overlap");
  }
  const LinearHead head =
      FitProbe(TestEmbeddings(enc, splits.probe), splits.probe.labels, opts);
  return Eval01(head, TestEmbeddings(enc, splits.eval), splits.eval.labels);
}

}  // namespace cldyn
