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

#ifndef CLDYN_CONTRASTIVE_LOSS_HPP_
#define CLDYN_CONTRASTIVE_LOSS_HPP_

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "cldyn/relu_encoder.hpp"
#include "cldyn/synth_data.hpp"

namespace cldyn {

// Similarities of each anchor to its positive and to its negatives; neg[i]
// is aligned with the anchor's negative index list.
struct SimilarityTable {
  Eigen::VectorXd pos;
  std::vector<std::vector<double>> neg;
  double tau = 1.0;
};

// Softmax weights of the positive (pos[i], the l'_i of the update rule) and
// of each negative (neg[i][k], the l'_ij).
struct LossDerivativeTable {
  Eigen::VectorXd pos;
  std::vector<std::vector<double>> neg;

  // max_i |pos_i + sum_k neg_ik - 1|
  double MaxNormalizationError() const;
  double MeanPositive() const { return pos.size() ? pos.mean() : 0.0; }
};

// Max-subtracted softmax per anchor. Throws std::domain_error on a
// non-finite similarity or a non-positive temperature.
LossDerivativeTable LossDerivatives(const SimilarityTable& table);

// Mean over anchors of -log(softmax weight of the positive), via log-sum-exp.
double InfoNceLoss(const SimilarityTable& table);

// Coordinates of one encoder's gradient in its data basis:
//   grad w_r = signal(r) * mu + sum_i noise(r, i) * xi_i.
struct GradientPrefactors {
  Eigen::VectorXd signal;  // m
  Eigen::MatrixXd noise;   // m x n
};

struct GradientPair {
  Eigen::MatrixXd grad_w;
  GradientPrefactors prefactors;
  // Second encoder, multi-modal only.
  std::optional<Eigen::MatrixXd> grad_w_tilde;
  std::optional<GradientPrefactors> prefactors_tilde;
};

// Dataset plus its fixed negative sets and the temperature.
struct ContrastiveTask {
  const Dataset& data;
  const NegativeSets& negatives;
  double tau = 1.0;
};

// Loss, gradient and the softmax bookkeeping of one evaluation. For the
// multi-modal loss `table`/`derivatives` belong to the h-centered term
// (drives W) and the *_tilde members to the g-centered term (drives W~).
struct Evaluation {
  double loss = 0.0;
  GradientPair grad;
  SimilarityTable table;
  LossDerivativeTable derivatives;
  std::optional<SimilarityTable> table_tilde;
  std::optional<LossDerivativeTable> derivatives_tilde;

  double MaxNormalizationError() const;
};

// Single-modal InfoNCE against augmented positives and the fixed negatives.
Evaluation EvaluateSingle(const EncoderWeights& w, const ContrastiveTask& task);
double LossSingle(const EncoderWeights& w, const ContrastiveTask& task);
GradientPair GradSingle(const EncoderWeights& w, const ContrastiveTask& task);

// Sum of the h-centered and g-centered cross-modal InfoNCE terms.
Evaluation EvaluateMulti(const EncoderWeights& w, const EncoderWeights& w_tilde,
                         const ContrastiveTask& task);
double LossMulti(const EncoderWeights& w, const EncoderWeights& w_tilde,
                 const ContrastiveTask& task);
GradientPair GradMulti(const EncoderWeights& w, const EncoderWeights& w_tilde,
                       const ContrastiveTask& task);

// Stop-gradient made explicit: every factor under sg() is evaluated with the
// frozen weights, every other factor with the live weights. Equal to the true
// loss when live == frozen; its derivative in the live weights is the
// analytic gradient.
double SurrogateLossSingle(const EncoderWeights& live,
                           const EncoderWeights& frozen,
                           const ContrastiveTask& task);
double SurrogateLossMulti(const EncoderWeights& live,
                          const EncoderWeights& live_tilde,
                          const EncoderWeights& frozen,
                          const EncoderWeights& frozen_tilde,
                          const ContrastiveTask& task);

}  // namespace cldyn

#endif  // CLDYN_CONTRASTIVE_LOSS_HPP_
