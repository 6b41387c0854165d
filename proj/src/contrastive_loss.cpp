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

#include "cldyn/contrastive_loss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace cldyn {
namespace {

// One InfoNCE direction. The anchor side is live (pre-activations, so the
// ReLU gate is available); positives and candidates are values under sg.
// Row i of pos* is anchor i's positive, row j of cand* is sample j as a
// negative.
struct Direction {
  Eigen::MatrixXd anchor_pre1, anchor_pre2;  // n x m
  Eigen::MatrixXd pos1, pos2;                // n x m
  Eigen::MatrixXd cand1, cand2;              // n x m
};

struct DirectionResult {
  double loss = 0.0;
  SimilarityTable table;
  LossDerivativeTable derivatives;
  GradientPrefactors prefactors;
};

// Rows y_i * <w_r, signal>, i.e. pre-activations of the signal patches.
Eigen::MatrixXd SignalPre(const EncoderWeights& enc,
                          const Eigen::VectorXd& signal,
                          const std::vector<int>& labels) {
  if (static_cast<std::size_t>(signal.size()) != enc.dim()) {
    throw DimensionError("signal vector does not match encoder dimension");
  }
  const Eigen::VectorXd s = enc.w * signal;
  Eigen::MatrixXd pre(static_cast<Eigen::Index>(labels.size()), s.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    pre.row(static_cast<Eigen::Index>(i)) =
        static_cast<double>(labels[i]) * s.transpose();
  }
  return pre;
}

DirectionResult RunDirection(const Direction& dir, const ContrastiveTask& task,
                             bool with_gradient) {
  const auto& labels = task.data.labels;
  const auto n = static_cast<Eigen::Index>(labels.size());
  const auto m = dir.anchor_pre1.cols();
  const double inv_m = 1.0 / static_cast<double>(m);

  const Eigen::MatrixXd a1 = Relu(dir.anchor_pre1);
  const Eigen::MatrixXd a2 = Relu(dir.anchor_pre2);
  // All anchor-candidate similarities; only the negative entries are used.
  const Eigen::MatrixXd cross =
      (a1 * dir.cand1.transpose() + a2 * dir.cand2.transpose()) * inv_m;

  DirectionResult out;
  out.table.tau = task.tau;
  out.table.pos.resize(n);
  out.table.neg.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    out.table.pos(i) =
        (a1.row(i).dot(dir.pos1.row(i)) + a2.row(i).dot(dir.pos2.row(i))) *
        inv_m;
    const auto& negs = task.negatives[static_cast<std::size_t>(i)];
    auto& row = out.table.neg[static_cast<std::size_t>(i)];
    row.reserve(negs.size());
    for (std::size_t j : negs) row.push_back(cross(i, static_cast<Eigen::Index>(j)));
  }
  out.derivatives = LossDerivatives(out.table);
  out.loss = InfoNceLoss(out.table);
  if (!with_gradient) return out;

  // c(i, r) = [(1 - l'_i) pos(i, r) - sum_j l'_ij cand(j, r)] * gate(i, r)
  Eigen::MatrixXd c1(n, m), c2(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double keep = 1.0 - out.derivatives.pos(i);
    Eigen::RowVectorXd t1 = keep * dir.pos1.row(i);
    Eigen::RowVectorXd t2 = keep * dir.pos2.row(i);
    const auto& negs = task.negatives[static_cast<std::size_t>(i)];
    const auto& weights = out.derivatives.neg[static_cast<std::size_t>(i)];
    for (std::size_t k = 0; k < negs.size(); ++k) {
      const auto j = static_cast<Eigen::Index>(negs[k]);
      t1 -= weights[k] * dir.cand1.row(j);
      t2 -= weights[k] * dir.cand2.row(j);
    }
    for (Eigen::Index r = 0; r < m; ++r) {
      c1(i, r) = dir.anchor_pre1(i, r) > 0.0 ? t1(r) : 0.0;
      c2(i, r) = dir.anchor_pre2(i, r) > 0.0 ? t2(r) : 0.0;
    }
  }
  const double scale =
      -1.0 / (static_cast<double>(n) * static_cast<double>(m) * task.tau);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    y(i) = static_cast<double>(labels[static_cast<std::size_t>(i)]);
  }
  out.prefactors.signal = scale * (c1.transpose() * y);
  out.prefactors.noise = scale * c2.transpose();
  return out;
}

Eigen::MatrixXd AssembleGradient(const GradientPrefactors& pre,
                                 const Eigen::VectorXd& signal,
                                 const Eigen::MatrixXd& noise) {
  return pre.signal * signal.transpose() + pre.noise * noise;
}

Direction SingleDirection(const EncoderWeights& live,
                          const EncoderWeights& frozen,
                          const ContrastiveTask& task) {
  const Dataset& data = task.data;
  const Eigen::MatrixXd augmented = data.noise1 + data.aug_noise;
  Direction dir;
  dir.anchor_pre1 = SignalPre(live, data.mu, data.labels);
  dir.anchor_pre2 = PreActivations(live, data.noise1);
  // The augmentation leaves the signal patch unchanged.
  dir.cand1 = Relu(SignalPre(frozen, data.mu, data.labels));
  dir.cand2 = Relu(PreActivations(frozen, data.noise1));
  dir.pos1 = dir.cand1;
  dir.pos2 = Relu(PreActivations(frozen, augmented));
  return dir;
}

// Anchors from modality `live` (signal/noise of that modality), positives
// and negatives from the paired modality under sg.
Direction CrossDirection(const EncoderWeights& live,
                         const Eigen::VectorXd& live_signal,
                         const Eigen::MatrixXd& live_noise,
                         const EncoderWeights& frozen,
                         const Eigen::VectorXd& frozen_signal,
                         const Eigen::MatrixXd& frozen_noise,
                         const std::vector<int>& labels) {
  if (live.neurons() != frozen.neurons()) {
    throw DimensionError("encoders have different neuron counts");
  }
  Direction dir;
  dir.anchor_pre1 = SignalPre(live, live_signal, labels);
  dir.anchor_pre2 = PreActivations(live, live_noise);
  dir.pos1 = Relu(SignalPre(frozen, frozen_signal, labels));
  dir.pos2 = Relu(PreActivations(frozen, frozen_noise));
  dir.cand1 = dir.pos1;
  dir.cand2 = dir.pos2;
  return dir;
}

void CheckTask(const ContrastiveTask& task) {
  if (task.negatives.size() != task.data.size()) {
    throw DimensionError("negative sets do not match the dataset size");
  }
}

void CheckSameShape(const EncoderWeights& a, const EncoderWeights& b) {
  if (a.w.rows() != b.w.rows() || a.w.cols() != b.w.cols()) {
    throw DimensionError("live and frozen weights differ in shape");
  }
}

}  // namespace

double LossDerivativeTable::MaxNormalizationError() const {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < pos.size(); ++i) {
    double total = pos(i);
    for (double v : neg[static_cast<std::size_t>(i)]) total += v;
    worst = std::max(worst, std::abs(total - 1.0));
  }
  return worst;
}

LossDerivativeTable LossDerivatives(const SimilarityTable& table) {
  if (!(table.tau > 0.0)) throw std::domain_error("temperature must be > 0");
  LossDerivativeTable out;
  const Eigen::Index n = table.pos.size();
  out.pos.resize(n);
  out.neg.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& negs = table.neg.at(static_cast<std::size_t>(i));
    const double pos = table.pos(i) / table.tau;
    if (!std::isfinite(pos)) {
      throw std::domain_error("non-finite similarity for anchor " +
                              std::to_string(i));
    }
    double top = pos;
    for (double s : negs) {
      if (!std::isfinite(s)) {
        throw std::domain_error("non-finite similarity for anchor " +
                                std::to_string(i));
      }
      top = std::max(top, s / table.tau);
    }
    double z = std::exp(pos - top);
    auto& row = out.neg[static_cast<std::size_t>(i)];
    row.resize(negs.size());
    for (std::size_t k = 0; k < negs.size(); ++k) {
      row[k] = std::exp(negs[k] / table.tau - top);
      z += row[k];
    }
    out.pos(i) = std::exp(pos - top) / z;
    for (double& v : row) v /= z;
  }
  return out;
}

double InfoNceLoss(const SimilarityTable& table) {
  const Eigen::Index n = table.pos.size();
  if (n == 0) return 0.0;
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& negs = table.neg.at(static_cast<std::size_t>(i));
    const double pos = table.pos(i) / table.tau;
    double top = pos;
    for (double s : negs) top = std::max(top, s / table.tau);
    double z = std::exp(pos - top);
    for (double s : negs) z += std::exp(s / table.tau - top);
    total += top + std::log(z) - pos;
  }
  return total / static_cast<double>(n);
}

double Evaluation::MaxNormalizationError() const {
  double worst = derivatives.MaxNormalizationError();
  if (derivatives_tilde) {
    worst = std::max(worst, derivatives_tilde->MaxNormalizationError());
  }
  return worst;
}

Evaluation EvaluateSingle(const EncoderWeights& w, const ContrastiveTask& task) {
  CheckTask(task);
  DirectionResult res =
      RunDirection(SingleDirection(w, w, task), task, /*with_gradient=*/true);
  Evaluation ev;
  ev.loss = res.loss;
  ev.grad.grad_w =
      AssembleGradient(res.prefactors, task.data.mu, task.data.noise1);
  ev.grad.prefactors = std::move(res.prefactors);
  ev.table = std::move(res.table);
  ev.derivatives = std::move(res.derivatives);
  return ev;
}

double LossSingle(const EncoderWeights& w, const ContrastiveTask& task) {
  return SurrogateLossSingle(w, w, task);
}

GradientPair GradSingle(const EncoderWeights& w, const ContrastiveTask& task) {
  return EvaluateSingle(w, task).grad;
}

Evaluation EvaluateMulti(const EncoderWeights& w, const EncoderWeights& w_tilde,
                         const ContrastiveTask& task) {
  CheckTask(task);
  const Dataset& data = task.data;
  DirectionResult h_side = RunDirection(
      CrossDirection(w, data.mu, data.noise1, w_tilde, data.mu_tilde,
                     data.noise2, data.labels),
      task, true);
  DirectionResult g_side = RunDirection(
      CrossDirection(w_tilde, data.mu_tilde, data.noise2, w, data.mu,
                     data.noise1, data.labels),
      task, true);
  Evaluation ev;
  ev.loss = h_side.loss + g_side.loss;
  ev.grad.grad_w = AssembleGradient(h_side.prefactors, data.mu, data.noise1);
  ev.grad.grad_w_tilde =
      AssembleGradient(g_side.prefactors, data.mu_tilde, data.noise2);
  ev.grad.prefactors = std::move(h_side.prefactors);
  ev.grad.prefactors_tilde = std::move(g_side.prefactors);
  ev.table = std::move(h_side.table);
  ev.derivatives = std::move(h_side.derivatives);
  ev.table_tilde = std::move(g_side.table);
  ev.derivatives_tilde = std::move(g_side.derivatives);
  return ev;
}

double LossMulti(const EncoderWeights& w, const EncoderWeights& w_tilde,
                 const ContrastiveTask& task) {
  return SurrogateLossMulti(w, w_tilde, w, w_tilde, task);
}

GradientPair GradMulti(const EncoderWeights& w, const EncoderWeights& w_tilde,
                       const ContrastiveTask& task) {
  return EvaluateMulti(w, w_tilde, task).grad;
}

double SurrogateLossSingle(const EncoderWeights& live,
                           const EncoderWeights& frozen,
                           const ContrastiveTask& task) {
  CheckTask(task);
  CheckSameShape(live, frozen);
  return RunDirection(SingleDirection(live, frozen, task), task, false).loss;
}

double SurrogateLossMulti(const EncoderWeights& live,
                          const EncoderWeights& live_tilde,
                          const EncoderWeights& frozen,
                          const EncoderWeights& frozen_tilde,
                          const ContrastiveTask& task) {
  CheckTask(task);
  CheckSameShape(live, frozen);
  CheckSameShape(live_tilde, frozen_tilde);
  const Dataset& data = task.data;
  const double h_term =
      RunDirection(CrossDirection(live, data.mu, data.noise1, frozen_tilde,
                                  data.mu_tilde, data.noise2, data.labels),
                   task, false)
          .loss;
  const double g_term =
      RunDirection(CrossDirection(live_tilde, data.mu_tilde, data.noise2,
                                  frozen, data.mu, data.noise1, data.labels),
                   task, false)
          .loss;
  return h_term + g_term;
}

}  // namespace cldyn
