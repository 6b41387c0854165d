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

// Independent reference computations used by the unit tests. Nothing here
// calls into the library's loss, projection or probe code.

#ifndef CLDYN_TESTS_ORACLES_HPP_
#define CLDYN_TESTS_ORACLES_HPP_

#include <cmath>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "cldyn/relu_encoder.hpp"
#include "cldyn/synth_data.hpp"

namespace oracle {

inline double Relu(double x) { return x > 0.0 ? x : 0.0; }

inline double Feature(const Eigen::MatrixXd& w, std::size_t r,
                      const Eigen::VectorXd& v) {
  double s = 0.0;
  for (Eigen::Index k = 0; k < v.size(); ++k) s += w(r, k) * v(k);
  return Relu(s);
}

// (1/m) sum over both patches of <f_live(a), f_frozen(b)>.
inline double Sim(const Eigen::MatrixXd& live, const Eigen::MatrixXd& frozen,
                  const Eigen::VectorXd& a1, const Eigen::VectorXd& a2,
                  const Eigen::VectorXd& b1, const Eigen::VectorXd& b2) {
  double s = 0.0;
  for (Eigen::Index r = 0; r < live.rows(); ++r) {
    const auto rr = static_cast<std::size_t>(r);
    s += Feature(live, rr, a1) * Feature(frozen, rr, b1) +
         Feature(live, rr, a2) * Feature(frozen, rr, b2);
  }
  return s / static_cast<double>(live.rows());
}

inline double Nce(double pos, const std::vector<double>& neg, double tau) {
  double z = std::exp(pos / tau);
  for (double s : neg) z += std::exp(s / tau);
  return -std::log(std::exp(pos / tau) / z);
}

// Single-modal loss with anchors at `live` and everything under sg at
// `frozen`, written as plain loops.
inline double SingleLoss(const Eigen::MatrixXd& live, const Eigen::MatrixXd& frozen,
                         const cldyn::Dataset& data,
                         const cldyn::NegativeSets& negs, double tau) {
  const std::size_t n = data.size();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::VectorXd sig = data.labels[i] * data.mu;
    const Eigen::VectorXd xi = data.noise1.row(i).transpose();
    const Eigen::VectorXd aug = xi + data.aug_noise.row(i).transpose();
    const double pos = Sim(live, frozen, sig, xi, sig, aug);
    std::vector<double> neg;
    for (std::size_t j : negs[i]) {
      const Eigen::VectorXd sj = data.labels[j] * data.mu;
      const Eigen::VectorXd xj = data.noise1.row(j).transpose();
      neg.push_back(Sim(live, frozen, sig, xi, sj, xj));
    }
    total += Nce(pos, neg, tau);
  }
  return total / static_cast<double>(n);
}

// One direction of the multi-modal loss: anchors from (live, a-modality),
// positives and negatives from (frozen, b-modality).
inline double CrossLoss(const Eigen::MatrixXd& live, const Eigen::VectorXd& mu_a,
                        const Eigen::MatrixXd& noise_a,
                        const Eigen::MatrixXd& frozen, const Eigen::VectorXd& mu_b,
                        const Eigen::MatrixXd& noise_b,
                        const std::vector<int>& labels,
                        const cldyn::NegativeSets& negs, double tau) {
  const std::size_t n = labels.size();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::VectorXd a1 = labels[i] * mu_a;
    const Eigen::VectorXd a2 = noise_a.row(i).transpose();
    const double pos = Sim(live, frozen, a1, a2, labels[i] * mu_b,
                           noise_b.row(i).transpose());
    std::vector<double> neg;
    for (std::size_t j : negs[i]) {
      neg.push_back(Sim(live, frozen, a1, a2, labels[j] * mu_b,
                        noise_b.row(j).transpose()));
    }
    total += Nce(pos, neg, tau);
  }
  return total / static_cast<double>(n);
}

template <typename F>
Eigen::MatrixXd CentralDiff(const Eigen::MatrixXd& at, double h, F&& f) {
  Eigen::MatrixXd g(at.rows(), at.cols());
  Eigen::MatrixXd x = at;
  for (Eigen::Index r = 0; r < at.rows(); ++r) {
    for (Eigen::Index k = 0; k < at.cols(); ++k) {
      x(r, k) = at(r, k) + h;
      const double up = f(x);
      x(r, k) = at(r, k) - h;
      const double down = f(x);
      x(r, k) = at(r, k);
      g(r, k) = (up - down) / (2.0 * h);
    }
  }
  return g;
}

// Coefficients of `row` in the basis {mu/|mu|^2, xi_i/|xi_i|^2} from the
// normal equations.
inline Eigen::VectorXd NormalEquations(const Eigen::VectorXd& mu,
                                       const Eigen::MatrixXd& xi,
                                       const Eigen::VectorXd& row) {
  Eigen::MatrixXd b(mu.size(), xi.rows() + 1);
  b.col(0) = mu / mu.squaredNorm();
  for (Eigen::Index i = 0; i < xi.rows(); ++i) {
    b.col(i + 1) = xi.row(i).transpose() / xi.row(i).squaredNorm();
  }
  return (b.transpose() * b).ldlt().solve(b.transpose() * row);
}

// Newton / IRLS on mean logistic loss + (lambda/2)|w|^2, bias unpenalized.
inline Eigen::VectorXd IrlsProbe(const Eigen::MatrixXd& features,
                                 const std::vector<int>& labels, double lambda) {
  const Eigen::Index n = features.rows(), p = features.cols();
  Eigen::MatrixXd x(n, p + 1);
  x << features, Eigen::VectorXd::Ones(n);
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(p + 1);
  Eigen::VectorXd pen = Eigen::VectorXd::Constant(p + 1, lambda);
  pen(p) = 0.0;
  for (int it = 0; it < 100; ++it) {
    Eigen::VectorXd g = pen.cwiseProduct(theta);
    Eigen::MatrixXd h = pen.asDiagonal();
    for (Eigen::Index i = 0; i < n; ++i) {
      const double y = labels[static_cast<std::size_t>(i)];
      const double z = x.row(i).dot(theta);
      const double s = 1.0 / (1.0 + std::exp(-z));  // P(y = +1)
      const double t = (y > 0 ? 1.0 : 0.0);
      g += (s - t) * x.row(i).transpose() / static_cast<double>(n);
      h += s * (1.0 - s) * x.row(i).transpose() * x.row(i) / static_cast<double>(n);
    }
    const Eigen::VectorXd step = h.ldlt().solve(g);
    theta -= step;
    if (step.norm() < 1e-13) break;
  }
  return theta;
}

}  // namespace oracle

#endif  // CLDYN_TESTS_ORACLES_HPP_
