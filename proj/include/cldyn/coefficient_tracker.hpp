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

#ifndef CLDYN_COEFFICIENT_TRACKER_HPP_
#define CLDYN_COEFFICIENT_TRACKER_HPP_

#include <cstddef>
#include <optional>
#include <stdexcept>

#include <Eigen/Dense>

#include "cldyn/contrastive_loss.hpp"
#include "cldyn/relu_encoder.hpp"
#include "cldyn/synth_data.hpp"

namespace cldyn {

// Signal-learning (gamma) and noise-memorization (rho) coefficients of
//   w_r(t) = w_r(0) + gamma_r mu / |mu|^2 + sum_i rho_ri xi_i / |xi_i|^2
// and the same for the second encoder in multi-modal runs.
struct CoefficientLedger {
  Eigen::VectorXd gamma;  // m
  Eigen::MatrixXd rho;    // m x n
  std::optional<Eigen::VectorXd> gamma_tilde;
  std::optional<Eigen::MatrixXd> rho_tilde;
  std::size_t step = 0;

  static CoefficientLedger Zero(std::size_t m, std::size_t n, bool multi);
  bool multi() const { return gamma_tilde.has_value(); }
};

struct BasisNorms {
  double mu_sq = 0.0;
  Eigen::VectorXd xi_sq;
  double mu_tilde_sq = 0.0;
  Eigen::VectorXd xi_tilde_sq;

  static BasisNorms Of(const Dataset& data);
};

// Adds the coefficient change of the step w <- w - eta * grad, where `grad`
// was evaluated at ledger step `grad_step`:
//   gamma_r += -eta * signal_r * |mu|^2,  rho_ri += -eta * noise_ri * |xi_i|^2.
// Throws std::invalid_argument if grad_step != ledger.step.
void Accumulate(CoefficientLedger& ledger, const GradientPair& grad,
                std::size_t grad_step, double eta, const BasisNorms& norms);

class RankDeficientBasis : public std::runtime_error {
 public:
  RankDeficientBasis(const std::string& what, double condition)
      : std::runtime_error(what), condition_(condition) {}
  double condition() const { return condition_; }

 private:
  double condition_;
};

struct Decomposition {
  Eigen::VectorXd gamma;               // m
  Eigen::MatrixXd rho;                 // m x n
  Eigen::VectorXd residual_norms;      // per row
  Eigen::VectorXd relative_residuals;  // residual / |row|, 0 for zero rows

  double MaxRelativeResidual() const {
    return relative_residuals.size() ? relative_residuals.maxCoeff() : 0.0;
  }
};

// Least-squares coordinates of row vectors on {mu/|mu|^2, xi_i/|xi_i|^2}.
// The QR factorization is computed once; Project() can then be called for
// every logged step.
class SpanProjector {
 public:
  // `noise` holds one basis vector xi_i per row.
  SpanProjector(const Eigen::VectorXd& signal, const Eigen::MatrixXd& noise);

  Decomposition Project(const Eigen::MatrixXd& rows) const;
  double condition_number() const { return condition_; }

 private:
  Eigen::MatrixXd basis_;  // d x (n + 1)
  Eigen::HouseholderQR<Eigen::MatrixXd> qr_;
  double condition_ = 0.0;
};

// Decomposes W_t - W_0 row by row.
Decomposition ProjectDecompose(const EncoderWeights& w_t,
                               const EncoderWeights& w_0,
                               const Eigen::VectorXd& mu,
                               const Eigen::MatrixXd& xi);

// |[gamma rho] - [gamma' rho']|_F / |[gamma' rho']|_F (absolute if the
// projection is exactly zero).
double LedgerMismatch(const Eigen::VectorXd& gamma, const Eigen::MatrixXd& rho,
                      const Decomposition& projected);

struct CoefficientSummary {
  double max_gamma = 0.0;
  double min_gamma = 0.0;
  double max_neg_gamma = 0.0;  // max_r(-gamma_r)
  double mean_abs_gamma = 0.0;
  double max_abs_gamma = 0.0;
  double max_rho = 0.0;
  double max_psi = 0.0;  // max_{r,i} rho_ri + <w_r(0), xi_i>
};

struct LedgerSummary {
  CoefficientSummary primary;
  std::optional<CoefficientSummary> tilde;
};

CoefficientSummary SummarizeCoefficients(const Eigen::VectorXd& gamma,
                                         const Eigen::MatrixXd& rho,
                                         const Eigen::MatrixXd& init_inner);

// `init_inner(r, i)` = <w_r(0), xi_i>; the tilde matrix is required for a
// multi-modal ledger.
LedgerSummary Summarize(const CoefficientLedger& ledger,
                        const Eigen::MatrixXd& init_inner,
                        const Eigen::MatrixXd* init_inner_tilde = nullptr);

}  // namespace cldyn

#endif  // CLDYN_COEFFICIENT_TRACKER_HPP_
