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

#include "cldyn/coefficient_tracker.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>

namespace cldyn {

CoefficientLedger CoefficientLedger::Zero(std::size_t m, std::size_t n,
                                          bool multi) {
  const auto rows = static_cast<Eigen::Index>(m);
  const auto cols = static_cast<Eigen::Index>(n);
  CoefficientLedger ledger;
  ledger.gamma = Eigen::VectorXd::Zero(rows);
  ledger.rho = Eigen::MatrixXd::Zero(rows, cols);
  if (multi) {
    ledger.gamma_tilde = Eigen::VectorXd::Zero(rows);
    ledger.rho_tilde = Eigen::MatrixXd::Zero(rows, cols);
  }
  return ledger;
}

BasisNorms BasisNorms::Of(const Dataset& data) {
  BasisNorms norms;
  norms.mu_sq = data.mu.squaredNorm();
  norms.xi_sq = data.noise1.rowwise().squaredNorm();
  norms.mu_tilde_sq = data.mu_tilde.squaredNorm();
  norms.xi_tilde_sq = data.noise2.rowwise().squaredNorm();
  return norms;
}

namespace {

void AddStep(Eigen::VectorXd& gamma, Eigen::MatrixXd& rho,
             const GradientPrefactors& pre, double eta, double mu_sq,
             const Eigen::VectorXd& xi_sq) {
  if (pre.signal.size() != gamma.size() || pre.noise.rows() != rho.rows() ||
      pre.noise.cols() != rho.cols()) {
    throw std::invalid_argument("gradient prefactors do not match the ledger");
  }
  gamma += (-eta * mu_sq) * pre.signal;
  for (Eigen::Index i = 0; i < rho.cols(); ++i) {
    rho.col(i) += (-eta * xi_sq(i)) * pre.noise.col(i);
  }
}

}  // namespace

void Accumulate(CoefficientLedger& ledger, const GradientPair& grad,
                std::size_t grad_step, double eta, const BasisNorms& norms) {
  if (grad_step != ledger.step) {
    throw std::invalid_argument("gradient from step " +
                                std::to_string(grad_step) +
                                " applied to ledger at step " +
                                std::to_string(ledger.step));
  }
  AddStep(ledger.gamma, ledger.rho, grad.prefactors, eta, norms.mu_sq,
          norms.xi_sq);
  if (ledger.multi()) {
    if (!grad.prefactors_tilde) {
      throw std::invalid_argument("multi-modal ledger needs both gradients");
    }
    AddStep(*ledger.gamma_tilde, *ledger.rho_tilde, *grad.prefactors_tilde,
            eta, norms.mu_tilde_sq, norms.xi_tilde_sq);
  }
  ++ledger.step;
}

SpanProjector::SpanProjector(const Eigen::VectorXd& signal,
                             const Eigen::MatrixXd& noise) {
  const Eigen::Index d = signal.size();
  const Eigen::Index n = noise.rows();
  if (noise.cols() != d) {
    throw DimensionError("noise basis does not match signal dimension");
  }
  if (d < n + 1) {
    throw RankDeficientBasis("basis of " + std::to_string(n + 1) +
                                 " vectors in dimension " + std::to_string(d) +
                                 " is rank-deficient",
                             std::numeric_limits<double>::infinity());
  }
  basis_.resize(d, n + 1);
  basis_.col(0) = signal / signal.squaredNorm();
  for (Eigen::Index i = 0; i < n; ++i) {
    basis_.col(i + 1) = noise.row(i).transpose() / noise.row(i).squaredNorm();
  }
  if (!basis_.allFinite()) {
    throw RankDeficientBasis("basis contains a zero vector",
                             std::numeric_limits<double>::infinity());
  }
  // Condition number of the column-normalized basis.
  const Eigen::MatrixXd unit = basis_.colwise().normalized();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(unit.transpose() * unit,
                                                     Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  condition_ = lo > 0.0 ? std::sqrt(hi / lo)
                        : std::numeric_limits<double>::infinity();
  if (!(condition_ < 1e8)) {
    throw RankDeficientBasis(
        "projection basis is numerically rank-deficient (condition number " +
            std::to_string(condition_) + ")",
        condition_);
  }
  qr_.compute(basis_);
}

Decomposition SpanProjector::Project(const Eigen::MatrixXd& rows) const {
  if (rows.cols() != basis_.rows()) {
    throw DimensionError("rows do not match the basis dimension");
  }
  const Eigen::MatrixXd coef = qr_.solve(rows.transpose());  // (n+1) x m
  const Eigen::MatrixXd residual = rows.transpose() - basis_ * coef;
  Decomposition out;
  out.gamma = coef.row(0).transpose();
  out.rho = coef.bottomRows(coef.rows() - 1).transpose();
  out.residual_norms = residual.colwise().norm().transpose();
  out.relative_residuals.resize(rows.rows());
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    const double norm = rows.row(r).norm();
    out.relative_residuals(r) = norm > 0.0 ? out.residual_norms(r) / norm : 0.0;
  }
  return out;
}

Decomposition ProjectDecompose(const EncoderWeights& w_t,
                               const EncoderWeights& w_0,
                               const Eigen::VectorXd& mu,
                               const Eigen::MatrixXd& xi) {
  if (w_t.w.rows() != w_0.w.rows() || w_t.w.cols() != w_0.w.cols()) {
    throw DimensionError("weight matrices differ in shape");
  }
  return SpanProjector(mu, xi).Project(w_t.w - w_0.w);
}

double LedgerMismatch(const Eigen::VectorXd& gamma, const Eigen::MatrixXd& rho,
                      const Decomposition& projected) {
  const double diff = std::sqrt((gamma - projected.gamma).squaredNorm() +
                                (rho - projected.rho).squaredNorm());
  const double ref =
      std::sqrt(projected.gamma.squaredNorm() + projected.rho.squaredNorm());
  return ref > 0.0 ? diff / ref : diff;
}

CoefficientSummary SummarizeCoefficients(const Eigen::VectorXd& gamma,
                                         const Eigen::MatrixXd& rho,
                                         const Eigen::MatrixXd& init_inner) {
  CoefficientSummary s;
  if (gamma.size() > 0) {
    s.max_gamma = gamma.maxCoeff();
    s.min_gamma = gamma.minCoeff();
    s.max_neg_gamma = (-gamma).maxCoeff();
    s.mean_abs_gamma = gamma.cwiseAbs().mean();
    s.max_abs_gamma = gamma.cwiseAbs().maxCoeff();
  }
  if (rho.size() > 0) {
    s.max_rho = rho.maxCoeff();
    s.max_psi = (rho + init_inner).maxCoeff();
  }
  return s;
}

LedgerSummary Summarize(const CoefficientLedger& ledger,
                        const Eigen::MatrixXd& init_inner,
                        const Eigen::MatrixXd* init_inner_tilde) {
  LedgerSummary out;
  out.primary = SummarizeCoefficients(ledger.gamma, ledger.rho, init_inner);
  if (ledger.multi()) {
    if (!init_inner_tilde) {
      throw std::invalid_argument("multi-modal summary needs <w~(0), xi~>");
    }
    out.tilde = SummarizeCoefficients(*ledger.gamma_tilde, *ledger.rho_tilde,
                                      *init_inner_tilde);
  }
  return out;
}

}  // namespace cldyn
