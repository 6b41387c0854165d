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

#include <cmath>
#include <stdexcept>

#include "cldyn/coefficient_tracker.hpp"
#include "cldyn/contrastive_loss.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace cldyn;

namespace {

Eigen::MatrixXd Gaussian(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  return Eigen::MatrixXd::NullaryExpr(rows, cols, [&] { return rng.Normal(); });
}

struct Basis {
  Eigen::VectorXd mu;
  Eigen::MatrixXd xi;
};

Basis RandomBasis(std::size_t d, std::size_t n, Rng& rng) {
  Basis b;
  b.mu = Gaussian(static_cast<Eigen::Index>(d), 1, rng);
  b.xi = Gaussian(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d), rng);
  return b;
}

EncoderWeights Weights(const Eigen::MatrixXd& w) { return EncoderWeights{w}; }

}  // namespace

TEST_SUITE("coefficient_tracker") {

TEST_CASE("coefficient_tracker: zero ledger") {
  const CoefficientLedger l = CoefficientLedger::Zero(3, 4, true);
  CHECK(l.step == 0);
  CHECK(l.gamma.norm() == 0.0);
  CHECK(l.rho.norm() == 0.0);
  CHECK(l.multi());
  CHECK(l.rho_tilde->rows() == 3);
  CHECK(!CoefficientLedger::Zero(3, 4, false).multi());
}

TEST_CASE("coefficient_tracker: pure signal step") {
  Rng rng(1);
  const Basis b = RandomBasis(20, 5, rng);
  const Eigen::MatrixXd w0 = Gaussian(3, 20, rng);
  Eigen::MatrixXd wt = w0;
  wt.row(1) += 0.7 * b.mu.transpose() / b.mu.squaredNorm();
  const Decomposition dec = ProjectDecompose(Weights(wt), Weights(w0), b.mu, b.xi);
  CHECK(dec.gamma(1) == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(std::abs(dec.gamma(0)) < 1e-14);
  CHECK(dec.rho.cwiseAbs().maxCoeff() < 1e-12);
  CHECK(dec.MaxRelativeResidual() < 1e-12);
}

TEST_CASE("coefficient_tracker: recovers noise coefficients despite overlap") {
  Rng rng(2);
  const Basis b = RandomBasis(15, 6, rng);
  const Eigen::MatrixXd w0 = Gaussian(2, 15, rng);
  const Eigen::MatrixXd c = Gaussian(2, 6, rng);
  Eigen::MatrixXd wt = w0;
  for (Eigen::Index i = 0; i < 6; ++i) {
    wt += c.col(i) * b.xi.row(i) / b.xi.row(i).squaredNorm();
  }
  const Decomposition dec = ProjectDecompose(Weights(wt), Weights(w0), b.mu, b.xi);
  CHECK((dec.rho - c).cwiseAbs().maxCoeff() < 1e-8);
  for (Eigen::Index r = 0; r < 2; ++r) {
    const Eigen::VectorXd ref =
        oracle::NormalEquations(b.mu, b.xi, (wt - w0).row(r).transpose());
    CHECK(std::abs(ref(0) - dec.gamma(r)) < 1e-8);
    CHECK((ref.tail(6).transpose() - dec.rho.row(r)).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("coefficient_tracker: orthogonal component shows up as residual") {
  Rng rng(3);
  const Basis b = RandomBasis(12, 4, rng);
  Eigen::MatrixXd basis(12, 5);
  basis << b.mu, b.xi.transpose();
  Eigen::VectorXd extra = Gaussian(12, 1, rng);
  extra -= basis * (basis.transpose() * basis).ldlt().solve(basis.transpose() * extra);
  const Eigen::MatrixXd w0 = Eigen::MatrixXd::Zero(1, 12);
  const Eigen::MatrixXd wt = extra.transpose();
  const Decomposition dec = ProjectDecompose(Weights(wt), Weights(w0), b.mu, b.xi);
  CHECK(dec.residual_norms(0) == doctest::Approx(extra.norm()).epsilon(1e-10));
  CHECK(dec.relative_residuals(0) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("coefficient_tracker: rank-deficient basis is reported") {
  Rng rng(4);
  Basis b = RandomBasis(10, 3, rng);
  b.xi.row(2) = 2.0 * b.xi.row(0);
  CHECK_THROWS_AS(SpanProjector(b.mu, b.xi), RankDeficientBasis);
  try {
    SpanProjector bad(b.mu, b.xi);
  } catch (const RankDeficientBasis& e) {
    CHECK(e.condition() >= 1e8);
  }
  const Basis wide = RandomBasis(4, 4, rng);
  CHECK_THROWS(SpanProjector(wide.mu, wide.xi));
}

TEST_CASE("coefficient_tracker: accumulation equals projection of the step") {
  Rng rng(5);
  DataConfig cfg;
  cfg.d = cfg.d_tilde = 24;
  cfg.n = 6;
  cfg.mu = UnitScaled(24, 0, 3.0);
  cfg.mu_tilde = UnitScaled(24, 1, 4.0);
  cfg.nu = cfg.mu;
  const Dataset data = GenTrain(cfg, rng);
  const NegativeSets negs = BuildNegatives(data, NegativePolicy::All(), rng);
  const ContrastiveTask task{data, negs, 1.0};
  EncoderWeights w = InitWeights(4, 24, 0.5, rng);
  const EncoderWeights w0 = w;
  CoefficientLedger ledger = CoefficientLedger::Zero(4, 6, false);
  const BasisNorms norms = BasisNorms::Of(data);
  for (std::size_t t = 0; t < 20; ++t) {
    const GradientPair g = GradSingle(w, task);
    w.w -= 0.5 * g.grad_w;
    Accumulate(ledger, g, t, 0.5, norms);
  }
  CHECK(ledger.step == 20);
  const Decomposition dec = ProjectDecompose(w, w0, data.mu, data.noise1);
  CHECK(LedgerMismatch(ledger.gamma, ledger.rho, dec) <= 1e-8);
  CHECK(dec.MaxRelativeResidual() <= 1e-8);
}

TEST_CASE("coefficient_tracker: zero step leaves the ledger unchanged") {
  CoefficientLedger l = CoefficientLedger::Zero(2, 3, false);
  l.gamma << 1.0, -2.0;
  GradientPair g;
  g.grad_w = Eigen::MatrixXd::Zero(2, 5);
  g.prefactors.signal = Eigen::VectorXd::Zero(2);
  g.prefactors.noise = Eigen::MatrixXd::Zero(2, 3);
  BasisNorms norms;
  norms.mu_sq = 4.0;
  norms.xi_sq = Eigen::VectorXd::Ones(3);
  Accumulate(l, g, 0, 0.1, norms);
  CHECK(l.gamma(1) == -2.0);
  CHECK(l.rho.norm() == 0.0);
  CHECK_THROWS_AS(Accumulate(l, g, 5, 0.1, norms), std::invalid_argument);
}

TEST_CASE("coefficient_tracker: summaries") {
  const CoefficientLedger zero = CoefficientLedger::Zero(2, 3, false);
  const LedgerSummary s0 = Summarize(zero, Eigen::MatrixXd::Zero(2, 3));
  CHECK(s0.primary.max_gamma == 0.0);
  CHECK(s0.primary.max_psi == 0.0);
  CHECK(!s0.tilde);

  Eigen::VectorXd gamma(3);
  gamma << 0.5, -2.0, 1.0;
  Eigen::MatrixXd rho(3, 2);
  rho << 0.1, 0.0, 3.0, 0.2, 0.0, 0.0;
  Eigen::MatrixXd init(3, 2);
  init << 0.0, 0.9, -1.0, 0.0, 0.0, 0.0;
  const CoefficientSummary s = SummarizeCoefficients(gamma, rho, init);
  CHECK(s.max_gamma == 1.0);
  CHECK(s.min_gamma == -2.0);
  CHECK(s.max_neg_gamma == 2.0);
  CHECK(s.max_abs_gamma == 2.0);
  CHECK(s.mean_abs_gamma == doctest::Approx(3.5 / 3.0));
  CHECK(s.max_rho == 3.0);
  CHECK(s.max_psi == doctest::Approx(2.0));
}

}  // TEST_SUITE
