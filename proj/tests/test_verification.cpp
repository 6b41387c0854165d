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

#include "cldyn/verification.hpp"
#include "doctest.h"
#include "small_config.hpp"

using namespace cldyn;

TEST_SUITE("verification") {

TEST_CASE("verification: random instances respect the size limits") {
  for (std::uint64_t s = 0; s < 30; ++s) {
    const GradientInstance inst = RandomGradientInstance(s);
    CHECK(inst.data.dim() <= 16);
    CHECK(inst.data.size() <= 6);
    CHECK(inst.w.neurons() <= 4);
    for (const auto& neg : inst.negatives) {
      CHECK(neg.size() >= 1);
      CHECK(neg.size() <= 3);
    }
  }
}

TEST_CASE("verification: gradient oracle passes and catches an injected fault") {
  const CheckResult ok = CheckGradientOracle(0, 20);
  CHECK(ok.passed);
  CHECK(ok.value <= 1e-5);
  const CheckResult bad = CheckGradientOracle(0, 20, 1e-5, 1e-3);
  CHECK(!bad.passed);
}

TEST_CASE("verification: series helpers") {
  const std::vector<double> s{0.0, 0.2, 0.5, 1.1, 1.0};
  CHECK(FirstCrossing(s, 1.0) == 3u);
  CHECK(!FirstCrossing(s, 2.0));
  CHECK(StrictlyIncreasingUntil(s, 3));
  CHECK(!StrictlyIncreasingUntil(s, 4));
  CHECK(!StrictlyIncreasingUntil({0.0, 0.0, 1.0}, 2));
}

TEST_CASE("verification: lemma statistics on hand-made histories") {
  CoefficientHistory h;
  EncoderWeights w0{Eigen::MatrixXd(2, 2)};
  w0.w << 1.0, 0.0, -1.0, 0.0;
  const Eigen::VectorXd mu = Eigen::Vector2d(1.0, 0.0);
  for (double t : {0.0, 1.0, 2.0, 1.5}) {
    h.gamma.push_back(Eigen::Vector2d(t, -t));
    h.rho.push_back(Eigen::MatrixXd::Constant(2, 2, 0.0));
  }
  // Steps 1 and 2 follow the sign, step 3 reverses for both neurons.
  CHECK(SignInvarianceFraction(h, w0, mu) == doctest::Approx(4.0 / 6.0));

  Eigen::MatrixXd init(2, 2);
  init << -1.0, 1.0, -1.0, -1.0;
  h.rho[2](1, 1) = 0.5;
  CHECK(ZeroRhoFraction(h, init) == doctest::Approx(2.0 / 3.0));
  h.rho_tilde = h.rho;
  CHECK(BothNegativeZeroFraction(h, init, init, 1) == doctest::Approx(1.0));
  CHECK(BothNegativeZeroFraction(h, init, init, 3) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("verification: recording hooks capture every step") {
  TrainConfig cfg = SmallConfig(Mode::kMulti);
  cfg.epochs = 6;
  CoefficientHistory h;
  const RunResult r = Train(cfg, RecordingHooks(h));
  CHECK(h.steps() == 7);
  CHECK(h.gamma.front().norm() == 0.0);
  CHECK(h.gamma.back() == r.ledger.gamma);
  CHECK(h.rho_tilde.back() == *r.ledger.rho_tilde);
  CHECK(DominantSeries(h, Mode::kMulti).back() == r.ledger.gamma.maxCoeff());
  CHECK(DominantSeries(h, Mode::kSingle).back() == r.ledger.rho.maxCoeff());
}

TEST_CASE("verification: full report on a small configuration") {
  TrainConfig cfg = SmallConfig(Mode::kSingle);
  VerifyOptions opts;
  opts.gradient_instances = 3;
  const VerifyReport rep = RunVerification(cfg, opts);
  CHECK(rep.checks.size() == 11);
  CHECK(rep.Get("gradient_finite_difference").passed);
  CHECK(rep.Get("ledger_vs_projection").passed);
  CHECK(rep.Get("gradient_span_residual").passed);
  CHECK(rep.Get("softmax_normalization").passed);
  CHECK(!rep.warnings.empty());  // d = 200 < n / (sigma0 sigma_xi)
  CHECK_THROWS(rep.Get("nope"));
}

}  // TEST_SUITE
