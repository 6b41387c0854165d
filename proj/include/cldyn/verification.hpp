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

#ifndef CLDYN_VERIFICATION_HPP_
#define CLDYN_VERIFICATION_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cldyn/trainer.hpp"

namespace cldyn {

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string detail;
};

// A small random instance for gradient checks.
struct GradientInstance {
  Dataset data;
  NegativeSets negatives;
  EncoderWeights w;
  EncoderWeights w_tilde;
  double tau = 1.0;
};

// d in [4, 16], n in [4, 6], m in [2, 4], M in [1, 3], O(1) weights.
GradientInstance RandomGradientInstance(std::uint64_t seed);

// Central-difference gradient of the stop-gradient surrogate with respect to
// the live weights (frozen weights held at the evaluation point).
Eigen::MatrixXd FiniteDifferenceSingle(const GradientInstance& inst,
                                       double step = 1e-5);
// first: d/dW, second: d/dW~
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> FiniteDifferenceMulti(
    const GradientInstance& inst, double step = 1e-5);

// |a - b|_F / max(|b|_F, tiny)
double RelativeError(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

// Worst relative error of the analytic gradients (both modes) over
// `instances` random instances. `fault` is added to entry (0, 0) of every
// analytic gradient before comparison (fault-injection hook).
CheckResult CheckGradientOracle(std::uint64_t seed, int instances,
                                double tolerance = 1e-5, double fault = 0.0);

// Per-step coefficient trajectory, filled through TrainHooks::on_step.
struct CoefficientHistory {
  std::vector<Eigen::VectorXd> gamma;
  std::vector<Eigen::MatrixXd> rho;
  std::vector<Eigen::VectorXd> gamma_tilde;
  std::vector<Eigen::MatrixXd> rho_tilde;

  void Record(const CoefficientLedger& ledger);
  std::size_t steps() const { return gamma.size(); }
};

TrainHooks RecordingHooks(CoefficientHistory& history);

// Fraction of (r, t), t >= 1, where s_r gamma_r(t) >= 0 and
// s_r (gamma_r(t) - gamma_r(t-1)) >= 0 with s_r = sign <w_r(0), mu>.
double SignInvarianceFraction(const CoefficientHistory& history,
                              const EncoderWeights& w0, const Eigen::VectorXd& mu);

// Fraction of pairs with <w_r(0), xi_i> < 0 whose |rho_ri| stays <= tol over
// the whole history.
double ZeroRhoFraction(const CoefficientHistory& history,
                       const Eigen::MatrixXd& init_inner, double tol = 1e-12);

// Fraction of pairs negative in both modalities whose rho and rho~ stay
// <= tol for steps 0..last_step.
double BothNegativeZeroFraction(const CoefficientHistory& history,
                                const Eigen::MatrixXd& init_inner,
                                const Eigen::MatrixXd& init_inner_tilde,
                                std::size_t last_step, double tol = 1e-12);

// Dominant coefficient per step: max rho (single) or max gamma (multi).
std::vector<double> DominantSeries(const CoefficientHistory& history, Mode mode);

// First step whose dominant coefficient reaches the threshold.
std::optional<std::size_t> FirstCrossing(const std::vector<double>& series,
                                         double threshold);

// Strictly increasing on steps 0..boundary.
bool StrictlyIncreasingUntil(const std::vector<double>& series,
                             std::size_t boundary);

struct VerifyOptions {
  std::uint64_t seed = 0;
  int gradient_instances = 20;
  double gradient_fault = 0.0;
  double sign_fraction = 0.99;
  double zero_rho_fraction = 0.95;
  double scale_ratio = 3.0;
};

struct VerifyReport {
  std::vector<std::string> warnings;
  std::vector<CheckResult> checks;
  std::optional<RunResult> single_run;
  std::optional<RunResult> multi_run;

  bool AllPassed() const;
  const CheckResult& Get(const std::string& name) const;
};

// Trains both modes on `base` (mode field ignored) with per-step logging and
// evaluates the lemma suite plus the gradient, ledger and softmax checks.
VerifyReport RunVerification(const TrainConfig& base, const VerifyOptions& opts);

}  // namespace cldyn

#endif  // CLDYN_VERIFICATION_HPP_
