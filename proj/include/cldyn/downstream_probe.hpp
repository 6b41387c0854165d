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

#ifndef CLDYN_DOWNSTREAM_PROBE_HPP_
#define CLDYN_DOWNSTREAM_PROBE_HPP_

#include <cstddef>
#include <span>

#include <Eigen/Dense>

#include "cldyn/relu_encoder.hpp"
#include "cldyn/synth_data.hpp"

namespace cldyn {

// f(x) = <w, x> + b
struct LinearHead {
  Eigen::VectorXd w;
  double b = 0.0;
};

struct ProbeOptions {
  double lambda = 1e-4;       // L2 on w (bias unregularized)
  double grad_tol = 1e-6;
  std::size_t max_iter = 10000;
};

// L2-regularized logistic regression by full-batch gradient descent from a
// zero start with step 1/L (L the smoothness constant of the objective).
// Throws ConfigError if fewer than two rows or only one class is present.
LinearHead FitProbe(const Eigen::MatrixXd& features, std::span<const int> labels,
                    const ProbeOptions& opts = {});

struct ProbeScore {
  double error = 0.0;
  double accuracy = 0.0;
};

// 0-1 error with ties (f = 0) counted as errors.
ProbeScore Eval01(const LinearHead& head, const Eigen::MatrixXd& features,
                  std::span<const int> labels);

// Rows are embeddings h(y nu) + h(zeta) of the test samples.
Eigen::MatrixXd TestEmbeddings(const EncoderWeights& enc, const TestSet& set);

// Fit on the probe split, score on the eval split. Throws std::logic_error
// if the two splits share a sample id.
ProbeScore ProbeAccuracy(const EncoderWeights& enc, const TestSplits& splits,
                         const ProbeOptions& opts = {});

}  // namespace cldyn

#endif  // CLDYN_DOWNSTREAM_PROBE_HPP_
