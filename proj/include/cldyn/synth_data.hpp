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

#ifndef CLDYN_SYNTH_DATA_HPP_
#define CLDYN_SYNTH_DATA_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cldyn/rng.hpp"

namespace cldyn {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Generative model for both modalities and the shifted test distribution.
// Modality 1 samples are [y*mu ; xi], modality 2 samples [y*mu_tilde ; xi~],
// the augmented positive is [y*mu ; xi + eps], test samples [y*nu ; zeta].
struct DataConfig {
  std::size_t d = 2000;
  std::size_t d_tilde = 2000;
  std::size_t n = 100;
  Eigen::VectorXd mu;
  Eigen::VectorXd mu_tilde;
  double sigma_xi = 1.0;
  double sigma_xi_tilde = 1.0;
  double sigma_eps = 0.1;
  Eigen::VectorXd nu;
  double sigma_zeta = 1.0;
  std::size_t n_probe = 100;
  std::size_t n_eval = 100;
  std::uint64_t seed = 0;

  // Throws ConfigError on the first violated constraint.
  void Validate() const;
};

// Vector of length `dim` that is zero except for entry `index`.
Eigen::VectorXd UnitScaled(std::size_t dim, std::size_t index, double value);

DataConfig Figure1Data();
DataConfig TheoryData();

struct PatchPair {
  Eigen::VectorXd first;
  Eigen::VectorXd second;
};

struct PairedSample {
  int y = 1;
  Eigen::VectorXd signal1;
  Eigen::VectorXd noise1;
  Eigen::VectorXd signal2;
  Eigen::VectorXd noise2;
  Eigen::VectorXd aug_noise;

  PatchPair Modality1() const { return {signal1, noise1}; }
  PatchPair Modality2() const { return {signal2, noise2}; }
  // Same signal patch, noise patch corrupted by the augmentation noise.
  PatchPair Positive() const { return {signal1, noise1 + aug_noise}; }
};

// Training set with every noise draw stored explicitly (row i of each matrix
// belongs to sample i) so that the noise vectors can serve as a basis.
struct Dataset {
  std::vector<int> labels;
  Eigen::VectorXd mu;
  Eigen::VectorXd mu_tilde;
  Eigen::MatrixXd noise1;     // n x d
  Eigen::MatrixXd noise2;     // n x d_tilde
  Eigen::MatrixXd aug_noise;  // n x d

  std::size_t size() const { return labels.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(mu.size()); }
  std::size_t dim_tilde() const {
    return static_cast<std::size_t>(mu_tilde.size());
  }
  PairedSample Sample(std::size_t i) const;
};

Dataset GenTrain(const DataConfig& cfg, Rng& rng);

// How many opposite-label negatives each anchor uses. An empty count means
// every opposite-label sample.
struct NegativePolicy {
  std::optional<std::size_t> count;

  static NegativePolicy All() { return {}; }
  static NegativePolicy Fixed(std::size_t m) { return {m}; }
  std::string ToString() const;
};

using NegativeSets = std::vector<std::vector<std::size_t>>;

// M distinct indices j with y_j != y_i. When M equals the number of
// opposite-label samples they are returned in ascending order without
// touching the generator; otherwise they are drawn without replacement.
std::vector<std::size_t> NegativesFor(std::size_t i, const Dataset& data,
                                      std::size_t count, Rng& rng);

NegativeSets BuildNegatives(const Dataset& data, const NegativePolicy& policy,
                            Rng& rng);

struct TestSample {
  int y = 1;
  Eigen::VectorXd signal;
  Eigen::VectorXd noise;
};

struct TestSet {
  std::vector<int> labels;
  Eigen::MatrixXd signal;  // rows y * nu
  Eigen::MatrixXd noise;   // rows zeta
  std::vector<std::size_t> ids;  // global draw index, unique across splits

  std::size_t size() const { return labels.size(); }
  TestSample Sample(std::size_t i) const;
};

struct TestSplits {
  TestSet probe;
  TestSet eval;
};

TestSplits GenTest(const DataConfig& cfg, Rng& rng);

struct DataDiagnostics {
  std::size_t noise_norm_violations = 0;  // ||xi_i||^2 outside [s^2 d/2, 3 s^2 d/2]
  std::size_t positives = 0;
  double label_imbalance = 0.0;  // |#{y=1} - n/2|
  double label_bound = 0.0;      // sqrt(n log(8) / 2)
  bool label_balance_ok = true;
};

DataDiagnostics Diagnose(const DataConfig& cfg, const Dataset& data);

}  // namespace cldyn

#endif  // CLDYN_SYNTH_DATA_HPP_
