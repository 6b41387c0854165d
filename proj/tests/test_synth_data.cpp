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

#include <algorithm>
#include <cmath>
#include <set>

#include "cldyn/synth_data.hpp"
#include "doctest.h"

using namespace cldyn;

namespace {

DataConfig Small(std::size_t d, std::size_t n) {
  DataConfig cfg;
  cfg.d = cfg.d_tilde = d;
  cfg.n = n;
  cfg.mu = UnitScaled(d, 0, 5.0);
  cfg.mu_tilde = UnitScaled(d, 1, 15.0);
  cfg.nu = UnitScaled(d, 0, 2.0);
  cfg.n_probe = cfg.n_eval = 10;
  return cfg;
}

Dataset Labelled(std::vector<int> labels) {
  Dataset data;
  data.labels = std::move(labels);
  data.mu = Eigen::VectorXd::Ones(3);
  return data;
}

}  // namespace

TEST_SUITE("synth_data") {

TEST_CASE("synth_data: figure1 preset values") {
  const DataConfig cfg = Figure1Data();
  CHECK(cfg.d == 2000);
  CHECK(cfg.n == 100);
  CHECK(cfg.mu.norm() == 5.0);
  CHECK(cfg.mu(0) == 5.0);
  CHECK(cfg.mu_tilde(1) == 15.0);
  CHECK(cfg.sigma_eps == 0.1);
  CHECK(cfg.nu(0) == 2.0);
  CHECK(cfg.nu.norm() == 2.0);
  CHECK(cfg.n_probe + cfg.n_eval == 200);
}

TEST_CASE("synth_data: theory preset satisfies d >= n^2") {
  const DataConfig cfg = TheoryData();
  CHECK(cfg.n == 20);
  CHECK(cfg.d == 4000);
  CHECK(cfg.d >= cfg.n * cfg.n);
  cfg.Validate();
}

TEST_CASE("synth_data: generated set has the right shapes and signal") {
  const DataConfig cfg = Small(30, 12);
  Rng rng(1);
  const Dataset data = GenTrain(cfg, rng);
  CHECK(data.size() == 12);
  CHECK(data.noise1.rows() == 12);
  CHECK(data.noise1.cols() == 30);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const PairedSample s = data.Sample(i);
    REQUIRE((s.y == 1 || s.y == -1));
    CHECK((s.signal1 - s.y * cfg.mu).norm() == 0.0);
    CHECK((s.signal2 - s.y * cfg.mu_tilde).norm() == 0.0);
    CHECK((s.Positive().first - s.signal1).norm() == 0.0);
    CHECK((s.Positive().second - (s.noise1 + s.aug_noise)).norm() == 0.0);
  }
}

TEST_CASE("synth_data: zero noise gives [y mu; 0] and positive equals anchor") {
  DataConfig cfg = Small(8, 6);
  cfg.sigma_xi = cfg.sigma_xi_tilde = cfg.sigma_eps = 0.0;
  Rng rng(2);
  const Dataset data = GenTrain(cfg, rng);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const PairedSample s = data.Sample(i);
    CHECK(s.noise1.norm() == 0.0);
    CHECK((s.Positive().second - s.Modality1().second).norm() == 0.0);
  }
}

TEST_CASE("synth_data: same seed gives identical datasets") {
  const DataConfig cfg = Small(20, 10);
  Rng a(9), b(9);
  const Dataset x = GenTrain(cfg, a);
  const Dataset y = GenTrain(cfg, b);
  CHECK(x.labels == y.labels);
  CHECK(x.noise1 == y.noise1);
  CHECK(x.noise2 == y.noise2);
  CHECK(x.aug_noise == y.aug_noise);
}

TEST_CASE("synth_data: noise moments") {
  DataConfig cfg = Small(400, 50);
  cfg.sigma_xi = 2.0;
  cfg.sigma_eps = 0.1;
  Rng rng(4);
  const Dataset data = GenTrain(cfg, rng);
  const double var = data.noise1.squaredNorm() / static_cast<double>(data.noise1.size());
  CHECK(var == doctest::Approx(4.0).epsilon(0.03));
  const double aug = data.aug_noise.squaredNorm() / static_cast<double>(data.aug_noise.size());
  CHECK(aug == doctest::Approx(0.01).epsilon(0.03));
}

TEST_CASE("synth_data: invalid configs are rejected") {
  DataConfig cfg = Small(8, 6);
  cfg.n = 1;
  CHECK_THROWS_AS(cfg.Validate(), ConfigError);
  cfg = Small(8, 6);
  cfg.mu = Eigen::VectorXd::Zero(7);
  CHECK_THROWS_AS(cfg.Validate(), ConfigError);
  cfg = Small(8, 6);
  cfg.sigma_xi = -1.0;
  CHECK_THROWS_AS(cfg.Validate(), ConfigError);
  cfg = Small(8, 6);
  cfg.d = 0;
  CHECK_THROWS_AS(cfg.Validate(), ConfigError);
  Rng rng(0);
  cfg = Small(8, 6);
  cfg.nu = Eigen::VectorXd::Zero(3);
  CHECK_THROWS_AS(GenTrain(cfg, rng), ConfigError);
}

TEST_CASE("synth_data: all opposite-label indices when M equals the count") {
  const Dataset data = Labelled({1, -1, 1, -1});
  Rng rng(0);
  const auto neg = NegativesFor(0, data, 2, rng);
  CHECK(neg == std::vector<std::size_t>{1, 3});
  CHECK_THROWS_AS(NegativesFor(0, data, 3, rng), ConfigError);
}

TEST_CASE("synth_data: sampled negatives are distinct and opposite-label") {
  const Dataset data = Labelled({1, -1, -1, 1, -1, -1, 1, -1, -1});
  Rng rng(5);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto neg = NegativesFor(i, data, 2, rng);
    CHECK(neg.size() == 2);
    CHECK(std::set<std::size_t>(neg.begin(), neg.end()).size() == 2);
    for (std::size_t j : neg) CHECK(data.labels[j] == -data.labels[i]);
  }
  Rng a(11), b(11);
  CHECK(BuildNegatives(data, NegativePolicy::Fixed(2), a) ==
        BuildNegatives(data, NegativePolicy::Fixed(2), b));
}

TEST_CASE("synth_data: figure1 all-opposite policy gives about n/2 negatives") {
  const DataConfig cfg = Figure1Data();
  Rng rng(0);
  const Dataset data = GenTrain(cfg, rng);
  const NegativeSets negs = BuildNegatives(data, NegativePolicy::All(), rng);
  std::size_t pos = 0;
  for (int y : data.labels) pos += y == 1;
  for (std::size_t i = 0; i < data.size(); ++i) {
    CHECK(negs[i].size() == (data.labels[i] == 1 ? data.size() - pos : pos));
  }
  const auto diag = Diagnose(cfg, data);
  CHECK(diag.noise_norm_violations == 0);
  CHECK(diag.positives == pos);
}

TEST_CASE("synth_data: test splits") {
  DataConfig cfg = Small(16, 6);
  Rng a(3), b(3);
  const TestSplits s = GenTest(cfg, a);
  const TestSplits t = GenTest(cfg, b);
  CHECK(s.probe.size() == 10);
  CHECK(s.eval.size() == 10);
  CHECK(s.probe.noise == t.probe.noise);
  CHECK(s.eval.labels == t.eval.labels);
  std::set<std::size_t> ids(s.probe.ids.begin(), s.probe.ids.end());
  for (std::size_t id : s.eval.ids) CHECK(ids.count(id) == 0);
  for (std::size_t i = 0; i < s.probe.size(); ++i) {
    const TestSample x = s.probe.Sample(i);
    CHECK((x.signal - x.y * cfg.nu).norm() == 0.0);
  }
}

TEST_CASE("synth_data: zero test noise gives samples equal to y nu") {
  DataConfig cfg = Small(16, 6);
  cfg.sigma_zeta = 0.0;
  Rng rng(1);
  const TestSplits s = GenTest(cfg, rng);
  for (std::size_t i = 0; i < s.eval.size(); ++i) {
    const TestSample x = s.eval.Sample(i);
    CHECK(x.noise.norm() == 0.0);
    if (x.y == 1) CHECK((x.signal - cfg.nu).norm() == 0.0);
  }
}

}  // TEST_SUITE
