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

#include <sstream>

#include "cldyn/relu_encoder.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace cldyn;

namespace {

EncoderWeights OneNeuron(std::size_t d) {
  EncoderWeights enc;
  enc.w = Eigen::MatrixXd::Zero(1, static_cast<Eigen::Index>(d));
  enc.w(0, 0) = 1.0;
  return enc;
}

Eigen::VectorXd RandomVector(std::size_t d, Rng& rng) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(d));
  for (Eigen::Index k = 0; k < v.size(); ++k) v(k) = rng.Normal();
  return v;
}

}  // namespace

TEST_SUITE("relu_encoder") {

TEST_CASE("relu_encoder: init") {
  Rng rng(0);
  CHECK(InitWeights(3, 5, 0.0, rng).w.norm() == 0.0);
  Rng a(4), b(4);
  const EncoderWeights x = InitWeights(50, 2000, 0.01, a);
  CHECK(x.neurons() == 50);
  CHECK(x.dim() == 2000);
  CHECK(x.w == InitWeights(50, 2000, 0.01, b).w);
  const double sd = std::sqrt(x.w.squaredNorm() / static_cast<double>(x.w.size()));
  CHECK(sd == doctest::Approx(0.01).epsilon(0.02));
}

TEST_CASE("relu_encoder: one-neuron hand computations") {
  const EncoderWeights enc = OneNeuron(4);
  CHECK(PatchFeature(enc, UnitScaled(4, 0, 5.0))(0) == 5.0);
  CHECK(PatchFeature(enc, UnitScaled(4, 0, -5.0))(0) == 0.0);
  CHECK(Embed(enc, {UnitScaled(4, 0, 5.0), UnitScaled(4, 0, -1.0)})(0) == 5.0);
  const PatchPair a{UnitScaled(4, 0, 5.0), Eigen::VectorXd::Zero(4)};
  CHECK(SimValue(enc, enc, a, a) == 25.0);
}

TEST_CASE("relu_encoder: zero weights") {
  EncoderWeights enc;
  enc.w = Eigen::MatrixXd::Zero(3, 4);
  Rng rng(1);
  const PatchPair a{RandomVector(4, rng), RandomVector(4, rng)};
  CHECK(Embed(enc, a).norm() == 0.0);
  CHECK(SimValue(enc, enc, a, a) == 0.0);
}

TEST_CASE("relu_encoder: features match a brute-force loop") {
  Rng rng(2);
  const EncoderWeights enc = InitWeights(6, 9, 1.0, rng);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::VectorXd v = RandomVector(9, rng);
    const Eigen::VectorXd f = PatchFeature(enc, v);
    for (std::size_t r = 0; r < 6; ++r) {
      CHECK(f(static_cast<Eigen::Index>(r)) ==
            doctest::Approx(oracle::Feature(enc.w, r, v)).epsilon(1e-14));
      CHECK(f(static_cast<Eigen::Index>(r)) >= 0.0);
    }
    const Eigen::VectorXd u = RandomVector(9, rng);
    CHECK((Embed(enc, {v, u}) - PatchFeature(enc, v) - PatchFeature(enc, u)).norm() <
          1e-12);
  }
}

TEST_CASE("relu_encoder: similarity symmetry and homogeneity") {
  Rng rng(3);
  const EncoderWeights enc = InitWeights(5, 7, 1.0, rng);
  const EncoderWeights other = InitWeights(5, 7, 1.0, rng);
  for (int trial = 0; trial < 10; ++trial) {
    const PatchPair a{RandomVector(7, rng), RandomVector(7, rng)};
    const PatchPair b{RandomVector(7, rng), RandomVector(7, rng)};
    CHECK(SimValue(enc, enc, a, b) == doctest::Approx(SimValue(enc, enc, b, a)));
    CHECK(SimValue(enc, other, a, b) ==
          doctest::Approx(oracle::Sim(enc.w, other.w, a.first, a.second, b.first,
                                      b.second)));
    const double c = 0.5 + rng.Uniform() * 3.0;
    CHECK((PatchFeature(enc, c * a.first) - c * PatchFeature(enc, a.first)).norm() <
          1e-12);
  }
}

TEST_CASE("relu_encoder: dimension mismatch") {
  const EncoderWeights enc = OneNeuron(4);
  CHECK_THROWS_AS(PatchFeature(enc, Eigen::VectorXd::Zero(3)), DimensionError);
  CHECK_THROWS_AS(Embed(enc, {Eigen::VectorXd::Zero(4), Eigen::VectorXd::Zero(5)}),
                  DimensionError);
  const EncoderWeights wide = OneNeuron(5);
  const PatchPair a{Eigen::VectorXd::Zero(4), Eigen::VectorXd::Zero(4)};
  CHECK_THROWS_AS(SimValue(enc, wide, a, a), DimensionError);
}

TEST_CASE("relu_encoder: relu gate is zero at zero") {
  Eigen::MatrixXd pre(1, 3);
  pre << -1.0, 0.0, 2.0;
  const Eigen::MatrixXd gate = ReluGate(pre);
  CHECK(gate(0, 0) == 0.0);
  CHECK(gate(0, 1) == 0.0);
  CHECK(gate(0, 2) == 1.0);
}

TEST_CASE("relu_encoder: checkpoint round trip") {
  Rng rng(5);
  const EncoderWeights enc = InitWeights(4, 6, 0.3, rng);
  std::stringstream ss;
  WriteCheckpoint(ss, enc, 17);
  std::size_t step = 0;
  const EncoderWeights back = ReadCheckpoint(ss, &step);
  CHECK(step == 17);
  CHECK(back.w == enc.w);
  std::stringstream bad("not-a-checkpoint 1 1 0\n");
  CHECK_THROWS(ReadCheckpoint(bad));
}

}  // TEST_SUITE
