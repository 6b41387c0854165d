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

#ifndef CLDYN_RELU_ENCODER_HPP_
#define CLDYN_RELU_ENCODER_HPP_

#include <cstddef>
#include <iosfwd>
#include <stdexcept>

#include <Eigen/Dense>

#include "cldyn/rng.hpp"
#include "cldyn/synth_data.hpp"

namespace cldyn {

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// One bias-free ReLU layer; row r of `w` is the weight vector of neuron r.
struct EncoderWeights {
  Eigen::MatrixXd w;

  std::size_t neurons() const { return static_cast<std::size_t>(w.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(w.cols()); }
  bool AllFinite() const { return w.allFinite(); }
};

// Entries i.i.d. N(0, sigma0^2), drawn row-major.
EncoderWeights InitWeights(std::size_t m, std::size_t d, double sigma0,
                           Rng& rng);

// h_r(v) = max(0, <w_r, v>) for every neuron.
Eigen::VectorXd PatchFeature(const EncoderWeights& enc,
                             const Eigen::Ref<const Eigen::VectorXd>& v);

// Sum of the features of the two patches.
Eigen::VectorXd Embed(const EncoderWeights& enc, const PatchPair& x);

// (1/m) [<f_left(a1), f_right(b1)> + <f_left(a2), f_right(b2)>]. Patchwise,
// not the inner product of summed embeddings.
double SimValue(const EncoderWeights& left, const EncoderWeights& right,
                const PatchPair& a, const PatchPair& b);

// Batched pre-activations: rows of `patches` against every neuron, n x m.
Eigen::MatrixXd PreActivations(const EncoderWeights& enc,
                               const Eigen::Ref<const Eigen::MatrixXd>& patches);

inline Eigen::MatrixXd Relu(const Eigen::MatrixXd& pre) {
  return pre.cwiseMax(0.0);
}

// ReLU derivative with sigma'(0) = 0.
inline Eigen::MatrixXd ReluGate(const Eigen::MatrixXd& pre) {
  return (pre.array() > 0.0).cast<double>().matrix();
}

// Text checkpoint:
//   line 1: "cldyn-weights <m> <d> <step>"
//   then m lines of d space-separated shortest round-trip doubles.
void WriteCheckpoint(std::ostream& out, const EncoderWeights& enc,
                     std::size_t step);
EncoderWeights ReadCheckpoint(std::istream& in, std::size_t* step = nullptr);

}  // namespace cldyn

#endif  // CLDYN_RELU_ENCODER_HPP_
