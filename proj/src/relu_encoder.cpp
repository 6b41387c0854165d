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

#include "cldyn/relu_encoder.hpp"

#include <istream>
#include <ostream>
#include <string>

#include "cldyn/format.hpp"

namespace cldyn {
namespace {

void RequireDim(const EncoderWeights& enc, Eigen::Index len) {
  if (len != enc.w.cols()) {
    throw DimensionError("patch has dimension " + std::to_string(len) +
                         ", encoder expects " + std::to_string(enc.w.cols()));
  }
}

}  // namespace

EncoderWeights InitWeights(std::size_t m, std::size_t d, double sigma0,
                           Rng& rng) {
  EncoderWeights enc;
  enc.w.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(d));
  for (Eigen::Index r = 0; r < enc.w.rows(); ++r) {
    for (Eigen::Index k = 0; k < enc.w.cols(); ++k) {
      enc.w(r, k) = sigma0 * rng.Normal();
    }
  }
  return enc;
}

Eigen::VectorXd PatchFeature(const EncoderWeights& enc,
                             const Eigen::Ref<const Eigen::VectorXd>& v) {
  RequireDim(enc, v.size());
  return (enc.w * v).cwiseMax(0.0);
}

Eigen::VectorXd Embed(const EncoderWeights& enc, const PatchPair& x) {
  return PatchFeature(enc, x.first) + PatchFeature(enc, x.second);
}

double SimValue(const EncoderWeights& left, const EncoderWeights& right,
                const PatchPair& a, const PatchPair& b) {
  if (left.neurons() != right.neurons()) {
    throw DimensionError("encoders have different neuron counts");
  }
  const double m = static_cast<double>(left.neurons());
  return (PatchFeature(left, a.first).dot(PatchFeature(right, b.first)) +
          PatchFeature(left, a.second).dot(PatchFeature(right, b.second))) /
         m;
}

Eigen::MatrixXd PreActivations(const EncoderWeights& enc,
                               const Eigen::Ref<const Eigen::MatrixXd>& patches) {
  RequireDim(enc, patches.cols());
  return patches * enc.w.transpose();
}

void WriteCheckpoint(std::ostream& out, const EncoderWeights& enc,
                     std::size_t step) {
  out << "cldyn-weights " << enc.neurons() << ' ' << enc.dim() << ' ' << step
      << '\n';
  for (Eigen::Index r = 0; r < enc.w.rows(); ++r) {
    for (Eigen::Index k = 0; k < enc.w.cols(); ++k) {
      if (k) out << ' ';
      out << FormatDouble(enc.w(r, k));
    }
    out << '\n';
  }
}

EncoderWeights ReadCheckpoint(std::istream& in, std::size_t* step) {
  std::string magic;
  std::size_t m = 0, d = 0, s = 0;
  if (!(in >> magic >> m >> d >> s) || magic != "cldyn-weights") {
    throw std::runtime_error("not a cldyn weight checkpoint");
  }
  EncoderWeights enc;
  enc.w.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(d));
  for (Eigen::Index r = 0; r < enc.w.rows(); ++r) {
    for (Eigen::Index k = 0; k < enc.w.cols(); ++k) {
      std::string tok;
      if (!(in >> tok)) throw std::runtime_error("truncated weight checkpoint");
      enc.w(r, k) = ParseDouble(tok);
    }
  }
  if (step) *step = s;
  return enc;
}

}  // namespace cldyn
