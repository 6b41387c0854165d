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

#ifndef CLDYN_RNG_HPP_
#define CLDYN_RNG_HPP_

#include <cstddef>
#include <cstdint>
#include <random>

namespace cldyn {

// Independent random streams derived from one run seed.
enum class Stream : std::uint64_t {
  kTrainData = 1,
  kNegatives = 2,
  kTestData = 3,
  kWeights = 4,
  kWeightsTilde = 5,
  kScratch = 6,
};

// Seeded generator whose output is identical on every conforming C++
// toolchain. The engine is std::mt19937_64 (bit-exact by the standard);
// uniforms take the top 53 bits of one draw; normals use the Marsaglia
// polar method with the spare value cached. std::*_distribution is avoided
// because its algorithms are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Seeds a generator for `stream` of run `seed` (SplitMix64 mixing).
  static Rng ForStream(std::uint64_t seed, Stream stream);

  // Uniform on [0, 1).
  double Uniform();

  // Standard normal.
  double Normal();

  // +1 or -1 with equal probability.
  int Rademacher();

  // Uniform on {0, ..., n - 1} by rejection; n must be positive.
  std::size_t Index(std::size_t n);

  std::uint64_t NextBits() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t SplitMix64(std::uint64_t x);

}  // namespace cldyn

#endif  // CLDYN_RNG_HPP_
