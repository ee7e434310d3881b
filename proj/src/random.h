// Copyright 2026 The WMVoc Authors.
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

#ifndef WMVOC_RANDOM_H_
#define WMVOC_RANDOM_H_

#include <cstdint>
#include <random>

namespace wmvoc {

// Seeded generator with platform-independent draws. std::*_distribution is
// implementation-defined, so uniform and normal variates are derived here
// directly from the 64-bit Mersenne Twister stream.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1) with 53 random bits.
  double Uniform();
  // Uniform on (0, 1).
  double UniformOpen();
  // Standard normal via Box-Muller (one draw per call, pair cached).
  double Normal();
  // Uniform integer in [0, n).
  uint64_t Below(uint64_t n);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace wmvoc

#endif  // WMVOC_RANDOM_H_
