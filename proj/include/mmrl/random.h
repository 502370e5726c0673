// Copyright 2026 The mmrl Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MMRL_RANDOM_H_
#define MMRL_RANDOM_H_

#include <cstdint>
#include <random>
#include <string_view>

namespace mmrl {

// Derives an independent seed from a parent seed and a label. Adding a new
// label never changes the streams produced for existing labels.
std::uint64_t DeriveSeed(std::uint64_t parent, std::string_view label);
std::uint64_t DeriveSeed(std::uint64_t parent, std::string_view label,
                         std::uint64_t index);

// Seeded generator with distribution routines that produce identical values
// on every platform. The <random> distributions are implementation-defined,
// so only the raw engine is borrowed from the standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1) with 53 bits of precision.
  double Uniform();
  // Uniform integer on the closed range [lo, hi].
  std::int64_t UniformInt(std::int64_t lo, std::int64_t hi);
  double Normal();
  double LogNormal(double mu, double sigma);
  bool Bernoulli(double p) { return Uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace mmrl

#endif  // MMRL_RANDOM_H_
