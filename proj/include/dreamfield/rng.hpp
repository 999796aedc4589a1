// Copyright 2026 The Dreamfield Authors
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

#pragma once

#include <array>
#include <cstdint>
#include <optional>

namespace dreamfield {

/// Philox4x32-10 counter-based block cipher (Salmon et al., SC'11).
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter counter, Key key);
};

/// Independent purposes drawn from within one iteration. Each tag yields its
/// own stream so that, e.g., changing the background recipe never shifts the
/// pose sequence.
enum class StreamTag : std::uint32_t {
  kInit = 1,
  kBasis = 2,
  kPose = 3,
  kBackground = 4,
  kCrop = 5,
  kJitter = 6,
  kPerturb = 7,
  kView = 8,
  kScene = 9,
  kTest = 255,
};

/// Random stream keyed by (seed, iteration, tag). Two streams with the same
/// key produce the same sequence; the stream at iteration k does not depend on
/// anything drawn before it, so runs can resume at any iteration.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t iteration, StreamTag tag);

  std::uint32_t next_u32();
  std::uint64_t next_u64();

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller.
  double normal();

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_index(std::uint64_t n);

 private:
  void refill();

  Philox4x32::Key key_{};
  Philox4x32::Counter counter_{};
  Philox4x32::Counter buffer_{};
  int used_ = 4;
  std::optional<double> spare_normal_;
};

}  // namespace dreamfield
