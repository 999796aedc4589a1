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

#include "dreamfield/encoding.hpp"
#include "dreamfield/field.hpp"
#include "dreamfield/optimize.hpp"

#include <filesystem>
#include <optional>
#include <string>

namespace dreamfield {

/// Everything needed to resume a run or render its result.
struct Checkpoint {
  FieldParams<float> params;
  OptimState<float> optim;
  FourierBasis<float> basis;
  OriginTracker<float> tracker;
  /// Iterations completed.
  long iteration = 0;
  /// Resolved run configuration as a JSON document. Saved compacted onto the
  /// header line.
  std::string config_json = "{}";
};

inline constexpr const char* kCheckpointMagic = "DREAMFIELD-CKPT";
inline constexpr int kCheckpointVersion = 1;

/// Layout:
///   line 1   "DREAMFIELD-CKPT 1"
///   line 2   one-line JSON header: counters, architecture, configuration and a
///            tensor table of {name, shape, dtype, offset}
///   rest     float32 little-endian tensor data, row-major, at the offsets
/// The file is written to a temporary name and renamed into place.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);

/// Throws FormatError on a missing or truncated file or an unknown version, and
/// ShapeMismatchError when the tensor table disagrees with the declared (or
/// `expected`) architecture.
Checkpoint load_checkpoint(const std::filesystem::path& path,
                           const std::optional<FieldArch>& expected = std::nullopt);

}  // namespace dreamfield
