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

#include "dreamfield/augment.hpp"
#include "dreamfield/field.hpp"
#include "dreamfield/geometry.hpp"
#include "dreamfield/objective.hpp"
#include "dreamfield/optimize.hpp"

#include <cstdint>
#include <string>
#include <string_view>

namespace dreamfield {

enum class ScorerKind { kPhotometric, kRemote };
ScorerKind parse_scorer_kind(std::string_view name);
std::string to_string(ScorerKind kind);

/// Random augmentation backgrounds, or constant white.
enum class BackgroundMode { kRandom, kWhite };
BackgroundMode parse_background_mode(std::string_view name);
std::string to_string(BackgroundMode mode);

/// Every hyperparameter of one optimization run. Angles are radians in
/// memory and degrees in JSON.
struct RunConfig {
  std::string prompt;
  std::uint64_t seed = 0;
  long iterations = 10000;
  int train_resolution = 168;
  int crop_size = 154;
  int samples = 192;
  SparsityConfig sparsity;

  ScorerKind scorer = ScorerKind::kRemote;
  std::string endpoint;
  /// Pose file of the photometric targets.
  std::string targets;

  AzimuthRange azimuth_range;
  double elevation = deg_to_rad(30.0);
  double radius = 4.0;
  double focal_scale = 1.2;

  int levels = 8;
  int features = 128;
  FieldArch arch;

  LearningRateSchedule lr;
  AdamConfig adam;
  double origin_decay = 0.999;
  bool track_origin = true;

  BackgroundMode background = BackgroundMode::kRandom;
  BackgroundSpec background_spec;

  int checkpoint_every = 1000;
  int render_chunk_points = 2048;
  std::string out_dir = "run";
};

/// Rejects inconsistent settings with ConfigError.
void validate(const RunConfig& config);

/// Pretty-printed JSON with every field.
std::string to_json(const RunConfig& config);

/// Overlays the keys present in `json` onto `base`. Unknown keys and values of
/// the wrong type raise ConfigError.
RunConfig merge_json(const RunConfig& base, std::string_view json);

/// Parses "W" (width in degrees centered on azimuth 0) or "LO,HI" (degrees).
AzimuthRange parse_azimuth_range(std::string_view text);

}  // namespace dreamfield
