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

#include "dreamfield/checkpoint.hpp"
#include "dreamfield/guidance.hpp"
#include "dreamfield/pipeline.hpp"
#include "dreamfield/run_config.hpp"

#include <filesystem>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

namespace dreamfield {

/// Fresh run state: field from the (seed, 0, init) stream, basis from the
/// (seed, 0, basis) stream, zero optimizer moments, origin at zero.
Checkpoint init_run(const RunConfig& config);

PipelineConfig pipeline_config(const RunConfig& config);

/// Pose, background, crop and target view for iteration `iteration`. With
/// `views` the pose is one of them (photometric mode); otherwise it is drawn
/// from the configured azimuth range.
StepInputs<float> draw_step_inputs(const RunConfig& config, long iteration,
                                   const Vec3<double>& origin_shift,
                                   const std::vector<CameraPose>* views);

struct IterationMetrics {
  long iteration = 0;
  double total_loss = 0;
  double guidance_loss = 0;
  double mean_transmittance = 0;
  double tau = 0;
  double lr = 0;
  bool step_skipped = false;
};

inline constexpr const char* kMetricsHeader = "iter,total_loss,guidance_loss,mean_T,tau,lr";

/// `iter,total_loss,guidance_loss,mean_T,tau,lr` with every float in %.9g.
std::string format_metrics(const IterationMetrics& metrics);

struct TrainOptions {
  /// Stop after this many completed iterations; negative means config.iterations.
  long until = -1;
  /// Receives one metrics line per iteration.
  std::ostream* metrics = nullptr;
  /// Diagnostics such as skipped steps.
  std::ostream* log = nullptr;
  /// Where checkpoint.ckpt is written every config.checkpoint_every iterations
  /// and at the end. Empty disables checkpointing.
  std::filesystem::path checkpoint_dir;
  /// Target poses in photometric mode.
  const std::vector<CameraPose>* views = nullptr;
  std::function<void(const IterationMetrics&)> on_iteration;
};

struct TrainSummary {
  long iterations_run = 0;
  long skipped_steps = 0;
};

inline constexpr const char* kCheckpointName = "checkpoint.ckpt";
inline constexpr const char* kPartialCheckpointName = "checkpoint_partial.ckpt";

/// Runs iterations state.iteration .. until-1 in place. Each iteration:
/// anneal tau, draw inputs, render, crop, resize, score, backward, Adam with
/// the scheduled rate (skipped on non-finite gradients), origin update.
/// A TransportError from the scorer saves checkpoint_partial.ckpt before it
/// propagates.
TrainSummary train(const RunConfig& config, Checkpoint& state, Scorer<float>& scorer,
                   const TrainOptions& options = {});

}  // namespace dreamfield
