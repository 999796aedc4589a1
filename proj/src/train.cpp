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

#include "dreamfield/train.hpp"

#include "dreamfield/remote_scorer.hpp"

#include <cmath>
#include <cstdio>

namespace dreamfield {

namespace {

constexpr double kReferenceFocalScale = 1.2;
constexpr double kReferenceRadius = 4.0;

}  // namespace

Checkpoint init_run(const RunConfig& config) {
  validate(config);
  Checkpoint state;
  RandomStream init_rng(config.seed, 0, StreamTag::kInit);
  state.params = init_params<float>(init_rng, config.arch);
  RandomStream basis_rng(config.seed, 0, StreamTag::kBasis);
  state.basis = sample_basis<float>(basis_rng, config.levels, config.features);
  state.optim = OptimState<float>::zeros_like(state.params.tensors());
  state.tracker.decay = config.origin_decay;
  state.config_json = to_json(config);
  return state;
}

PipelineConfig pipeline_config(const RunConfig& config) {
  PipelineConfig p;
  p.train_resolution = config.train_resolution;
  p.crop_size = config.crop_size;
  p.render.samples = config.samples;
  p.render.jitter = true;
  p.render.chunk_points = config.render_chunk_points;
  p.sparsity = config.sparsity;
  return p;
}

StepInputs<float> draw_step_inputs(const RunConfig& config, long iteration,
                                   const Vec3<double>& origin_shift,
                                   const std::vector<CameraPose>* views) {
  const auto k = std::uint64_t(iteration);
  StepInputs<float> in;
  in.seed = config.seed;
  in.iteration = iteration;
  in.origin_shift = origin_shift;
  if (views && !views->empty()) {
    RandomStream view_rng(config.seed, k, StreamTag::kView);
    in.view_index = int(view_rng.uniform_index(views->size()));
    in.pose = (*views)[std::size_t(in.view_index)];
  } else {
    RandomStream pose_rng(config.seed, k, StreamTag::kPose);
    in.pose = sample_pose(pose_rng, config.azimuth_range, config.elevation, config.radius,
                          config.focal_scale);
  }
  const int res = config.train_resolution;
  if (config.background == BackgroundMode::kWhite) {
    in.background = RgbImage<float>::constant(res, res, {1.0f, 1.0f, 1.0f});
  } else {
    RandomStream bg_rng(config.seed, k, StreamTag::kBackground);
    BackgroundSpec spec = config.background_spec;
    spec.kind = sample_background_kind(bg_rng);
    in.background = make_background<float>(spec, res, bg_rng);
  }
  RandomStream crop_rng(config.seed, k, StreamTag::kCrop);
  in.crop = sample_crop_window(res, res, config.crop_size, crop_rng);
  in.tau = scale_tau_for_camera(anneal_tau(iteration, config.sparsity), in.pose.focal_scale,
                                in.pose.radius, kReferenceFocalScale, kReferenceRadius);
  return in;
}

std::string format_metrics(const IterationMetrics& m) {
  char line[256];
  std::snprintf(line, sizeof line, "%ld,%.9g,%.9g,%.9g,%.9g,%.9g", m.iteration, m.total_loss,
                m.guidance_loss, m.mean_transmittance, m.tau, m.lr);
  return line;
}

TrainSummary train(const RunConfig& config, Checkpoint& state, Scorer<float>& scorer,
                   const TrainOptions& options) {
  validate(config);
  const long until = options.until < 0 ? config.iterations : options.until;
  const PipelineConfig pipeline = pipeline_config(config);
  TrainSummary summary;

  auto save = [&](const char* name) {
    if (options.checkpoint_dir.empty()) return;
    std::filesystem::create_directories(options.checkpoint_dir);
    save_checkpoint(options.checkpoint_dir / name, state);
  };

  for (long k = state.iteration; k < until; ++k) {
    const Vec3<double> origin =
        config.track_origin ? Vec3<double>(state.tracker.origin.cast<double>()) : Vec3<double>::Zero();
    const StepInputs<float> inputs = draw_step_inputs(config, k, origin, options.views);
    IterationMetrics m;
    m.iteration = k;
    m.tau = inputs.tau;
    m.lr = lr_schedule(k, config.lr);

    FieldParams<float> grads;
    try {
      const StepResult<float> step =
          loss_and_gradient(pipeline, state.params, state.basis, inputs, scorer, &grads);
      m.total_loss = step.total_loss;
      m.guidance_loss = step.guidance_loss;
      m.mean_transmittance = step.mean_transmittance;
      m.step_skipped = !adam_step(state.params.tensors(), grads.tensors(), state.optim, m.lr, config.adam);
      if (m.step_skipped && options.log) {
        *options.log << "iteration " << k << ": step skipped: non-finite gradient\n";
      }
      if (config.track_origin) state.tracker = update_origin(state.tracker, step.center_of_mass);
    } catch (const NumericalError& e) {
      m.total_loss = m.guidance_loss = m.mean_transmittance = std::nan("");
      m.step_skipped = true;
      if (options.log) *options.log << "iteration " << k << ": step skipped: " << e.what() << '\n';
    } catch (const TransportError&) {
      save(kPartialCheckpointName);
      throw;
    }
    if (m.step_skipped) ++summary.skipped_steps;
    state.iteration = k + 1;
    ++summary.iterations_run;
    if (options.metrics) *options.metrics << format_metrics(m) << '\n';
    if (options.on_iteration) options.on_iteration(m);
    if (config.checkpoint_every > 0 && state.iteration % config.checkpoint_every == 0 &&
        state.iteration < until) {
      save(kCheckpointName);
    }
  }
  if (options.metrics) options.metrics->flush();
  save(kCheckpointName);
  return summary;
}

}  // namespace dreamfield
