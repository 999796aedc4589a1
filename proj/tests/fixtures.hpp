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

// Small end-to-end configurations shared by the unit and acceptance tests.

#include "dreamfield/pipeline.hpp"
#include "dreamfield/scene.hpp"
#include "dreamfield/train.hpp"

#include "oracles.hpp"

#include <cstdio>
#include <filesystem>
#include <string>

namespace dreamfield::testing {

/// Two blocks of width 16, an 8x8 render with 16 samples per ray, a 6x6 crop
/// resized to 7x7 and scored photometrically.
template <typename Scalar>
struct TinyProblem {
  PipelineConfig config;
  FourierBasis<Scalar> basis;
  FieldParams<Scalar> params;
  StepInputs<Scalar> inputs;
  std::vector<RgbImage<Scalar>> targets;

  template <typename Other>
  TinyProblem<Other> cast() const {
    TinyProblem<Other> out;
    out.config = config;
    out.basis.frequencies = basis.frequencies.template cast<Other>();
    out.basis.levels = basis.levels;
    out.params = params.template cast<Other>();
    out.inputs.seed = inputs.seed;
    out.inputs.iteration = inputs.iteration;
    out.inputs.pose = inputs.pose;
    out.inputs.origin_shift = inputs.origin_shift;
    out.inputs.background = inputs.background.template cast<Other>();
    out.inputs.crop = inputs.crop;
    out.inputs.view_index = inputs.view_index;
    out.inputs.tau = inputs.tau;
    for (const auto& t : targets) out.targets.push_back(t.template cast<Other>());
    return out;
  }
};

inline TinyProblem<double> tiny_problem(std::uint64_t seed, SparsityMode mode = SparsityMode::kAdditive) {
  TinyProblem<double> p;
  p.config.train_resolution = 8;
  p.config.crop_size = 6;
  p.config.render.samples = 16;
  p.config.render.chunk_points = 256;
  p.config.sparsity.mode = mode;
  p.config.sparsity.lambda = 0.5;

  RandomStream basis_rng(seed, 0, StreamTag::kBasis);
  p.basis = sample_basis<double>(basis_rng, 3, 8);
  FieldArch arch;
  arch.input_dim = 16;
  arch.width = 16;
  arch.bottleneck = 16;
  arch.blocks = 2;
  RandomStream init(seed, 0, StreamTag::kInit);
  p.params = init_params<double>(init, arch);
  // Non-default normalization and head parameters so every path carries signal.
  RandomStream extra(seed, 1, StreamTag::kTest);
  for (int b = 0; b < arch.blocks; ++b) {
    for (Index i = 0; i < arch.width; ++i) {
      p.params.ln_scale(b)(0, i) = 1.0 + 0.1 * extra.normal();
      p.params.ln_offset(b)(0, i) = 0.1 * extra.normal();
    }
  }
  p.params.density_bias()(0, 0) = 1.5;

  p.inputs.seed = seed;
  p.inputs.iteration = 3;
  p.inputs.pose = CameraPose{0.8, 0.4, 4.0, 1.2};
  p.inputs.origin_shift = Vec3<double>(0.05, -0.03, 0.02);
  p.inputs.background = RgbImage<double>(8, 8);
  for (Index i = 0; i < p.inputs.background.data.size(); ++i) {
    p.inputs.background.data.data()[i] = extra.uniform();
  }
  p.inputs.crop = CropWindow{1, 2, 6};
  p.inputs.view_index = 0;
  p.inputs.tau = 0.95;
  RgbImage<double> target(8, 8);
  for (Index i = 0; i < target.data.size(); ++i) target.data.data()[i] = extra.uniform();
  p.targets.push_back(target);
  return p;
}

/// Total loss of the tiny problem at its current parameters.
template <typename Scalar>
double tiny_loss(TinyProblem<Scalar>& p) {
  PhotometricScorer<Scalar> scorer(p.targets, 7);
  return double(loss_and_gradient<Scalar>(p.config, p.params, p.basis, p.inputs, scorer,
                                          (FieldParams<Scalar>*)nullptr)
                    .total_loss);
}

template <typename Scalar>
FieldParams<Scalar> tiny_gradient(TinyProblem<Scalar>& p) {
  PhotometricScorer<Scalar> scorer(p.targets, 7);
  FieldParams<Scalar> grads;
  loss_and_gradient<Scalar>(p.config, p.params, p.basis, p.inputs, scorer, &grads);
  return grads;
}

/// End-to-end gradient check. The reference differences are always taken in
/// float64 so that the float32 gradient is measured against an exact target.
template <typename Scalar>
oracle::GradientReport tiny_gradient_check(std::uint64_t seed, double tolerance) {
  TinyProblem<double> reference = tiny_problem(seed);
  TinyProblem<Scalar> problem = reference.template cast<Scalar>();
  const FieldParams<Scalar> analytic = tiny_gradient(problem);
  return oracle::check_all_parameters(reference.params, analytic,
                                      [&] { return tiny_loss(reference); }, 1e-6, tolerance);
}


/// A photometric run small enough to train for tens of iterations per test.
inline RunConfig tiny_run_config(std::uint64_t seed = 5) {
  RunConfig c;
  c.prompt = "two spheres";
  c.seed = seed;
  c.iterations = 12;
  c.train_resolution = 12;
  c.crop_size = 10;
  c.samples = 12;
  c.scorer = ScorerKind::kPhotometric;
  c.levels = 4;
  c.features = 8;
  c.arch.input_dim = 16;
  c.arch.width = 16;
  c.arch.bottleneck = 16;
  c.arch.blocks = 2;
  c.lr = {1e-3, 1e-2, 4};
  c.checkpoint_every = 4;
  c.render_chunk_points = 512;
  return c;
}

/// Analytic renders of the two-sphere scene from a few poses.
struct TinyTargets {
  std::vector<CameraPose> poses;
  std::vector<RgbImage<float>> images;
};

inline TinyTargets tiny_targets(int resolution) {
  TinyTargets t;
  const auto field = sphere_field<float>(two_sphere_scene());
  for (int i = 0; i < 3; ++i) {
    t.poses.push_back(CameraPose{deg_to_rad(120.0 * i), deg_to_rad(30.0), 4.0, 1.2});
    t.images.push_back(render_analytic(field, t.poses.back(), resolution, 32));
  }
  return t;
}

/// Fresh directory under the system temporary path.
inline std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("dreamfield_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace dreamfield::testing
