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
#include "dreamfield/geometry.hpp"
#include "dreamfield/types.hpp"

#include <functional>
#include <limits>
#include <vector>

namespace dreamfield {

struct RenderSettings {
  int samples = 192;
  bool jitter = true;
  double cube_half_side = 1.0;
  /// Points per field evaluation batch. Small batches keep activations in cache.
  int chunk_points = 2048;
};

template <typename Scalar>
struct TransmittanceWeights {
  VecX<Scalar> transmittance;  // T_i, T_1 = 1
  VecX<Scalar> weights;        // w_i = T_i (1 - exp(-sigma_i delta_i))
  Scalar final_transmittance;  // exp(-sum sigma_j delta_j)
};

template <typename Scalar>
TransmittanceWeights<Scalar> transmittance_weights(const Eigen::Ref<const VecX<Scalar>>& sigmas,
                                                   const Eigen::Ref<const VecX<Scalar>>& deltas);

template <typename Scalar>
struct RenderOutput {
  RgbImage<Scalar> rgb;
  GrayImage<Scalar> final_transmittance;
  GrayImage<Scalar> depth;
  /// Sum of w_i x_i over every sample of every pixel divided by sum of w_i.
  /// NaN when nothing was rendered.
  Vec3<double> center_of_mass = Vec3<double>::Constant(std::numeric_limits<double>::quiet_NaN());

  Scalar mean_transmittance() const { return final_transmittance.data.mean(); }
};

/// Samples of every ray that fall inside the scene cube, grouped by ray.
template <typename Scalar>
struct RaySamples {
  int samples_per_ray = 0;
  Scalar t_far = 0;
  MatX<Scalar> t;      // rays x samples
  MatX<Scalar> delta;  // rays x samples
  std::vector<Index> ray_begin;  // inside samples of ray r: [ray_begin[r], ray_begin[r + 1])
  std::vector<int> sample_slot;  // per inside sample: position along its ray
  Points<Scalar> positions;      // per inside sample
  VecX<Scalar> variances;        // per inside sample

  Index ray_count() const { return t.rows(); }
  Index inside_count() const { return positions.rows(); }
};

template <typename Scalar>
RaySamples<Scalar> build_ray_samples(const RayGrid<Scalar>& rays, const RenderSettings& settings,
                                     RandomStream* jitter);

/// Density and color of a batch of points with isotropic footprint variances.
template <typename Scalar>
using FieldFunction = std::function<void(const Points<Scalar>& positions,
                                         const VecX<Scalar>& variances, VecX<Scalar>& sigma,
                                         Points<Scalar>& rgb)>;

/// Everything the backward pass needs from a forward render.
template <typename Scalar>
struct RenderTape {
  RaySamples<Scalar> samples;
  VecX<Scalar> noise;
  VecX<Scalar> sigma;
  Points<Scalar> rgb;
  RgbImage<Scalar> background;
  VecX<Scalar> final_transmittance;
  int chunk_points = 2048;
};

/// Volume-renders an arbitrary field, compositing over `background`.
template <typename Scalar>
RenderOutput<Scalar> render_function(const RayGrid<Scalar>& rays, const RenderSettings& settings,
                                     const RgbImage<Scalar>& background, RandomStream* jitter,
                                     const FieldFunction<Scalar>& field);

/// Volume-renders the neural field. `perturb` supplies density noise when
/// perturb_sigma > 0.
template <typename Scalar>
RenderOutput<Scalar> render_rays(const FieldParams<Scalar>& params,
                                 const FourierBasis<Scalar>& basis, const RayGrid<Scalar>& rays,
                                 const RenderSettings& settings,
                                 const RgbImage<Scalar>& background, RandomStream* jitter,
                                 Scalar perturb_sigma = 0, RandomStream* perturb = nullptr,
                                 RenderTape<Scalar>* tape = nullptr);

/// Accumulates d(loss)/d(params) given d(loss)/d(rgb) and d(loss)/d(final T)
/// per pixel. Field activations are recomputed chunk by chunk, and samples
/// whose upstream gradient is exactly zero are skipped.
template <typename Scalar>
void render_backward(const FieldParams<Scalar>& params, const FourierBasis<Scalar>& basis,
                     const RenderTape<Scalar>& tape, const RgbImage<Scalar>& d_rgb,
                     const GrayImage<Scalar>& d_transmittance, FieldParams<Scalar>& grads);

/// Peak signal-to-noise ratio for images in [0, 1].
template <typename Scalar>
double psnr(const RgbImage<Scalar>& a, const RgbImage<Scalar>& b);

}  // namespace dreamfield
