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

#include "dreamfield/types.hpp"

#include <string>
#include <string_view>

namespace dreamfield {

enum class SparsityMode { kNone, kPerturbDensity, kBetaPrior, kGated, kAdditive };

/// Accepts the CLI names (none, perturb, beta, gated, additive) and the long
/// forms (perturb_density, beta_prior).
SparsityMode parse_sparsity_mode(std::string_view name);
std::string to_string(SparsityMode mode);

struct SparsityConfig {
  SparsityMode mode = SparsityMode::kAdditive;
  double tau_target = 0.88;
  double tau_start = 0.40;
  int anneal_iters = 500;
  double lambda = 0.5;
  /// Std of the pre-softplus density noise in perturb_density mode.
  double perturb_sigma = 1.0;
  /// Transmittance clamp before the logs of the beta prior.
  double beta_clamp = 1e-6;
};

void validate(const SparsityConfig& config);

/// Linear ramp from tau_start to tau_target over anneal_iters, then constant.
double anneal_tau(long iteration, const SparsityConfig& config);

/// -min(tau, mean(T)).
template <typename Scalar>
Scalar loss_transmittance(const GrayImage<Scalar>& transmittance, Scalar tau);

/// Total loss and its partial derivatives with respect to the guidance loss
/// and to every pixel of the transmittance map.
template <typename Scalar>
struct TotalLoss {
  Scalar value = 0;
  Scalar d_guidance = 0;
  GrayImage<Scalar> d_transmittance;
};

template <typename Scalar>
TotalLoss<Scalar> loss_total(Scalar guidance_loss, const GrayImage<Scalar>& transmittance,
                             Scalar tau, const SparsityConfig& config);

/// tau' with 1 - tau' = (1 - tau) (f / f_ref)^2 (d_ref / d)^2, clamped into (0, 1).
double scale_tau_for_camera(double tau, double focal_scale, double distance,
                            double reference_focal_scale, double reference_distance);

}  // namespace dreamfield
