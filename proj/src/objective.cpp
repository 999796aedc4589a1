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

#include "dreamfield/objective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dreamfield {

SparsityMode parse_sparsity_mode(std::string_view name) {
  if (name == "none") return SparsityMode::kNone;
  if (name == "perturb" || name == "perturb_density") return SparsityMode::kPerturbDensity;
  if (name == "beta" || name == "beta_prior") return SparsityMode::kBetaPrior;
  if (name == "gated") return SparsityMode::kGated;
  if (name == "additive") return SparsityMode::kAdditive;
  throw ConfigError("unknown sparsity mode '" + std::string(name) + "'");
}

std::string to_string(SparsityMode mode) {
  switch (mode) {
    case SparsityMode::kNone: return "none";
    case SparsityMode::kPerturbDensity: return "perturb";
    case SparsityMode::kBetaPrior: return "beta";
    case SparsityMode::kGated: return "gated";
    case SparsityMode::kAdditive: return "additive";
  }
  throw ConfigError("unknown sparsity mode");
}

void validate(const SparsityConfig& config) {
  if (!(config.tau_target > 0.0 && config.tau_target <= 1.0)) {
    throw ConfigError("sparsity: tau target must lie in (0, 1]");
  }
  if (!(config.tau_start <= config.tau_target)) {
    throw ConfigError("sparsity: tau start must not exceed tau target");
  }
  if (config.anneal_iters < 0) throw ConfigError("sparsity: anneal iterations must be >= 0");
  if (!(config.lambda >= 0.0)) throw ConfigError("sparsity: lambda must be >= 0");
  if (!(config.perturb_sigma >= 0.0)) throw ConfigError("sparsity: perturb sigma must be >= 0");
}

double anneal_tau(long iteration, const SparsityConfig& config) {
  if (iteration >= config.anneal_iters) return config.tau_target;
  const double fraction = double(std::max(0L, iteration)) / double(config.anneal_iters);
  return config.tau_start + (config.tau_target - config.tau_start) * fraction;
}

template <typename Scalar>
Scalar loss_transmittance(const GrayImage<Scalar>& transmittance, Scalar tau) {
  return -std::min(tau, Scalar(transmittance.data.mean()));
}

template <typename Scalar>
TotalLoss<Scalar> loss_total(Scalar guidance_loss, const GrayImage<Scalar>& transmittance,
                             Scalar tau, const SparsityConfig& config) {
  const Index n = transmittance.pixel_count();
  if (n == 0) throw ArgumentError("loss_total: empty transmittance map");
  const Scalar mean_t = transmittance.data.mean();
  const Scalar lambda = Scalar(config.lambda);
  // Subgradient zero at the kink mean(T) == tau.
  const bool below_target = mean_t < tau;

  TotalLoss<Scalar> out;
  out.d_transmittance = GrayImage<Scalar>(transmittance.height, transmittance.width);
  switch (config.mode) {
    case SparsityMode::kNone:
    case SparsityMode::kPerturbDensity:
      out.value = guidance_loss;
      out.d_guidance = 1;
      break;
    case SparsityMode::kAdditive:
      out.value = guidance_loss + lambda * -std::min(tau, mean_t);
      out.d_guidance = 1;
      if (below_target) out.d_transmittance.data.setConstant(-lambda / Scalar(n));
      break;
    case SparsityMode::kGated: {
      const Scalar gate = std::min(tau, mean_t);
      out.value = gate * guidance_loss;
      out.d_guidance = gate;
      if (below_target) out.d_transmittance.data.setConstant(guidance_loss / Scalar(n));
      break;
    }
    case SparsityMode::kBetaPrior: {
      const Scalar lo = Scalar(config.beta_clamp);
      const Scalar hi = Scalar(1) - lo;
      Scalar prior = 0;
      for (Index i = 0; i < n; ++i) {
        const Scalar raw = transmittance.data(i, 0);
        const Scalar t = std::clamp(raw, lo, hi);
        prior += std::log(t) + std::log1p(-t);
        if (raw > lo && raw < hi) {
          out.d_transmittance.data(i, 0) =
              lambda / Scalar(n) * (Scalar(1) / t - Scalar(1) / (Scalar(1) - t));
        }
      }
      out.value = guidance_loss + lambda * prior / Scalar(n);
      out.d_guidance = 1;
      break;
    }
  }
  return out;
}

double scale_tau_for_camera(double tau, double focal_scale, double distance,
                            double reference_focal_scale, double reference_distance) {
  if (!(focal_scale > 0.0 && distance > 0.0 && reference_focal_scale > 0.0 &&
        reference_distance > 0.0)) {
    throw ArgumentError("scale_tau_for_camera: focal scales and distances must be positive");
  }
  const double focal_ratio = focal_scale / reference_focal_scale;
  const double distance_ratio = reference_distance / distance;
  const double opacity = (1.0 - tau) * focal_ratio * focal_ratio * distance_ratio * distance_ratio;
  constexpr double kEps = 1e-9;
  return std::clamp(1.0 - opacity, kEps, 1.0 - kEps);
}

template float loss_transmittance<float>(const GrayImage<float>&, float);
template double loss_transmittance<double>(const GrayImage<double>&, double);
template TotalLoss<float> loss_total<float>(float, const GrayImage<float>&, float,
                                            const SparsityConfig&);
template TotalLoss<double> loss_total<double>(double, const GrayImage<double>&, double,
                                              const SparsityConfig&);

}  // namespace dreamfield
