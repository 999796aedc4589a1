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

#include "dreamfield/optimize.hpp"

#include <algorithm>
#include <cmath>

namespace dreamfield {

double lr_schedule(long iteration, const LearningRateSchedule& schedule) {
  if (schedule.warmup_iters <= 0) return schedule.final;
  const double progress =
      double(std::clamp(iteration, 0L, schedule.warmup_iters)) / double(schedule.warmup_iters);
  return schedule.initial * std::pow(schedule.final / schedule.initial, progress);
}

template <typename Scalar>
OptimState<Scalar> OptimState<Scalar>::zeros_like(const std::vector<Tensor<Scalar>>& params) {
  OptimState state;
  for (const auto& p : params) {
    state.first_moment.push_back(MatX<Scalar>::Zero(p.value.rows(), p.value.cols()));
    state.second_moment.push_back(MatX<Scalar>::Zero(p.value.rows(), p.value.cols()));
  }
  return state;
}

template <typename Scalar>
bool adam_step(std::vector<Tensor<Scalar>>& params, const std::vector<Tensor<Scalar>>& grads,
               OptimState<Scalar>& state, double lr, const AdamConfig& config) {
  if (params.size() != grads.size() || params.size() != state.first_moment.size() ||
      params.size() != state.second_moment.size()) {
    throw ArgumentError("adam_step: parameter, gradient and state lists differ in length");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].value.rows() != grads[i].value.rows() ||
        params[i].value.cols() != grads[i].value.cols() ||
        params[i].value.rows() != state.first_moment[i].rows() ||
        params[i].value.cols() != state.first_moment[i].cols()) {
      throw ArgumentError("adam_step: shape mismatch for '" + params[i].name + "'");
    }
  }
  for (const auto& g : grads) {
    if (!g.value.allFinite()) return false;
  }

  ++state.step;
  const Scalar b1 = Scalar(config.beta1);
  const Scalar b2 = Scalar(config.beta2);
  const Scalar eps = Scalar(config.epsilon);
  const Scalar correction1 = Scalar(1.0 - std::pow(config.beta1, double(state.step)));
  const Scalar correction2 = Scalar(1.0 - std::pow(config.beta2, double(state.step)));
  const Scalar step_size = Scalar(lr);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& m = state.first_moment[i];
    auto& v = state.second_moment[i];
    const auto& g = grads[i].value;
    m = b1 * m + (Scalar(1) - b1) * g;
    v = b2 * v + (Scalar(1) - b2) * g.cwiseAbs2();
    params[i].value.array() -= step_size * (m.array() / correction1) /
                               ((v.array() / correction2).sqrt() + eps);
  }
  return true;
}

template struct OptimState<float>;
template struct OptimState<double>;
template bool adam_step<float>(std::vector<Tensor<float>>&, const std::vector<Tensor<float>>&,
                               OptimState<float>&, double, const AdamConfig&);
template bool adam_step<double>(std::vector<Tensor<double>>&, const std::vector<Tensor<double>>&,
                                OptimState<double>&, double, const AdamConfig&);

}  // namespace dreamfield
