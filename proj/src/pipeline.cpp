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

#include "dreamfield/pipeline.hpp"

#include <cmath>
#include <string>

namespace dreamfield {

namespace {

template <typename Derived>
void require_finite(const Eigen::DenseBase<Derived>& values, const char* stage) {
  if (!values.allFinite()) throw NumericalError(std::string(stage) + ": non-finite values");
}

void require_finite(double value, const char* stage) {
  if (!std::isfinite(value)) throw NumericalError(std::string(stage) + ": non-finite value");
}

}  // namespace

template <typename Scalar>
StepResult<Scalar> loss_and_gradient(const PipelineConfig& config,
                                     const FieldParams<Scalar>& params,
                                     const FourierBasis<Scalar>& basis,
                                     const StepInputs<Scalar>& inputs, Scorer<Scalar>& scorer,
                                     FieldParams<Scalar>* grads) {
  const int res = config.train_resolution;
  RandomStream jitter(inputs.seed, std::uint64_t(inputs.iteration), StreamTag::kJitter);
  RandomStream perturb(inputs.seed, std::uint64_t(inputs.iteration), StreamTag::kPerturb);
  const Scalar perturb_sigma = config.sparsity.mode == SparsityMode::kPerturbDensity
                                   ? Scalar(config.sparsity.perturb_sigma)
                                   : Scalar(0);

  const RayGrid<Scalar> rays =
      camera_rays<Scalar>(inputs.pose, res, inputs.origin_shift, config.camera);
  RenderTape<Scalar> tape;
  StepResult<Scalar> result;
  result.render = render_rays(params, basis, rays, config.render, inputs.background, &jitter,
                              perturb_sigma, &perturb, grads ? &tape : nullptr);
  require_finite(result.render.rgb.data, "render");
  result.center_of_mass = result.render.center_of_mass;
  result.mean_transmittance = result.render.mean_transmittance();

  const RgbImage<Scalar> cropped = crop(result.render.rgb, inputs.crop);
  const int input_res = scorer.input_resolution();
  const RgbImage<Scalar> scored_image = resize_bilinear(cropped, input_res);
  GuidanceResult<Scalar> guidance = scorer.score(scored_image, {inputs.view_index, inputs.crop});
  require_finite(guidance.loss, "guidance loss");
  result.guidance_loss = guidance.loss;

  const TotalLoss<Scalar> total = loss_total(guidance.loss, result.render.final_transmittance,
                                             Scalar(inputs.tau), config.sparsity);
  require_finite(total.value, "total loss");
  result.total_loss = total.value;
  if (!grads) return result;

  require_finite(guidance.image_gradient.data, "guidance gradient");
  if (guidance.image_gradient.height != input_res || guidance.image_gradient.width != input_res) {
    throw ArgumentError("scorer returned a gradient of the wrong shape");
  }
  guidance.image_gradient.data *= total.d_guidance;
  const RgbImage<Scalar> d_cropped =
      resize_bilinear_backward(guidance.image_gradient, cropped.height, cropped.width);
  const RgbImage<Scalar> d_rgb = crop_backward(d_cropped, res, res, inputs.crop);
  require_finite(d_rgb.data, "resize/crop backward");

  *grads = FieldParams<Scalar>(params.arch());
  render_backward(params, basis, tape, d_rgb, total.d_transmittance, *grads);
  for (const auto& t : grads->tensors()) require_finite(t.value, "field backward");
  return result;
}

template StepResult<float> loss_and_gradient<float>(const PipelineConfig&,
                                                    const FieldParams<float>&,
                                                    const FourierBasis<float>&,
                                                    const StepInputs<float>&, Scorer<float>&,
                                                    FieldParams<float>*);
template StepResult<double> loss_and_gradient<double>(const PipelineConfig&,
                                                      const FieldParams<double>&,
                                                      const FourierBasis<double>&,
                                                      const StepInputs<double>&, Scorer<double>&,
                                                      FieldParams<double>*);

}  // namespace dreamfield
