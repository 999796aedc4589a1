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

#include "dreamfield/rng.hpp"
#include "dreamfield/types.hpp"

#include <string>
#include <utility>
#include <vector>

namespace dreamfield {

/// Residual MLP layout. Each block is
///   x <- x + swish(swish(LayerNorm(x) W1 + b1) W2 + b2)
/// with W1: width x bottleneck and W2: bottleneck x width.
struct FieldArch {
  int input_dim = 256;
  int width = 144;
  int bottleneck = 288;
  int blocks = 3;
  double layer_norm_eps = 1e-6;

  friend bool operator==(const FieldArch&, const FieldArch&) = default;
};

void validate(const FieldArch& arch);

struct TensorShape {
  std::string name;
  Index rows;
  Index cols;
};

/// Ordered (name, shape) list. Gradients and optimizer moments share the
/// parameter layout.
std::vector<TensorShape> shape_manifest(const FieldArch& arch);

template <typename Scalar>
struct Tensor {
  std::string name;
  MatX<Scalar> value;
};

template <typename Scalar>
class FieldParams {
 public:
  FieldParams() = default;
  /// All tensors zero-filled in manifest order.
  explicit FieldParams(const FieldArch& arch);

  const FieldArch& arch() const { return arch_; }
  std::vector<Tensor<Scalar>>& tensors() { return tensors_; }
  const std::vector<Tensor<Scalar>>& tensors() const { return tensors_; }

  Index parameter_count() const;
  void set_zero();

  MatX<Scalar>& input_weight() { return tensors_[0].value; }
  MatX<Scalar>& input_bias() { return tensors_[1].value; }
  MatX<Scalar>& ln_scale(int b) { return tensors_[block_base(b) + 0].value; }
  MatX<Scalar>& ln_offset(int b) { return tensors_[block_base(b) + 1].value; }
  MatX<Scalar>& dense1_weight(int b) { return tensors_[block_base(b) + 2].value; }
  MatX<Scalar>& dense1_bias(int b) { return tensors_[block_base(b) + 3].value; }
  MatX<Scalar>& dense2_weight(int b) { return tensors_[block_base(b) + 4].value; }
  MatX<Scalar>& dense2_bias(int b) { return tensors_[block_base(b) + 5].value; }
  MatX<Scalar>& density_weight() { return tensors_[head_base() + 0].value; }
  MatX<Scalar>& density_bias() { return tensors_[head_base() + 1].value; }
  MatX<Scalar>& color_weight() { return tensors_[head_base() + 2].value; }
  MatX<Scalar>& color_bias() { return tensors_[head_base() + 3].value; }

  const MatX<Scalar>& input_weight() const { return tensors_[0].value; }
  const MatX<Scalar>& input_bias() const { return tensors_[1].value; }
  const MatX<Scalar>& ln_scale(int b) const { return tensors_[block_base(b) + 0].value; }
  const MatX<Scalar>& ln_offset(int b) const { return tensors_[block_base(b) + 1].value; }
  const MatX<Scalar>& dense1_weight(int b) const { return tensors_[block_base(b) + 2].value; }
  const MatX<Scalar>& dense1_bias(int b) const { return tensors_[block_base(b) + 3].value; }
  const MatX<Scalar>& dense2_weight(int b) const { return tensors_[block_base(b) + 4].value; }
  const MatX<Scalar>& dense2_bias(int b) const { return tensors_[block_base(b) + 5].value; }
  const MatX<Scalar>& density_weight() const { return tensors_[head_base() + 0].value; }
  const MatX<Scalar>& density_bias() const { return tensors_[head_base() + 1].value; }
  const MatX<Scalar>& color_weight() const { return tensors_[head_base() + 2].value; }
  const MatX<Scalar>& color_bias() const { return tensors_[head_base() + 3].value; }

  template <typename Other>
  FieldParams<Other> cast() const {
    FieldParams<Other> out(arch_);
    for (std::size_t i = 0; i < tensors_.size(); ++i) {
      out.tensors()[i].value = tensors_[i].value.template cast<Other>();
    }
    return out;
  }

 private:
  static constexpr int kTensorsPerBlock = 6;
  std::size_t block_base(int b) const { return 2 + std::size_t(kTensorsPerBlock) * b; }
  std::size_t head_base() const { return block_base(arch_.blocks); }

  FieldArch arch_;
  std::vector<Tensor<Scalar>> tensors_;
};

/// LeCun-normal dense weights (truncated at two standard deviations), zero
/// biases, unit LayerNorm scales and zero offsets.
template <typename Scalar>
FieldParams<Scalar> init_params(RandomStream& rng, const FieldArch& arch);

template <typename Scalar>
struct FieldOutput {
  VecX<Scalar> sigma;  // >= 0
  Points<Scalar> rgb;  // in [0, 1]
};

/// Activations kept by a forward pass for the matching backward pass.
template <typename Scalar>
struct FieldTape {
  struct Block {
    MatX<Scalar> input;
    MatX<Scalar> normalized;
    VecX<Scalar> inv_std;
    MatX<Scalar> pre1;
    MatX<Scalar> pre2;
  };
  MatX<Scalar> features;
  MatX<Scalar> input_pre;
  std::vector<Block> blocks;
  MatX<Scalar> trunk;
  VecX<Scalar> density_pre;
  Points<Scalar> color_pre;
};

/// Density head adds `noise` (one value per point, may be empty) before the
/// softplus. Records activations into `tape` when given.
template <typename Scalar>
FieldOutput<Scalar> field_forward(const FieldParams<Scalar>& params,
                                  const Eigen::Ref<const MatX<Scalar>>& features,
                                  const Eigen::Ref<const VecX<Scalar>>& noise,
                                  FieldTape<Scalar>* tape = nullptr);

/// Draws noise ~ N(0, perturb_sigma^2) per point from `rng` when perturb_sigma > 0.
template <typename Scalar>
FieldOutput<Scalar> field_forward(const FieldParams<Scalar>& params,
                                  const Eigen::Ref<const MatX<Scalar>>& features,
                                  Scalar perturb_sigma, RandomStream* rng);

/// Accumulates d(loss)/d(params) into `grads` given upstream gradients with
/// respect to the outputs of the taped forward pass.
template <typename Scalar>
void field_backward(const FieldParams<Scalar>& params, const FieldTape<Scalar>& tape,
                    const Eigen::Ref<const VecX<Scalar>>& d_sigma,
                    const Eigen::Ref<const Points<Scalar>>& d_rgb, FieldParams<Scalar>& grads);

/// Zeroes density outside the closed cube max(|x|,|y|,|z|) <= half_side.
template <typename Scalar>
VecX<Scalar> mask_density(const Eigen::Ref<const VecX<Scalar>>& sigma,
                          const Eigen::Ref<const Points<Scalar>>& positions, Scalar half_side = 1);

template <typename Scalar>
inline bool inside_cube(const Eigen::Ref<const Vec3<Scalar>>& p, Scalar half_side) {
  return p.cwiseAbs().maxCoeff() <= half_side;
}

/// Exponential moving average of the rendered density's center of mass.
template <typename Scalar>
struct OriginTracker {
  Vec3<Scalar> origin = Vec3<Scalar>::Zero();
  double decay = 0.999;
};

/// Non-finite centers of mass (empty renders) leave the tracker unchanged.
template <typename Scalar>
OriginTracker<Scalar> update_origin(const OriginTracker<Scalar>& tracker,
                                    const Vec3<double>& center_of_mass);

template <typename Scalar>
Scalar softplus(Scalar x) {
  using std::exp;
  using std::log1p;
  return (x > Scalar(0) ? x : Scalar(0)) + log1p(exp(-(x > Scalar(0) ? x : -x)));
}

}  // namespace dreamfield
