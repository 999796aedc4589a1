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

#include "dreamfield/field.hpp"

#include <cmath>
#include <string>

namespace dreamfield {

namespace {

template <typename Derived>
auto sigmoid(const Eigen::ArrayBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  return (Scalar(1) + (-x).exp()).inverse();
}

template <typename Scalar>
MatX<Scalar> swish(const MatX<Scalar>& x) {
  return (x.array() * sigmoid(x.array())).matrix();
}

/// d swish(x) / dx, elementwise.
template <typename Scalar>
MatX<Scalar> swish_grad(const MatX<Scalar>& x) {
  const auto s = sigmoid(x.array()).eval();
  return (s + x.array() * s * (Scalar(1) - s)).matrix();
}

template <typename Scalar>
void add_row_bias(MatX<Scalar>& m, const MatX<Scalar>& bias) {
  m.rowwise() += bias.row(0);
}

}  // namespace

void validate(const FieldArch& arch) {
  if (arch.input_dim < 1 || arch.width < 1 || arch.bottleneck < 1 || arch.blocks < 0) {
    throw ConfigError("field architecture: dimensions must be positive");
  }
  if (!(arch.layer_norm_eps > 0.0)) throw ConfigError("field architecture: layer_norm_eps <= 0");
}

std::vector<TensorShape> shape_manifest(const FieldArch& arch) {
  validate(arch);
  std::vector<TensorShape> shapes;
  shapes.push_back({"input.weight", arch.input_dim, arch.width});
  shapes.push_back({"input.bias", 1, arch.width});
  for (int b = 0; b < arch.blocks; ++b) {
    const std::string prefix = "block" + std::to_string(b) + ".";
    shapes.push_back({prefix + "norm.scale", 1, arch.width});
    shapes.push_back({prefix + "norm.offset", 1, arch.width});
    shapes.push_back({prefix + "dense1.weight", arch.width, arch.bottleneck});
    shapes.push_back({prefix + "dense1.bias", 1, arch.bottleneck});
    shapes.push_back({prefix + "dense2.weight", arch.bottleneck, arch.width});
    shapes.push_back({prefix + "dense2.bias", 1, arch.width});
  }
  shapes.push_back({"density.weight", arch.width, 1});
  shapes.push_back({"density.bias", 1, 1});
  shapes.push_back({"color.weight", arch.width, 3});
  shapes.push_back({"color.bias", 1, 3});
  return shapes;
}

template <typename Scalar>
FieldParams<Scalar>::FieldParams(const FieldArch& arch) : arch_(arch) {
  for (const auto& shape : shape_manifest(arch)) {
    tensors_.push_back({shape.name, MatX<Scalar>::Zero(shape.rows, shape.cols)});
  }
}

template <typename Scalar>
Index FieldParams<Scalar>::parameter_count() const {
  Index total = 0;
  for (const auto& t : tensors_) total += t.value.size();
  return total;
}

template <typename Scalar>
void FieldParams<Scalar>::set_zero() {
  for (auto& t : tensors_) t.value.setZero();
}

template <typename Scalar>
FieldParams<Scalar> init_params(RandomStream& rng, const FieldArch& arch) {
  FieldParams<Scalar> params(arch);
  // Std of a unit normal truncated to [-2, 2].
  constexpr double kTruncatedStd = 0.87962566103423978;
  for (auto& tensor : params.tensors()) {
    const bool is_weight = tensor.name.ends_with(".weight");
    const bool is_scale = tensor.name.ends_with(".scale");
    if (is_scale) {
      tensor.value.setOnes();
    } else if (is_weight) {
      const double stddev = 1.0 / std::sqrt(double(tensor.value.rows())) / kTruncatedStd;
      for (Index c = 0; c < tensor.value.cols(); ++c) {
        for (Index r = 0; r < tensor.value.rows(); ++r) {
          double z = rng.normal();
          while (std::abs(z) > 2.0) z = rng.normal();
          tensor.value(r, c) = Scalar(stddev * z);
        }
      }
    }
  }
  return params;
}

template <typename Scalar>
FieldOutput<Scalar> field_forward(const FieldParams<Scalar>& params,
                                  const Eigen::Ref<const MatX<Scalar>>& features,
                                  const Eigen::Ref<const VecX<Scalar>>& noise,
                                  FieldTape<Scalar>* tape) {
  const FieldArch& arch = params.arch();
  if (features.cols() != arch.input_dim) {
    throw ArgumentError("field_forward: feature dimension " + std::to_string(features.cols()) +
                        " does not match the field input dimension " +
                        std::to_string(arch.input_dim));
  }
  const Index n = features.rows();
  if (noise.size() != 0 && noise.size() != n) {
    throw ArgumentError("field_forward: noise must have one value per point");
  }

  MatX<Scalar> pre(n, arch.width);
  pre.noalias() = features * params.input_weight();
  add_row_bias(pre, params.input_bias());
  MatX<Scalar> x = swish(pre);
  if (tape) {
    tape->features = features;
    tape->input_pre = std::move(pre);
    tape->blocks.assign(arch.blocks, {});
  }

  const Scalar eps = Scalar(arch.layer_norm_eps);
  for (int b = 0; b < arch.blocks; ++b) {
    const VecX<Scalar> mean = x.rowwise().mean();
    MatX<Scalar> normalized = x.colwise() - mean;
    const VecX<Scalar> inv_std =
        (normalized.array().square().rowwise().mean() + eps).rsqrt().matrix();
    normalized = normalized.array().colwise() * inv_std.array();
    MatX<Scalar> y = (normalized.array().rowwise() * params.ln_scale(b).row(0).array()).matrix();
    add_row_bias(y, params.ln_offset(b));

    MatX<Scalar> pre1(n, arch.bottleneck);
    pre1.noalias() = y * params.dense1_weight(b);
    add_row_bias(pre1, params.dense1_bias(b));
    const MatX<Scalar> act1 = swish(pre1);
    MatX<Scalar> pre2(n, arch.width);
    pre2.noalias() = act1 * params.dense2_weight(b);
    add_row_bias(pre2, params.dense2_bias(b));

    if (tape) {
      auto& blk = tape->blocks[b];
      blk.input = x;
      blk.normalized = std::move(normalized);
      blk.inv_std = inv_std;
      blk.pre1 = std::move(pre1);
      blk.pre2 = pre2;
    }
    x += swish(pre2);
  }

  FieldOutput<Scalar> out;
  VecX<Scalar> density_pre = x * params.density_weight().col(0);
  density_pre.array() += params.density_bias()(0, 0);
  if (noise.size() != 0) density_pre += noise;
  out.sigma = density_pre.unaryExpr([](Scalar v) { return softplus(v); });

  Points<Scalar> color_pre(n, 3);
  color_pre.noalias() = x * params.color_weight();
  color_pre.rowwise() += params.color_bias().row(0);
  out.rgb = sigmoid(color_pre.array()).matrix();

  if (tape) {
    tape->trunk = std::move(x);
    tape->density_pre = std::move(density_pre);
    tape->color_pre = std::move(color_pre);
  }
  return out;
}

template <typename Scalar>
FieldOutput<Scalar> field_forward(const FieldParams<Scalar>& params,
                                  const Eigen::Ref<const MatX<Scalar>>& features,
                                  Scalar perturb_sigma, RandomStream* rng) {
  VecX<Scalar> noise;
  if (perturb_sigma > Scalar(0)) {
    if (!rng) throw ArgumentError("field_forward: density perturbation requires a random stream");
    noise.resize(features.rows());
    for (Index i = 0; i < noise.size(); ++i) noise[i] = perturb_sigma * Scalar(rng->normal());
  }
  return field_forward<Scalar>(params, features, noise, nullptr);
}

template <typename Scalar>
void field_backward(const FieldParams<Scalar>& params, const FieldTape<Scalar>& tape,
                    const Eigen::Ref<const VecX<Scalar>>& d_sigma,
                    const Eigen::Ref<const Points<Scalar>>& d_rgb, FieldParams<Scalar>& grads) {
  const FieldArch& arch = params.arch();
  const Index n = tape.trunk.rows();
  if (d_sigma.size() != n || d_rgb.rows() != n) {
    throw ArgumentError("field_backward: upstream gradient size mismatch");
  }

  const VecX<Scalar> d_density_pre =
      (d_sigma.array() * sigmoid(tape.density_pre.array())).matrix();
  const auto color = sigmoid(tape.color_pre.array()).eval();
  const Points<Scalar> d_color_pre = (d_rgb.array() * color * (Scalar(1) - color)).matrix();

  grads.density_weight().col(0).noalias() += tape.trunk.transpose() * d_density_pre;
  grads.density_bias()(0, 0) += d_density_pre.sum();
  grads.color_weight().noalias() += tape.trunk.transpose() * d_color_pre;
  grads.color_bias().row(0) += d_color_pre.colwise().sum();

  MatX<Scalar> dx(n, arch.width);
  dx.noalias() = d_density_pre * params.density_weight().col(0).transpose();
  dx.noalias() += d_color_pre * params.color_weight().transpose();

  for (int b = arch.blocks - 1; b >= 0; --b) {
    const auto& blk = tape.blocks[b];
    const MatX<Scalar> d_pre2 = (dx.array() * swish_grad(blk.pre2).array()).matrix();
    const MatX<Scalar> act1 = swish(blk.pre1);
    grads.dense2_weight(b).noalias() += act1.transpose() * d_pre2;
    grads.dense2_bias(b).row(0) += d_pre2.colwise().sum();

    MatX<Scalar> d_act1(n, arch.bottleneck);
    d_act1.noalias() = d_pre2 * params.dense2_weight(b).transpose();
    const MatX<Scalar> d_pre1 = (d_act1.array() * swish_grad(blk.pre1).array()).matrix();

    MatX<Scalar> y = (blk.normalized.array().rowwise() * params.ln_scale(b).row(0).array()).matrix();
    add_row_bias(y, params.ln_offset(b));
    grads.dense1_weight(b).noalias() += y.transpose() * d_pre1;
    grads.dense1_bias(b).row(0) += d_pre1.colwise().sum();

    MatX<Scalar> dy(n, arch.width);
    dy.noalias() = d_pre1 * params.dense1_weight(b).transpose();
    grads.ln_scale(b).row(0) += (dy.array() * blk.normalized.array()).colwise().sum().matrix();
    grads.ln_offset(b).row(0) += dy.colwise().sum();

    const MatX<Scalar> d_norm =
        (dy.array().rowwise() * params.ln_scale(b).row(0).array()).matrix();
    const VecX<Scalar> mean_d = d_norm.rowwise().mean();
    const VecX<Scalar> mean_dn = (d_norm.array() * blk.normalized.array()).rowwise().mean();
    MatX<Scalar> d_in = d_norm.colwise() - mean_d;
    d_in -= (blk.normalized.array().colwise() * mean_dn.array()).matrix();
    dx += (d_in.array().colwise() * blk.inv_std.array()).matrix();
  }

  const MatX<Scalar> d_input_pre = (dx.array() * swish_grad(tape.input_pre).array()).matrix();
  grads.input_weight().noalias() += tape.features.transpose() * d_input_pre;
  grads.input_bias().row(0) += d_input_pre.colwise().sum();
}

template <typename Scalar>
VecX<Scalar> mask_density(const Eigen::Ref<const VecX<Scalar>>& sigma,
                          const Eigen::Ref<const Points<Scalar>>& positions, Scalar half_side) {
  if (sigma.size() != positions.rows()) {
    throw ArgumentError("mask_density: one position per density value required");
  }
  VecX<Scalar> out = sigma;
  for (Index i = 0; i < out.size(); ++i) {
    if (positions.row(i).cwiseAbs().maxCoeff() > half_side) out[i] = Scalar(0);
  }
  return out;
}

template <typename Scalar>
OriginTracker<Scalar> update_origin(const OriginTracker<Scalar>& tracker,
                                    const Vec3<double>& center_of_mass) {
  if (!center_of_mass.allFinite()) return tracker;
  OriginTracker<Scalar> next = tracker;
  const Vec3<double> blended =
      tracker.decay * tracker.origin.template cast<double>() + (1.0 - tracker.decay) * center_of_mass;
  next.origin = blended.cast<Scalar>();
  return next;
}

#define DREAMFIELD_INSTANTIATE(S)                                                               \
  template class FieldParams<S>;                                                               \
  template FieldParams<S> init_params<S>(RandomStream&, const FieldArch&);                     \
  template FieldOutput<S> field_forward<S>(const FieldParams<S>&,                              \
                                           const Eigen::Ref<const MatX<S>>&,                   \
                                           const Eigen::Ref<const VecX<S>>&, FieldTape<S>*);   \
  template FieldOutput<S> field_forward<S>(const FieldParams<S>&,                              \
                                           const Eigen::Ref<const MatX<S>>&, S, RandomStream*); \
  template void field_backward<S>(const FieldParams<S>&, const FieldTape<S>&,                  \
                                  const Eigen::Ref<const VecX<S>>&,                            \
                                  const Eigen::Ref<const Points<S>>&, FieldParams<S>&);        \
  template VecX<S> mask_density<S>(const Eigen::Ref<const VecX<S>>&,                           \
                                   const Eigen::Ref<const Points<S>>&, S);                     \
  template OriginTracker<S> update_origin<S>(const OriginTracker<S>&, const Vec3<double>&);

DREAMFIELD_INSTANTIATE(float)
DREAMFIELD_INSTANTIATE(double)

#undef DREAMFIELD_INSTANTIATE

}  // namespace dreamfield
