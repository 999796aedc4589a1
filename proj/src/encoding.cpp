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

#include "dreamfield/encoding.hpp"

#include <cmath>
#include <limits>

namespace dreamfield {

template <typename Scalar>
FourierBasis<Scalar> sample_basis(RandomStream& rng, int levels, int count) {
  if (levels < 0) throw ArgumentError("sample_basis: levels must be >= 0");
  if (count < 1) throw ArgumentError("sample_basis: count must be >= 1");
  FourierBasis<Scalar> basis;
  basis.levels = levels;
  basis.frequencies.resize(count, 3);
  for (int j = 0; j < count; ++j) {
    Vec3<double> d;
    do {
      d = Vec3<double>(rng.normal(), rng.normal(), rng.normal());
    } while (d.norm() < 1e-12);
    d.normalize();
    const double u = levels * rng.uniform();
    basis.frequencies.row(j) = (std::exp2(u) * d).transpose().cast<Scalar>();
  }
  return basis;
}

template <typename Scalar>
VecX<Scalar> encode_ipe(const Vec3<Scalar>& mean, const Vec3<Scalar>& variance,
                        const FourierBasis<Scalar>& basis) {
  if ((variance.array() < Scalar(0)).any()) {
    throw ArgumentError("encode_ipe: variance must be non-negative");
  }
  const Index k = basis.count();
  const VecX<Scalar> phase = basis.frequencies * mean;
  const VecX<Scalar> quad = basis.frequencies.array().square().matrix() * variance;
  const auto attenuation = (Scalar(-0.5) * quad.array()).exp();
  VecX<Scalar> out(2 * k);
  out.head(k) = (phase.array().cos() * attenuation).matrix();
  out.tail(k) = (phase.array().sin() * attenuation).matrix();
  return out;
}

template <typename Scalar>
VecX<Scalar> encode_ipe(const Vec3<Scalar>& mean, Scalar variance,
                        const FourierBasis<Scalar>& basis) {
  return encode_ipe(mean, Vec3<Scalar>(Vec3<Scalar>::Constant(variance)), basis);
}

template <typename Scalar>
MatX<Scalar> encode_ipe_batch(const Eigen::Ref<const Points<Scalar>>& means,
                              const Eigen::Ref<const VecX<Scalar>>& variances,
                              const FourierBasis<Scalar>& basis) {
  if (variances.size() != means.rows()) {
    throw ArgumentError("encode_ipe_batch: one variance per point required");
  }
  if ((variances.array() < Scalar(0)).any()) {
    throw ArgumentError("encode_ipe: variance must be non-negative");
  }
  const Index k = basis.count();
  const Index n = means.rows();
  MatX<Scalar> phase(n, k);
  phase.noalias() = means * basis.frequencies.transpose();
  const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> norm2 =
      basis.frequencies.rowwise().squaredNorm().transpose();
  MatX<Scalar> attenuation(n, k);
  attenuation.noalias() = Scalar(-0.5) * variances * norm2;
  attenuation = attenuation.array().exp().matrix();

  MatX<Scalar> out(n, 2 * k);
  out.leftCols(k) = phase.array().cos() * attenuation.array();
  out.rightCols(k) = phase.array().sin() * attenuation.array();
  // Heavily attenuated features underflow into subnormals, which stall the
  // dense layers downstream.
  const Scalar tiny = std::numeric_limits<Scalar>::min();
  out = (out.array().abs() < tiny).select(Scalar(0), out.array()).matrix();
  return out;
}

template <typename Scalar>
Vec3<Scalar> encode_ipe_mean_gradient(const Vec3<Scalar>& mean, const Vec3<Scalar>& variance,
                                      const FourierBasis<Scalar>& basis,
                                      const VecX<Scalar>& upstream) {
  const Index k = basis.count();
  if (upstream.size() != 2 * k) throw ArgumentError("encode_ipe_mean_gradient: size mismatch");
  const VecX<Scalar> phase = basis.frequencies * mean;
  const VecX<Scalar> quad = basis.frequencies.array().square().matrix() * variance;
  const auto attenuation = (Scalar(-0.5) * quad.array()).exp();
  const VecX<Scalar> dphase = ((-phase.array().sin() * upstream.head(k).array() +
                                phase.array().cos() * upstream.tail(k).array()) *
                               attenuation)
                                  .matrix();
  return basis.frequencies.transpose() * dphase;
}

#define DREAMFIELD_INSTANTIATE(S)                                                              \
  template FourierBasis<S> sample_basis<S>(RandomStream&, int, int);                          \
  template VecX<S> encode_ipe<S>(const Vec3<S>&, const Vec3<S>&, const FourierBasis<S>&);     \
  template VecX<S> encode_ipe<S>(const Vec3<S>&, S, const FourierBasis<S>&);                  \
  template MatX<S> encode_ipe_batch<S>(const Eigen::Ref<const Points<S>>&,                    \
                                       const Eigen::Ref<const VecX<S>>&,                      \
                                       const FourierBasis<S>&);                               \
  template Vec3<S> encode_ipe_mean_gradient<S>(const Vec3<S>&, const Vec3<S>&,                \
                                               const FourierBasis<S>&, const VecX<S>&);

DREAMFIELD_INSTANTIATE(float)
DREAMFIELD_INSTANTIATE(double)

#undef DREAMFIELD_INSTANTIATE

}  // namespace dreamfield
