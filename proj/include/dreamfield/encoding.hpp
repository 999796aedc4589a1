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

namespace dreamfield {

/// Random Fourier frequencies w_j = 2^u d_j with u ~ U[0, L] and d_j uniform
/// on the unit sphere. Sampled once per run and then frozen.
template <typename Scalar>
struct FourierBasis {
  Points<Scalar> frequencies;  // count x 3, radians per world unit
  int levels = 0;

  Index count() const { return frequencies.rows(); }
  Index feature_dim() const { return 2 * count(); }
};

template <typename Scalar>
FourierBasis<Scalar> sample_basis(RandomStream& rng, int levels, int count);

/// Integrated positional encoding of an axis-aligned Gaussian N(mean, diag(variance)).
/// Returns [E cos(w_j.x) for all j, E sin(w_j.x) for all j], i.e. the plain
/// features attenuated by exp(-w_j^T S w_j / 2).
template <typename Scalar>
VecX<Scalar> encode_ipe(const Vec3<Scalar>& mean, const Vec3<Scalar>& variance,
                        const FourierBasis<Scalar>& basis);

/// Isotropic overload.
template <typename Scalar>
VecX<Scalar> encode_ipe(const Vec3<Scalar>& mean, Scalar variance,
                        const FourierBasis<Scalar>& basis);

/// Batched isotropic encoding: one point per row of `means`, one variance per
/// point. Output is points x (2 * count).
template <typename Scalar>
MatX<Scalar> encode_ipe_batch(const Eigen::Ref<const Points<Scalar>>& means,
                              const Eigen::Ref<const VecX<Scalar>>& variances,
                              const FourierBasis<Scalar>& basis);

/// d(features . upstream)/d(mean) for the diagonal-covariance encoding.
template <typename Scalar>
Vec3<Scalar> encode_ipe_mean_gradient(const Vec3<Scalar>& mean, const Vec3<Scalar>& variance,
                                      const FourierBasis<Scalar>& basis,
                                      const VecX<Scalar>& upstream);

}  // namespace dreamfield
