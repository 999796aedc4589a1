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

#include <numbers>

namespace dreamfield {

inline constexpr double kSqrt3 = std::numbers::sqrt3;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline constexpr double deg_to_rad(double degrees) { return degrees * std::numbers::pi / 180.0; }
inline constexpr double rad_to_deg(double radians) { return radians * 180.0 / std::numbers::pi; }

/// Camera orbiting the scene: spherical position around the look-at point.
/// Angles in radians, radius in world units.
struct CameraPose {
  double azimuth = 0.0;
  double elevation = deg_to_rad(30.0);
  double radius = 4.0;
  double focal_scale = 1.2;
};

/// Closed azimuth interval in radians. Width must not exceed 2π; sampled
/// azimuths are wrapped into [0, 2π).
struct AzimuthRange {
  double lo = 0.0;
  double hi = kTwoPi;

  double width() const { return hi - lo; }
};

template <typename Scalar>
struct Ray {
  Vec3<Scalar> origin;
  Vec3<Scalar> direction;
  Scalar t_near;
  Scalar t_far;
};

/// All rays of one pinhole image, pixel (y, x) at row y * width + x.
template <typename Scalar>
struct RayGrid {
  int height = 0;
  int width = 0;
  Points<Scalar> origins;
  Points<Scalar> directions;
  Scalar t_near = 0;
  Scalar t_far = 0;
  /// Radius of the pixel cone at unit distance along the ray.
  Scalar cone_radius = 0;

  Index size() const { return origins.rows(); }
  Ray<Scalar> ray(Index i) const {
    return {origins.row(i).transpose(), directions.row(i).transpose(), t_near, t_far};
  }
};

/// Jittered stratified samples along one ray.
template <typename Scalar>
struct SegmentSamples {
  VecX<Scalar> t;
  VecX<Scalar> delta;
  /// Isotropic std of the Gaussian standing in for each conical frustum.
  VecX<Scalar> radius;
};

struct CameraModel {
  /// Reference distance at which the unscaled field of view just contains the
  /// bounding sphere of the [-1, 1]^3 cube.
  double reference_radius = 4.0;
  double cube_half_side = 1.0;
  /// Gaussian std per unit of pixel width, 2/sqrt(12).
  double cone_radius_scale = 1.0 / std::numbers::sqrt3;
};

/// Camera position for `pose`, relative to the look-at point.
Vec3<double> camera_offset(const CameraPose& pose);

/// Half-width of the image plane at unit distance, tan(fov / 2).
double half_fov_tangent(const CameraPose& pose, const CameraModel& model = {});

CameraPose sample_pose(RandomStream& rng, const AzimuthRange& azimuth_range,
                       double elevation = deg_to_rad(30.0), double radius = 4.0,
                       double focal_scale = 1.2);

/// Pinhole rays looking at `origin_shift` from the pose position, +z up. Near
/// and far planes at radius ∓ √3.
template <typename Scalar>
RayGrid<Scalar> camera_rays(const CameraPose& pose, int resolution,
                            const Vec3<double>& origin_shift = Vec3<double>::Zero(),
                            const CameraModel& model = {});

/// One uniform sample per equal-width bin of [t_near, t_far]. With no rng the
/// samples sit at bin centers. delta_i = t_{i+1} - t_i and the last delta runs
/// to t_far.
template <typename Scalar>
SegmentSamples<Scalar> sample_segments(const Ray<Scalar>& ray, int n, RandomStream* rng,
                                       Scalar cone_radius = 0);

}  // namespace dreamfield
