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

#include "dreamfield/geometry.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <string>

namespace dreamfield {

Vec3<double> camera_offset(const CameraPose& pose) {
  const double ce = std::cos(pose.elevation);
  return pose.radius *
         Vec3<double>(ce * std::cos(pose.azimuth), ce * std::sin(pose.azimuth),
                      std::sin(pose.elevation));
}

double half_fov_tangent(const CameraPose& pose, const CameraModel& model) {
  const double bounding = kSqrt3 * model.cube_half_side;
  const double sin_half = bounding / model.reference_radius;
  const double base = sin_half / std::sqrt(1.0 - sin_half * sin_half);
  return base / pose.focal_scale;
}

CameraPose sample_pose(RandomStream& rng, const AzimuthRange& azimuth_range, double elevation,
                       double radius, double focal_scale) {
  const double width = azimuth_range.width();
  if (!(width >= 0.0)) {
    throw ConfigError("azimuth range is empty: [" + std::to_string(rad_to_deg(azimuth_range.lo)) +
                      ", " + std::to_string(rad_to_deg(azimuth_range.hi)) + "] degrees");
  }
  if (width > kTwoPi + 1e-12) {
    throw ConfigError("azimuth range wider than 360 degrees");
  }
  if (!(radius > 0.0) || !(focal_scale > 0.0)) {
    throw ConfigError("camera radius and focal scale must be positive");
  }
  double azimuth = azimuth_range.lo + width * rng.uniform();
  azimuth = std::fmod(azimuth, kTwoPi);
  if (azimuth < 0.0) azimuth += kTwoPi;
  return {azimuth, elevation, radius, focal_scale};
}

template <typename Scalar>
RayGrid<Scalar> camera_rays(const CameraPose& pose, int resolution,
                            const Vec3<double>& origin_shift, const CameraModel& model) {
  if (resolution < 1) throw ArgumentError("camera_rays: resolution must be >= 1");
  if (!(pose.radius > 0.0) || !(pose.focal_scale > 0.0)) {
    throw ArgumentError("camera_rays: radius and focal scale must be positive");
  }

  const Vec3<double> position = origin_shift + camera_offset(pose);
  const Vec3<double> forward = (origin_shift - position).normalized();
  Vec3<double> right = forward.cross(Vec3<double>::UnitZ());
  if (right.norm() < 1e-12) right = Vec3<double>::UnitY().cross(forward);
  right.normalize();
  const Vec3<double> up = right.cross(forward);

  const double tan_half = half_fov_tangent(pose, model);
  const double pixel_size = 2.0 * tan_half / resolution;

  RayGrid<Scalar> grid;
  grid.height = resolution;
  grid.width = resolution;
  const Index count = Index(resolution) * resolution;
  grid.origins.resize(count, 3);
  grid.directions.resize(count, 3);
  const double bounding = kSqrt3 * model.cube_half_side;
  grid.t_near = Scalar(pose.radius - bounding);
  grid.t_far = Scalar(pose.radius + bounding);
  grid.cone_radius = Scalar(model.cone_radius_scale * pixel_size);

  const Eigen::Matrix<Scalar, 1, 3> origin_row = position.transpose().cast<Scalar>();
  for (int y = 0; y < resolution; ++y) {
    const double v = tan_half - (y + 0.5) * pixel_size;
    for (int x = 0; x < resolution; ++x) {
      const double u = -tan_half + (x + 0.5) * pixel_size;
      const Vec3<double> dir = (forward + u * right + v * up).normalized();
      const Index i = Index(y) * resolution + x;
      grid.origins.row(i) = origin_row;
      grid.directions.row(i) = dir.transpose().cast<Scalar>();
    }
  }
  return grid;
}

template <typename Scalar>
SegmentSamples<Scalar> sample_segments(const Ray<Scalar>& ray, int n, RandomStream* rng,
                                       Scalar cone_radius) {
  if (n < 1) throw ArgumentError("sample_segments: n must be >= 1");
  SegmentSamples<Scalar> s;
  s.t.resize(n);
  s.delta.resize(n);
  const double t_near = double(ray.t_near);
  const double bin = (double(ray.t_far) - t_near) / n;
  for (int i = 0; i < n; ++i) {
    const double u = rng ? rng->uniform() : 0.5;
    s.t[i] = Scalar(t_near + (i + u) * bin);
  }
  for (int i = 0; i + 1 < n; ++i) s.delta[i] = s.t[i + 1] - s.t[i];
  s.delta[n - 1] = ray.t_far - s.t[n - 1];
  s.radius = cone_radius * s.t;
  return s;
}

template RayGrid<float> camera_rays<float>(const CameraPose&, int, const Vec3<double>&,
                                           const CameraModel&);
template RayGrid<double> camera_rays<double>(const CameraPose&, int, const Vec3<double>&,
                                             const CameraModel&);
template SegmentSamples<float> sample_segments<float>(const Ray<float>&, int, RandomStream*,
                                                      float);
template SegmentSamples<double> sample_segments<double>(const Ray<double>&, int, RandomStream*,
                                                        double);

}  // namespace dreamfield
