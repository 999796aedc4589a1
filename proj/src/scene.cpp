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

#include "dreamfield/scene.hpp"

#include "dreamfield/image_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace dreamfield {

std::vector<Sphere> two_sphere_scene() {
  Sphere a;
  a.center = {0.45, 0.30, 0.0};
  a.radius = 0.50;
  a.color = {0.90, 0.30, 0.20};
  Sphere b;
  b.center = {-0.45, -0.35, 0.05};
  b.radius = 0.45;
  b.color = {0.20, 0.50, 0.90};
  return {a, b};
}

template <typename Scalar>
FieldFunction<Scalar> sphere_field(std::vector<Sphere> spheres) {
  return [spheres = std::move(spheres)](const Points<Scalar>& positions, const VecX<Scalar>&,
                                        VecX<Scalar>& sigma, Points<Scalar>& rgb) {
    const Index n = positions.rows();
    sigma = VecX<Scalar>::Zero(n);
    rgb = Points<Scalar>::Zero(n, 3);
    for (Index i = 0; i < n; ++i) {
      const Vec3<double> p = positions.row(i).transpose().template cast<double>();
      double total = 0.0;
      Vec3<double> color = Vec3<double>::Zero();
      for (const Sphere& s : spheres) {
        const double ramp = std::clamp((s.radius - (p - s.center).norm()) / s.edge + 0.5, 0.0, 1.0);
        const double d = s.density * ramp;
        total += d;
        color += d * s.color;
      }
      sigma[i] = Scalar(total);
      rgb.row(i) = (total > 0.0 ? Vec3<double>(color / total) : Vec3<double>::Zero())
                       .transpose()
                       .template cast<Scalar>();
    }
  };
}

template FieldFunction<float> sphere_field<float>(std::vector<Sphere>);
template FieldFunction<double> sphere_field<double>(std::vector<Sphere>);

std::vector<PosedView> read_pose_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open pose file '" + path.string() + "'");
  std::vector<PosedView> views;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    std::string file;
    if (!(fields >> file) || file.front() == '#') continue;
    double az = 0, el = 0;
    PosedView view;
    view.file = file;
    std::string extra;
    if (!(fields >> az >> el >> view.pose.radius >> view.pose.focal_scale) || (fields >> extra)) {
      throw FormatError(path.string() + ":" + std::to_string(line_number) +
                        ": expected 'file azimuth elevation radius focal_scale'");
    }
    if (!(view.pose.radius > 0) || !(view.pose.focal_scale > 0)) {
      throw FormatError(path.string() + ":" + std::to_string(line_number) +
                        ": radius and focal_scale must be positive");
    }
    view.pose.azimuth = deg_to_rad(az);
    view.pose.elevation = deg_to_rad(el);
    views.push_back(view);
  }
  if (views.empty()) throw FormatError("pose file '" + path.string() + "' lists no views");
  return views;
}

void write_pose_file(const std::filesystem::path& path, const std::vector<PosedView>& views) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write '" + path.string() + "'");
  out << "# file, azimuth_deg, elevation_deg, radius, focal_scale\n";
  char buffer[256];
  for (const auto& v : views) {
    std::snprintf(buffer, sizeof buffer, "%s, %.12g, %.12g, %.12g, %.12g\n", v.file.c_str(),
                  rad_to_deg(v.pose.azimuth), rad_to_deg(v.pose.elevation), v.pose.radius,
                  v.pose.focal_scale);
    out << buffer;
  }
}

PosedImages load_posed_images(const std::filesystem::path& pose_file) {
  PosedImages out;
  const auto dir = pose_file.parent_path();
  for (const auto& view : read_pose_file(pose_file)) {
    out.poses.push_back(view.pose);
    out.files.push_back(view.file);
    out.images.push_back(read_png_rgb(dir / view.file));
    if (out.images.back().height != out.images.front().height ||
        out.images.back().width != out.images.front().width) {
      throw FormatError("'" + view.file + "' differs in size from the first view");
    }
  }
  return out;
}

SynthConfig default_synth_config() {
  SynthConfig config;
  for (int i = 0; i < 8; ++i) {
    CameraPose pose;
    pose.azimuth = deg_to_rad(45.0 * i);
    pose.elevation = deg_to_rad(i % 2 == 0 ? 15.0 : 45.0);
    config.train_poses.push_back(pose);
  }
  CameraPose heldout;
  heldout.azimuth = deg_to_rad(22.5);
  heldout.elevation = deg_to_rad(30.0);
  config.heldout_poses.push_back(heldout);
  return config;
}

RgbImage<float> render_analytic(const FieldFunction<float>& field, const CameraPose& pose,
                                int resolution, int samples) {
  RenderSettings settings;
  settings.samples = samples;
  settings.jitter = false;
  const auto rays = camera_rays<float>(pose, resolution);
  const auto white = RgbImage<float>::constant(resolution, resolution, {1.0f, 1.0f, 1.0f});
  return render_function<float>(rays, settings, white, nullptr, field).rgb;
}

void synthesize_dataset(const std::filesystem::path& dir, const std::vector<Sphere>& spheres,
                        const SynthConfig& config) {
  std::filesystem::create_directories(dir);
  const auto field = sphere_field<float>(spheres);
  auto write_set = [&](const std::vector<CameraPose>& poses, const std::string& prefix,
                       const std::string& pose_file) {
    std::vector<PosedView> views;
    for (std::size_t i = 0; i < poses.size(); ++i) {
      char name[64];
      std::snprintf(name, sizeof name, "%s_%02zu.png", prefix.c_str(), i);
      write_png_rgb(dir / name, render_analytic(field, poses[i], config.resolution, config.samples));
      views.push_back({name, poses[i]});
    }
    write_pose_file(dir / pose_file, views);
  };
  write_set(config.train_poses, "train", "poses.txt");
  write_set(config.heldout_poses, "heldout", "heldout.txt");
}

}  // namespace dreamfield
