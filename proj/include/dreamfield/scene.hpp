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

#include "dreamfield/geometry.hpp"
#include "dreamfield/render.hpp"
#include "dreamfield/types.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace dreamfield {

/// Constant-color sphere whose density ramps linearly from 0 to `density`
/// across a shell of width `edge` centered on the surface.
struct Sphere {
  Vec3<double> center = Vec3<double>::Zero();
  double radius = 0.5;
  double density = 20.0;
  Vec3<double> color = Vec3<double>::Constant(0.5);
  double edge = 0.1;
};

/// The bundled reconstruction scene: two disjoint colored spheres in the cube.
std::vector<Sphere> two_sphere_scene();

/// Analytic field of a sphere set. Overlaps add density and mix colors by
/// density. Footprint variances are ignored.
template <typename Scalar>
FieldFunction<Scalar> sphere_field(std::vector<Sphere> spheres);

struct PosedView {
  std::string file;
  CameraPose pose;
};

/// One view per line: `file az_deg el_deg radius focal_scale`, separated by
/// commas and/or whitespace. Blank lines and lines starting with '#' are
/// skipped. Throws FormatError with the line number on malformed input.
std::vector<PosedView> read_pose_file(const std::filesystem::path& path);
void write_pose_file(const std::filesystem::path& path, const std::vector<PosedView>& views);

/// Images listed by a pose file, loaded relative to its directory.
struct PosedImages {
  std::vector<CameraPose> poses;
  std::vector<RgbImage<float>> images;
  std::vector<std::string> files;
};

PosedImages load_posed_images(const std::filesystem::path& pose_file);

struct SynthConfig {
  int resolution = 64;
  int samples = 512;
  std::vector<CameraPose> train_poses;
  std::vector<CameraPose> heldout_poses;
};

/// Eight training views alternating between 15 and 45 degrees elevation every
/// 45 degrees of azimuth, and one held-out view at azimuth 22.5, elevation 30.
SynthConfig default_synth_config();

/// Renders `spheres` over white from every pose (no jitter) and writes
/// train_XX.png, heldout_XX.png, poses.txt and heldout.txt into `dir`.
void synthesize_dataset(const std::filesystem::path& dir, const std::vector<Sphere>& spheres,
                        const SynthConfig& config);

/// Noise-free render of an analytic field over white.
RgbImage<float> render_analytic(const FieldFunction<float>& field, const CameraPose& pose,
                                int resolution, int samples);

}  // namespace dreamfield
