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

#include "dreamfield/checkpoint.hpp"
#include "dreamfield/geometry.hpp"
#include "dreamfield/render.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace dreamfield {

/// Caption indices ordered by descending inner product with `query`; equal
/// scores keep ascending index order. At most `k` entries.
std::vector<int> rank_captions(const Eigen::VectorXf& query, const Eigen::MatrixXf& captions,
                               int k);

/// Fraction of renders whose top-ranked caption (ties to the lowest index) is
/// their source caption. Rows of both matrices are embeddings and must be unit
/// norm within 1e-3.
double r_precision(const Eigen::MatrixXf& render_embeddings,
                   const Eigen::MatrixXf& caption_embeddings, const std::vector<int>& source_index);

/// One caption per non-empty line.
std::vector<std::string> read_caption_pool(const std::filesystem::path& path);

struct EvalRenderSettings {
  double elevation = deg_to_rad(45.0);
  double radius = 4.0;
  double focal_scale = 1.2;
  int resolution = 168;
  int samples = 512;
  /// Rays rendered per batch. Bounds peak memory; pixels agree across tile
  /// sizes up to float rounding.
  int tile_rays = 4096;
};

struct ViewRender {
  CameraPose pose;
  RgbImage<float> rgb;
  GrayImage<float> transmittance;
  GrayImage<float> depth;
};

/// Noise-free white-background render of a checkpoint from `pose`, looking
/// at the tracked origin.
ViewRender render_view(const Checkpoint& checkpoint, const CameraPose& pose, int resolution,
                       int samples, int tile_rays = 4096);

std::vector<ViewRender> heldout_render(const Checkpoint& checkpoint,
                                       const std::vector<double>& azimuths,
                                       const EvalRenderSettings& settings = {});

/// `frames` equally spaced azimuths starting at 0.
std::vector<double> turntable_azimuths(int frames);

std::vector<ViewRender> turntable(const Checkpoint& checkpoint, int frames,
                                  const EvalRenderSettings& settings = {});

/// Writes <stem>.png (RGB), <stem>_depth.png (16-bit, [t_near, t_far]) and
/// <stem>_transmittance.png (16-bit).
void write_view(const std::filesystem::path& dir, const std::string& stem, const ViewRender& view);

}  // namespace dreamfield
