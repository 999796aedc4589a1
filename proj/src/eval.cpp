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

#include "dreamfield/eval.hpp"

#include "dreamfield/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace dreamfield {

namespace {

void require_unit_rows(const Eigen::MatrixXf& m, const char* what) {
  for (Index r = 0; r < m.rows(); ++r) {
    if (std::abs(m.row(r).norm() - 1.0f) > 1e-3f) {
      throw ArgumentError(std::string(what) + " row " + std::to_string(r) + " is not unit norm");
    }
  }
}

}  // namespace

std::vector<int> rank_captions(const Eigen::VectorXf& query, const Eigen::MatrixXf& captions,
                               int k) {
  if (query.size() != captions.cols()) throw ArgumentError("rank_captions: dimension mismatch");
  const Eigen::VectorXf scores = captions * query;
  std::vector<int> order(std::size_t(captions.rows()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return scores[a] > scores[b]; });
  order.resize(std::size_t(std::clamp<Index>(k, 0, captions.rows())));
  return order;
}

double r_precision(const Eigen::MatrixXf& renders, const Eigen::MatrixXf& captions,
                   const std::vector<int>& source) {
  if (renders.cols() != captions.cols()) {
    throw ArgumentError("r_precision: render and caption embedding dimensions differ");
  }
  if (std::size_t(renders.rows()) != source.size()) {
    throw ArgumentError("r_precision: one source index per render is required");
  }
  if (renders.rows() == 0) throw ArgumentError("r_precision: no renders");
  if (captions.rows() < 2) throw ArgumentError("r_precision: caption pool needs at least 2 entries");
  require_unit_rows(renders, "render embedding");
  require_unit_rows(captions, "caption embedding");
  long hits = 0;
  for (Index i = 0; i < renders.rows(); ++i) {
    const int s = source[std::size_t(i)];
    if (s < 0 || s >= captions.rows()) throw ArgumentError("r_precision: source index out of range");
    if (rank_captions(renders.row(i).transpose(), captions, 1).front() == s) ++hits;
  }
  return double(hits) / double(renders.rows());
}

std::vector<std::string> read_caption_pool(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open caption pool '" + path.string() + "'");
  std::vector<std::string> captions;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") != std::string::npos) captions.push_back(line);
  }
  return captions;
}

ViewRender render_view(const Checkpoint& ck, const CameraPose& pose, int resolution, int samples,
                       int tile_rays) {
  const Vec3<double> origin = ck.tracker.origin.cast<double>();
  const RayGrid<float> rays = camera_rays<float>(pose, resolution, origin);
  RenderSettings settings;
  settings.samples = samples;
  settings.jitter = false;

  ViewRender view;
  view.pose = pose;
  view.rgb = RgbImage<float>(resolution, resolution);
  view.transmittance = GrayImage<float>(resolution, resolution);
  view.depth = GrayImage<float>(resolution, resolution);
  const Index total = rays.size();
  const Index tile = std::max(1, tile_rays);
  for (Index begin = 0; begin < total; begin += tile) {
    const Index len = std::min(tile, total - begin);
    RayGrid<float> part = rays;
    part.height = 1;
    part.width = int(len);
    part.origins = rays.origins.middleRows(begin, len);
    part.directions = rays.directions.middleRows(begin, len);
    const auto white = RgbImage<float>::constant(1, int(len), {1.0f, 1.0f, 1.0f});
    const RenderOutput<float> out =
        render_rays<float>(ck.params, ck.basis, part, settings, white, nullptr);
    view.rgb.data.middleRows(begin, len) = out.rgb.data;
    view.transmittance.data.middleRows(begin, len) = out.final_transmittance.data;
    view.depth.data.middleRows(begin, len) = out.depth.data;
  }
  return view;
}

std::vector<ViewRender> heldout_render(const Checkpoint& ck, const std::vector<double>& azimuths,
                                       const EvalRenderSettings& s) {
  std::vector<ViewRender> views;
  for (double az : azimuths) {
    CameraPose pose{az, s.elevation, s.radius, s.focal_scale};
    views.push_back(render_view(ck, pose, s.resolution, s.samples, s.tile_rays));
  }
  return views;
}

std::vector<double> turntable_azimuths(int frames) {
  if (frames < 1) throw ArgumentError("turntable: frames must be >= 1");
  std::vector<double> azimuths;
  for (int i = 0; i < frames; ++i) azimuths.push_back(kTwoPi * i / frames);
  return azimuths;
}

std::vector<ViewRender> turntable(const Checkpoint& ck, int frames, const EvalRenderSettings& s) {
  return heldout_render(ck, turntable_azimuths(frames), s);
}

void write_view(const std::filesystem::path& dir, const std::string& stem, const ViewRender& view) {
  std::filesystem::create_directories(dir);
  write_png_rgb(dir / (stem + ".png"), view.rgb);
  write_png_gray16(dir / (stem + "_depth.png"), view.depth, view.pose.radius - kSqrt3,
                   view.pose.radius + kSqrt3);
  write_png_gray16(dir / (stem + "_transmittance.png"), view.transmittance);
}

}  // namespace dreamfield
