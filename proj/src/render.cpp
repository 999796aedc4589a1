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

#include "dreamfield/render.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dreamfield {

namespace {

constexpr double kWeightFloor = 1e-8;

template <typename Scalar>
struct Composite {
  RenderOutput<Scalar> output;
  VecX<Scalar> final_transmittance;
};

template <typename Scalar>
Composite<Scalar> composite(const RaySamples<Scalar>& s, int height, int width,
                            const VecX<Scalar>& sigma, const Points<Scalar>& rgb,
                            const RgbImage<Scalar>& background) {
  const Index rays = s.ray_count();
  Composite<Scalar> c;
  c.output.rgb = RgbImage<Scalar>(height, width);
  c.output.final_transmittance = GrayImage<Scalar>(height, width);
  c.output.depth = GrayImage<Scalar>(height, width);
  c.final_transmittance.resize(rays);

  Vec3<double> com_sum = Vec3<double>::Zero();
  double weight_total = 0.0;
  for (Index r = 0; r < rays; ++r) {
    Scalar transmittance = 1;
    Vec3<Scalar> color = Vec3<Scalar>::Zero();
    Scalar depth_sum = 0;
    Scalar weight_sum = 0;
    for (Index k = s.ray_begin[r]; k < s.ray_begin[r + 1]; ++k) {
      const int slot = s.sample_slot[k];
      const Scalar optical = sigma[k] * s.delta(r, slot);
      const Scalar w = transmittance * -std::expm1(-optical);
      color += w * rgb.row(k).transpose();
      depth_sum += w * s.t(r, slot);
      weight_sum += w;
      com_sum += double(w) * s.positions.row(k).transpose().template cast<double>();
      transmittance *= std::exp(-optical);
    }
    weight_total += double(weight_sum);
    c.output.rgb.data.row(r) = color.transpose() + transmittance * background.data.row(r);
    c.output.final_transmittance.data(r, 0) = transmittance;
    c.output.depth.data(r, 0) =
        weight_sum > Scalar(kWeightFloor)
            ? depth_sum / std::max(weight_sum, Scalar(kWeightFloor))
            : s.t_far;
    c.final_transmittance[r] = transmittance;
  }
  if (weight_total > 0.0) c.output.center_of_mass = com_sum / weight_total;
  return c;
}

template <typename Scalar>
void check_background(const RgbImage<Scalar>& background, const RayGrid<Scalar>& rays) {
  if (background.height != rays.height || background.width != rays.width) {
    throw ArgumentError("render: background must match the render resolution");
  }
}

template <typename Scalar>
MatX<Scalar> gather_rows(const MatX<Scalar>& m, const std::vector<Index>& rows) {
  MatX<Scalar> out(rows.size(), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(i) = m.row(rows[i]);
  return out;
}

}  // namespace

template <typename Scalar>
TransmittanceWeights<Scalar> transmittance_weights(const Eigen::Ref<const VecX<Scalar>>& sigmas,
                                                   const Eigen::Ref<const VecX<Scalar>>& deltas) {
  if (sigmas.size() != deltas.size()) {
    throw ArgumentError("transmittance_weights: sigma and delta sizes differ");
  }
  const Index n = sigmas.size();
  TransmittanceWeights<Scalar> out;
  out.transmittance.resize(n);
  out.weights.resize(n);
  Scalar transmittance = 1;
  for (Index i = 0; i < n; ++i) {
    const Scalar optical = sigmas[i] * deltas[i];
    out.transmittance[i] = transmittance;
    out.weights[i] = transmittance * -std::expm1(-optical);
    transmittance *= std::exp(-optical);
  }
  out.final_transmittance = transmittance;
  return out;
}

template <typename Scalar>
RaySamples<Scalar> build_ray_samples(const RayGrid<Scalar>& rays, const RenderSettings& settings,
                                     RandomStream* jitter) {
  if (settings.samples < 1) throw ArgumentError("render: samples must be >= 1");
  const Index count = rays.size();
  const int n = settings.samples;
  const Scalar half_side = Scalar(settings.cube_half_side);

  RaySamples<Scalar> s;
  s.samples_per_ray = n;
  s.t_far = rays.t_far;
  s.t.resize(count, n);
  s.delta.resize(count, n);
  s.ray_begin.assign(count + 1, 0);

  std::vector<Vec3<Scalar>> positions;
  std::vector<Scalar> variances;
  positions.reserve(std::size_t(count) * n / 2);
  variances.reserve(std::size_t(count) * n / 2);

  RandomStream* stream = settings.jitter ? jitter : nullptr;
  for (Index r = 0; r < count; ++r) {
    const Ray<Scalar> ray = rays.ray(r);
    const SegmentSamples<Scalar> seg = sample_segments(ray, n, stream, rays.cone_radius);
    s.t.row(r) = seg.t.transpose();
    s.delta.row(r) = seg.delta.transpose();
    s.ray_begin[r] = Index(positions.size());
    for (int i = 0; i < n; ++i) {
      const Vec3<Scalar> p = ray.origin + seg.t[i] * ray.direction;
      if (p.cwiseAbs().maxCoeff() <= half_side) {
        positions.push_back(p);
        variances.push_back(seg.radius[i] * seg.radius[i]);
        s.sample_slot.push_back(i);
      }
    }
  }
  s.ray_begin[count] = Index(positions.size());

  s.positions.resize(Index(positions.size()), 3);
  s.variances.resize(Index(variances.size()));
  for (std::size_t k = 0; k < positions.size(); ++k) {
    s.positions.row(Index(k)) = positions[k].transpose();
    s.variances[Index(k)] = variances[k];
  }
  return s;
}

template <typename Scalar>
RenderOutput<Scalar> render_function(const RayGrid<Scalar>& rays, const RenderSettings& settings,
                                     const RgbImage<Scalar>& background, RandomStream* jitter,
                                     const FieldFunction<Scalar>& field) {
  check_background(background, rays);
  const RaySamples<Scalar> s = build_ray_samples(rays, settings, jitter);
  const Index total = s.inside_count();
  VecX<Scalar> sigma(total);
  Points<Scalar> rgb(total, 3);
  const Index chunk = std::max(1, settings.chunk_points);
  for (Index begin = 0; begin < total; begin += chunk) {
    const Index len = std::min(chunk, total - begin);
    VecX<Scalar> chunk_sigma;
    Points<Scalar> chunk_rgb;
    field(s.positions.middleRows(begin, len), s.variances.segment(begin, len), chunk_sigma,
          chunk_rgb);
    sigma.segment(begin, len) = chunk_sigma;
    rgb.middleRows(begin, len) = chunk_rgb;
  }
  return composite(s, rays.height, rays.width, sigma, rgb, background).output;
}

template <typename Scalar>
RenderOutput<Scalar> render_rays(const FieldParams<Scalar>& params,
                                 const FourierBasis<Scalar>& basis, const RayGrid<Scalar>& rays,
                                 const RenderSettings& settings,
                                 const RgbImage<Scalar>& background, RandomStream* jitter,
                                 Scalar perturb_sigma, RandomStream* perturb,
                                 RenderTape<Scalar>* tape) {
  check_background(background, rays);
  if (basis.feature_dim() != params.arch().input_dim) {
    throw ArgumentError("render_rays: encoding dimension does not match the field input");
  }
  RaySamples<Scalar> s = build_ray_samples(rays, settings, jitter);
  const Index total = s.inside_count();

  VecX<Scalar> noise;
  if (perturb_sigma > Scalar(0)) {
    if (!perturb) throw ArgumentError("render_rays: density perturbation requires a random stream");
    noise.resize(total);
    for (Index k = 0; k < total; ++k) noise[k] = perturb_sigma * Scalar(perturb->normal());
  }

  VecX<Scalar> sigma(total);
  Points<Scalar> rgb(total, 3);
  const Index chunk = std::max(1, settings.chunk_points);
  for (Index begin = 0; begin < total; begin += chunk) {
    const Index len = std::min(chunk, total - begin);
    const MatX<Scalar> features = encode_ipe_batch<Scalar>(
        s.positions.middleRows(begin, len), s.variances.segment(begin, len), basis);
    const VecX<Scalar> chunk_noise =
        noise.size() ? VecX<Scalar>(noise.segment(begin, len)) : VecX<Scalar>();
    FieldOutput<Scalar> out = field_forward<Scalar>(params, features, chunk_noise, nullptr);
    sigma.segment(begin, len) = out.sigma;
    rgb.middleRows(begin, len) = out.rgb;
  }

  Composite<Scalar> c = composite(s, rays.height, rays.width, sigma, rgb, background);
  if (tape) {
    tape->samples = std::move(s);
    tape->noise = std::move(noise);
    tape->sigma = std::move(sigma);
    tape->rgb = std::move(rgb);
    tape->background = background;
    tape->final_transmittance = std::move(c.final_transmittance);
    tape->chunk_points = settings.chunk_points;
  }
  return std::move(c.output);
}

template <typename Scalar>
void render_backward(const FieldParams<Scalar>& params, const FourierBasis<Scalar>& basis,
                     const RenderTape<Scalar>& tape, const RgbImage<Scalar>& d_rgb,
                     const GrayImage<Scalar>& d_transmittance, FieldParams<Scalar>& grads) {
  const RaySamples<Scalar>& s = tape.samples;
  const Index rays = s.ray_count();
  if (d_rgb.pixel_count() != rays || d_transmittance.pixel_count() != rays) {
    throw ArgumentError("render_backward: upstream gradient must match the render resolution");
  }
  const Index total = s.inside_count();
  VecX<Scalar> d_sigma = VecX<Scalar>::Zero(total);
  Points<Scalar> d_color = Points<Scalar>::Zero(total, 3);

  std::vector<Scalar> trans;
  std::vector<Scalar> weight;
  for (Index r = 0; r < rays; ++r) {
    const Index begin = s.ray_begin[r];
    const Index end = s.ray_begin[r + 1];
    if (begin == end) continue;
    const Vec3<Scalar> g = d_rgb.data.row(r).transpose();
    const Scalar g_t = d_transmittance.data(r, 0);
    if (g.isZero(0) && g_t == Scalar(0)) continue;

    // Recompute T_k and w_k along the ray; trans[k] holds T_{k+1}.
    trans.resize(std::size_t(end - begin));
    weight.resize(std::size_t(end - begin));
    Scalar transmittance = 1;
    for (Index k = begin; k < end; ++k) {
      const Scalar optical = tape.sigma[k] * s.delta(r, s.sample_slot[k]);
      weight[std::size_t(k - begin)] = transmittance * -std::expm1(-optical);
      transmittance *= std::exp(-optical);
      trans[std::size_t(k - begin)] = transmittance;
    }
    const Scalar background_term =
        transmittance * (g.dot(tape.background.data.row(r).transpose()) + g_t);

    Scalar suffix = 0;  // sum over later samples of w_i (g . c_i)
    for (Index k = end - 1; k >= begin; --k) {
      const std::size_t local = std::size_t(k - begin);
      const Scalar gc = g.dot(tape.rgb.row(k).transpose());
      const Scalar delta = s.delta(r, s.sample_slot[k]);
      d_sigma[k] = delta * (trans[local] * gc - suffix - background_term);
      d_color.row(k) = weight[local] * g.transpose();
      suffix += weight[local] * gc;
    }
  }
  if (!d_sigma.allFinite() || !d_color.allFinite()) {
    throw NumericalError("render_backward: non-finite gradient with respect to density or color");
  }

  std::vector<Index> active;
  active.reserve(std::size_t(total));
  for (Index k = 0; k < total; ++k) {
    if (d_sigma[k] != Scalar(0) || !d_color.row(k).isZero(0)) active.push_back(k);
  }

  const std::size_t chunk = std::size_t(std::max(1, tape.chunk_points));
  FieldTape<Scalar> field_tape;
  for (std::size_t begin = 0; begin < active.size(); begin += chunk) {
    const std::size_t len = std::min(chunk, active.size() - begin);
    std::vector<Index> rows(active.begin() + begin, active.begin() + begin + len);
    Points<Scalar> positions(Index(len), 3);
    VecX<Scalar> variances = VecX<Scalar>::Zero(Index(len));
    VecX<Scalar> noise(tape.noise.size() ? Index(len) : 0);
    VecX<Scalar> chunk_d_sigma = VecX<Scalar>::Zero(Index(len));
    Points<Scalar> chunk_d_color(Index(len), 3);
    for (std::size_t i = 0; i < len; ++i) {
      const Index k = rows[i];
      positions.row(Index(i)) = s.positions.row(k);
      variances[Index(i)] = s.variances[k];
      if (noise.size()) noise[Index(i)] = tape.noise[k];
      chunk_d_sigma[Index(i)] = d_sigma[k];
      chunk_d_color.row(Index(i)) = d_color.row(k);
    }
    const MatX<Scalar> features = encode_ipe_batch<Scalar>(positions, variances, basis);
    field_forward<Scalar>(params, features, noise, &field_tape);
    field_backward<Scalar>(params, field_tape, chunk_d_sigma, chunk_d_color, grads);
  }
}

template <typename Scalar>
double psnr(const RgbImage<Scalar>& a, const RgbImage<Scalar>& b) {
  if (a.height != b.height || a.width != b.width) throw ArgumentError("psnr: shape mismatch");
  const double mse = (a.data.template cast<double>() - b.data.template cast<double>())
                         .array()
                         .square()
                         .mean();
  if (mse <= 0.0) return std::numeric_limits<double>::infinity();
  return -10.0 * std::log10(mse);
}

#define DREAMFIELD_INSTANTIATE(S)                                                               \
  template TransmittanceWeights<S> transmittance_weights<S>(const Eigen::Ref<const VecX<S>>&,  \
                                                            const Eigen::Ref<const VecX<S>>&); \
  template RaySamples<S> build_ray_samples<S>(const RayGrid<S>&, const RenderSettings&,        \
                                              RandomStream*);                                  \
  template RenderOutput<S> render_function<S>(const RayGrid<S>&, const RenderSettings&,        \
                                              const RgbImage<S>&, RandomStream*,               \
                                              const FieldFunction<S>&);                        \
  template RenderOutput<S> render_rays<S>(const FieldParams<S>&, const FourierBasis<S>&,       \
                                          const RayGrid<S>&, const RenderSettings&,            \
                                          const RgbImage<S>&, RandomStream*, S, RandomStream*, \
                                          RenderTape<S>*);                                     \
  template void render_backward<S>(const FieldParams<S>&, const FourierBasis<S>&,              \
                                   const RenderTape<S>&, const RgbImage<S>&,                   \
                                   const GrayImage<S>&, FieldParams<S>&);                      \
  template double psnr<S>(const RgbImage<S>&, const RgbImage<S>&);

DREAMFIELD_INSTANTIATE(float)
DREAMFIELD_INSTANTIATE(double)

#undef DREAMFIELD_INSTANTIATE

}  // namespace dreamfield
