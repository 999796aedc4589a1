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

#include "dreamfield/run_config.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>

namespace dreamfield {

namespace {

using json = nlohmann::json;

json to_object(const RunConfig& c) {
  return {
      {"prompt", c.prompt},
      {"seed", c.seed},
      {"iterations", c.iterations},
      {"train_resolution", c.train_resolution},
      {"crop_size", c.crop_size},
      {"samples", c.samples},
      {"sparsity",
       {{"mode", to_string(c.sparsity.mode)},
        {"tau", c.sparsity.tau_target},
        {"tau_start", c.sparsity.tau_start},
        {"anneal_iters", c.sparsity.anneal_iters},
        {"lambda", c.sparsity.lambda},
        {"perturb_sigma", c.sparsity.perturb_sigma},
        {"beta_clamp", c.sparsity.beta_clamp}}},
      {"scorer", to_string(c.scorer)},
      {"endpoint", c.endpoint},
      {"targets", c.targets},
      {"pose",
       {{"azimuth_range_deg", {rad_to_deg(c.azimuth_range.lo), rad_to_deg(c.azimuth_range.hi)}},
        {"elevation_deg", rad_to_deg(c.elevation)},
        {"radius", c.radius},
        {"focal_scale", c.focal_scale}}},
      {"encoding", {{"levels", c.levels}, {"features", c.features}}},
      {"arch",
       {{"width", c.arch.width},
        {"bottleneck", c.arch.bottleneck},
        {"blocks", c.arch.blocks},
        {"layer_norm_eps", c.arch.layer_norm_eps}}},
      {"optimizer",
       {{"lr_initial", c.lr.initial},
        {"lr_final", c.lr.final},
        {"warmup_iters", c.lr.warmup_iters},
        {"beta1", c.adam.beta1},
        {"beta2", c.adam.beta2},
        {"epsilon", c.adam.epsilon}}},
      {"origin", {{"decay", c.origin_decay}, {"track", c.track_origin}}},
      {"background",
       {{"mode", to_string(c.background)},
        {"blur_sigma", {c.background_spec.blur_sigma.lo, c.background_spec.blur_sigma.hi}},
        {"tile_size", {c.background_spec.tile_size.lo, c.background_spec.tile_size.hi}},
        {"fourier_max_frequency", c.background_spec.fourier_max_frequency},
        {"fourier_decay", c.background_spec.fourier_decay},
        {"noise_mean", c.background_spec.noise_mean},
        {"noise_std", c.background_spec.noise_std}}},
      {"checkpoint_every", c.checkpoint_every},
      {"render_chunk_points", c.render_chunk_points},
      {"out_dir", c.out_dir},
  };
}

RunConfig from_object(const json& j) {
  RunConfig c;
  c.prompt = j.at("prompt").get<std::string>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.iterations = j.at("iterations").get<long>();
  c.train_resolution = j.at("train_resolution").get<int>();
  c.crop_size = j.at("crop_size").get<int>();
  c.samples = j.at("samples").get<int>();
  const json& s = j.at("sparsity");
  c.sparsity.mode = parse_sparsity_mode(s.at("mode").get<std::string>());
  c.sparsity.tau_target = s.at("tau").get<double>();
  c.sparsity.tau_start = s.at("tau_start").get<double>();
  c.sparsity.anneal_iters = s.at("anneal_iters").get<int>();
  c.sparsity.lambda = s.at("lambda").get<double>();
  c.sparsity.perturb_sigma = s.at("perturb_sigma").get<double>();
  c.sparsity.beta_clamp = s.at("beta_clamp").get<double>();
  c.scorer = parse_scorer_kind(j.at("scorer").get<std::string>());
  c.endpoint = j.at("endpoint").get<std::string>();
  c.targets = j.at("targets").get<std::string>();
  const json& p = j.at("pose");
  c.azimuth_range.lo = deg_to_rad(p.at("azimuth_range_deg").at(0).get<double>());
  c.azimuth_range.hi = deg_to_rad(p.at("azimuth_range_deg").at(1).get<double>());
  c.elevation = deg_to_rad(p.at("elevation_deg").get<double>());
  c.radius = p.at("radius").get<double>();
  c.focal_scale = p.at("focal_scale").get<double>();
  c.levels = j.at("encoding").at("levels").get<int>();
  c.features = j.at("encoding").at("features").get<int>();
  const json& a = j.at("arch");
  c.arch.input_dim = 2 * c.features;
  c.arch.width = a.at("width").get<int>();
  c.arch.bottleneck = a.at("bottleneck").get<int>();
  c.arch.blocks = a.at("blocks").get<int>();
  c.arch.layer_norm_eps = a.at("layer_norm_eps").get<double>();
  const json& o = j.at("optimizer");
  c.lr.initial = o.at("lr_initial").get<double>();
  c.lr.final = o.at("lr_final").get<double>();
  c.lr.warmup_iters = o.at("warmup_iters").get<long>();
  c.adam.beta1 = o.at("beta1").get<double>();
  c.adam.beta2 = o.at("beta2").get<double>();
  c.adam.epsilon = o.at("epsilon").get<double>();
  c.origin_decay = j.at("origin").at("decay").get<double>();
  c.track_origin = j.at("origin").at("track").get<bool>();
  const json& b = j.at("background");
  c.background = parse_background_mode(b.at("mode").get<std::string>());
  c.background_spec.blur_sigma = {b.at("blur_sigma").at(0).get<double>(),
                                  b.at("blur_sigma").at(1).get<double>()};
  c.background_spec.tile_size = {b.at("tile_size").at(0).get<double>(),
                                 b.at("tile_size").at(1).get<double>()};
  c.background_spec.fourier_max_frequency = b.at("fourier_max_frequency").get<int>();
  c.background_spec.fourier_decay = b.at("fourier_decay").get<double>();
  c.background_spec.noise_mean = b.at("noise_mean").get<double>();
  c.background_spec.noise_std = b.at("noise_std").get<double>();
  c.checkpoint_every = j.at("checkpoint_every").get<int>();
  c.render_chunk_points = j.at("render_chunk_points").get<int>();
  c.out_dir = j.at("out_dir").get<std::string>();
  return c;
}

void check_known_keys(const json& patch, const json& schema, const std::string& prefix) {
  for (const auto& [key, value] : patch.items()) {
    const auto it = schema.find(key);
    if (it == schema.end()) throw ConfigError("unknown configuration key '" + prefix + key + "'");
    if (it->is_object()) {
      if (!value.is_object()) throw ConfigError("configuration key '" + prefix + key + "' must be an object");
      check_known_keys(value, *it, prefix + key + ".");
    }
  }
}

}  // namespace

ScorerKind parse_scorer_kind(std::string_view name) {
  if (name == "photometric") return ScorerKind::kPhotometric;
  if (name == "remote") return ScorerKind::kRemote;
  throw ConfigError("unknown scorer '" + std::string(name) + "' (expected photometric or remote)");
}

std::string to_string(ScorerKind kind) {
  return kind == ScorerKind::kPhotometric ? "photometric" : "remote";
}

BackgroundMode parse_background_mode(std::string_view name) {
  if (name == "random") return BackgroundMode::kRandom;
  if (name == "white") return BackgroundMode::kWhite;
  throw ConfigError("unknown background mode '" + std::string(name) + "' (expected random or white)");
}

std::string to_string(BackgroundMode mode) {
  return mode == BackgroundMode::kRandom ? "random" : "white";
}

void validate(const RunConfig& c) {
  if (c.iterations < 0) throw ConfigError("iterations must be >= 0");
  if (c.train_resolution < 1) throw ConfigError("train resolution must be >= 1");
  if (c.crop_size < 1 || c.crop_size > c.train_resolution) {
    throw ConfigError("crop size must lie in [1, train resolution]");
  }
  if (c.samples < 1) throw ConfigError("samples per ray must be >= 1");
  if (!(c.radius > std::sqrt(3.0))) throw ConfigError("camera radius must exceed sqrt(3)");
  if (!(c.focal_scale > 0)) throw ConfigError("focal scale must be positive");
  if (!(c.azimuth_range.width() >= 0) || c.azimuth_range.width() > kTwoPi + 1e-9) {
    throw ConfigError("azimuth range must be a sub-interval of 360 degrees");
  }
  if (c.levels < 0 || c.features < 1) throw ConfigError("encoding needs levels >= 0 and features >= 1");
  if (c.arch.input_dim != 2 * c.features) {
    throw ConfigError("field input width must equal twice the feature count");
  }
  validate(c.arch);
  validate(c.sparsity);
  if (!(c.lr.initial > 0) || !(c.lr.final > 0) || c.lr.warmup_iters < 0) {
    throw ConfigError("learning rates must be positive and warmup >= 0");
  }
  if (!(c.origin_decay > 0 && c.origin_decay < 1)) throw ConfigError("origin decay must lie in (0, 1)");
  if (c.background_spec.blur_sigma.lo < 0 || c.background_spec.blur_sigma.hi < c.background_spec.blur_sigma.lo) {
    throw ConfigError("blur sigma range must be a non-negative interval");
  }
  if (c.checkpoint_every < 0) throw ConfigError("checkpoint interval must be >= 0");
  if (c.render_chunk_points < 1) throw ConfigError("render chunk must be >= 1 point");
}

std::string to_json(const RunConfig& config) { return to_object(config).dump(2); }

RunConfig merge_json(const RunConfig& base, std::string_view text) {
  try {
    const json patch = json::parse(text);
    if (!patch.is_object()) throw ConfigError("configuration must be a JSON object");
    json merged = to_object(base);
    check_known_keys(patch, merged, "");
    merged.merge_patch(patch);
    return from_object(merged);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("configuration: ") + e.what());
  }
}

AzimuthRange parse_azimuth_range(std::string_view text) {
  auto number = [&](std::string_view s) {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    double v = 0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || end != s.data() + s.size() || !std::isfinite(v)) {
      throw ConfigError("bad azimuth range '" + std::string(text) + "'");
    }
    return v;
  };
  const auto comma = text.find(',');
  AzimuthRange range;
  if (comma == std::string_view::npos) {
    const double width = number(text);
    range = {deg_to_rad(-width / 2), deg_to_rad(width / 2)};
  } else {
    range = {deg_to_rad(number(text.substr(0, comma))), deg_to_rad(number(text.substr(comma + 1)))};
  }
  if (!(range.width() >= 0) || range.width() > kTwoPi + 1e-9) {
    throw ConfigError("azimuth range '" + std::string(text) + "' must span 0 to 360 degrees");
  }
  return range;
}

}  // namespace dreamfield
