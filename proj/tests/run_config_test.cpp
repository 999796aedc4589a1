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

#include <gtest/gtest.h>
#include <json.hpp>

namespace dreamfield {
namespace {

TEST(RunConfig, DefaultsValidate) { EXPECT_NO_THROW(validate(RunConfig{})); }

TEST(RunConfig, JsonRoundTrip) {
  RunConfig c;
  c.prompt = "a \"quoted\" prompt";
  c.seed = 123456789012345ull;
  c.iterations = 77;
  c.sparsity.mode = SparsityMode::kBetaPrior;
  c.sparsity.lambda = 0.25;
  c.scorer = ScorerKind::kPhotometric;
  c.azimuth_range = parse_azimuth_range("-45,45");
  c.lr = {2e-5, 3e-4, 10};
  c.track_origin = false;
  c.background = BackgroundMode::kWhite;
  const RunConfig back = merge_json(RunConfig{}, to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
  EXPECT_EQ(back.prompt, c.prompt);
  EXPECT_EQ(back.seed, c.seed);
  EXPECT_EQ(back.sparsity.mode, SparsityMode::kBetaPrior);
  EXPECT_NEAR(back.azimuth_range.lo, c.azimuth_range.lo, 1e-12);
  EXPECT_FALSE(back.track_origin);
}

TEST(RunConfig, PartialOverlayKeepsOtherFields) {
  RunConfig base;
  base.prompt = "keep me";
  const RunConfig c = merge_json(base, R"({"iterations": 5, "arch": {"width": 32}})");
  EXPECT_EQ(c.iterations, 5);
  EXPECT_EQ(c.arch.width, 32);
  EXPECT_EQ(c.arch.blocks, base.arch.blocks);
  EXPECT_EQ(c.prompt, "keep me");
}

TEST(RunConfig, FeaturesSetFieldInputWidth) {
  const RunConfig c = merge_json(RunConfig{}, R"({"encoding": {"features": 20}})");
  EXPECT_EQ(c.arch.input_dim, 40);
}

TEST(RunConfig, UnknownKeysAndBadTypesRejected) {
  EXPECT_THROW(merge_json(RunConfig{}, R"({"iteratons": 5})"), ConfigError);
  EXPECT_THROW(merge_json(RunConfig{}, R"({"arch": {"depth": 5}})"), ConfigError);
  EXPECT_THROW(merge_json(RunConfig{}, R"({"iterations": "many"})"), ConfigError);
  EXPECT_THROW(merge_json(RunConfig{}, R"({"arch": 3})"), ConfigError);
  EXPECT_THROW(merge_json(RunConfig{}, "[1, 2]"), ConfigError);
  EXPECT_THROW(merge_json(RunConfig{}, "{not json"), ConfigError);
  EXPECT_THROW(merge_json(RunConfig{}, R"({"scorer": "clip"})"), ConfigError);
}

TEST(RunConfig, InvalidSettingsRejected) {
  auto invalid = [](auto edit) {
    RunConfig c;
    edit(c);
    return c;
  };
  EXPECT_THROW(validate(invalid([](RunConfig& c) { c.crop_size = 200; })), ConfigError);
  EXPECT_THROW(validate(invalid([](RunConfig& c) { c.radius = 1.5; })), ConfigError);
  EXPECT_THROW(validate(invalid([](RunConfig& c) { c.iterations = -1; })), ConfigError);
  EXPECT_THROW(validate(invalid([](RunConfig& c) { c.origin_decay = 1.0; })), ConfigError);
  EXPECT_THROW(validate(invalid([](RunConfig& c) { c.arch.input_dim = 10; })), ConfigError);
  EXPECT_THROW(validate(invalid([](RunConfig& c) { c.lr.initial = 0; })), ConfigError);
}

TEST(AzimuthRange, WidthCenteredOnZero) {
  const AzimuthRange r = parse_azimuth_range("90");
  EXPECT_NEAR(r.lo, deg_to_rad(-45.0), 1e-12);
  EXPECT_NEAR(r.hi, deg_to_rad(45.0), 1e-12);
  EXPECT_NEAR(parse_azimuth_range("360").width(), kTwoPi, 1e-12);
  EXPECT_EQ(parse_azimuth_range("0").width(), 0.0);
}

TEST(AzimuthRange, ExplicitBounds) {
  const AzimuthRange r = parse_azimuth_range("10, 30");
  EXPECT_NEAR(r.lo, deg_to_rad(10.0), 1e-12);
  EXPECT_NEAR(r.hi, deg_to_rad(30.0), 1e-12);
}

TEST(AzimuthRange, Malformed) {
  for (const char* bad : {"", "abc", "400", "30,10", "1,2,3", "-5", "nan"}) {
    EXPECT_THROW(parse_azimuth_range(bad), ConfigError) << bad;
  }
}

}  // namespace
}  // namespace dreamfield
