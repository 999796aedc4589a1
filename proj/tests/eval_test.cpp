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
#include "dreamfield/scene.hpp"
#include "dreamfield/train.hpp"

#include "fixtures.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <Eigen/QR>

#include <fstream>

namespace dreamfield {
namespace {

Eigen::MatrixXf random_unit_rows(RandomStream& rng, Index rows, Index dim) {
  Eigen::MatrixXf m(rows, dim);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = float(rng.normal());
  m.rowwise().normalize();
  return m;
}

Eigen::MatrixXf random_orthogonal(RandomStream& rng, Index dim) {
  Eigen::MatrixXd g(dim, dim);
  for (Index i = 0; i < g.size(); ++i) g.data()[i] = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  // Fix the sign convention so Q is Haar distributed.
  const Eigen::VectorXd d = qr.matrixQR().diagonal().array().sign();
  return (q * d.asDiagonal()).cast<float>();
}

TEST(RPrecision, PerfectRetrieval) {
  Eigen::MatrixXf captions(2, 2);
  captions << 1, 0, 0, 1;
  const Eigen::MatrixXf renders = captions.row(0);
  EXPECT_EQ(r_precision(renders, captions, {0}), 1.0);
}

TEST(RPrecision, GuaranteedMiss) {
  Eigen::MatrixXf captions(2, 2);
  captions << 1, 0, 0, 1;
  const Eigen::MatrixXf renders = captions.row(1);
  EXPECT_EQ(r_precision(renders, captions, {0}), 0.0);
}

TEST(RPrecision, TiesGoToLowestIndex) {
  Eigen::MatrixXf captions(3, 2);
  captions << 0, 1, 1, 0, 1, 0;
  Eigen::MatrixXf renders(1, 2);
  renders << 1, 0;
  EXPECT_EQ(r_precision(renders, captions, {1}), 1.0);
  EXPECT_EQ(r_precision(renders, captions, {2}), 0.0);
  EXPECT_EQ(rank_captions(renders.row(0).transpose(), captions, 3), (std::vector<int>{1, 2, 0}));
}

TEST(RPrecision, MatchesBruteForce) {
  RandomStream rng(21, 0, StreamTag::kTest);
  const Eigen::MatrixXf captions = random_unit_rows(rng, 153, 64);
  const Eigen::MatrixXf renders = random_unit_rows(rng, 50, 64);
  std::vector<int> source(50);
  int expected_hits = 0;
  for (int i = 0; i < 50; ++i) {
    const int top = oracle::brute_force_top1(renders.row(i).transpose(), captions);
    // Half the renders are labeled with their brute-force winner.
    source[std::size_t(i)] = i % 2 == 0 ? top : int(rng.uniform_index(153));
    expected_hits += source[std::size_t(i)] == top;
    EXPECT_EQ(rank_captions(renders.row(i).transpose(), captions, 1).front(), top);
  }
  EXPECT_EQ(r_precision(renders, captions, source), double(expected_hits) / 50);
}

TEST(RPrecision, RankingIsSortedByScore) {
  RandomStream rng(22, 0, StreamTag::kTest);
  const Eigen::MatrixXf captions = random_unit_rows(rng, 153, 32);
  const Eigen::VectorXf q = random_unit_rows(rng, 1, 32).row(0).transpose();
  const auto order = rank_captions(q, captions, 153);
  ASSERT_EQ(order.size(), 153u);
  for (std::size_t i = 1; i < order.size(); ++i) {
    EXPECT_GE(captions.row(order[i - 1]).dot(q), captions.row(order[i]).dot(q));
  }
  EXPECT_EQ(rank_captions(q, captions, 5).size(), 5u);
}

TEST(RPrecision, InvariantUnderCommonRotation) {
  RandomStream rng(23, 0, StreamTag::kTest);
  const Eigen::MatrixXf captions = random_unit_rows(rng, 153, 16);
  std::vector<int> source(50);
  for (auto& s : source) s = int(rng.uniform_index(153));
  // Renders near their source caption so a fraction of them hit.
  Eigen::MatrixXf renders(50, 16);
  for (int i = 0; i < 50; ++i) {
    renders.row(i) = captions.row(source[std::size_t(i)]) + 1.5f * random_unit_rows(rng, 1, 16);
  }
  renders.rowwise().normalize();
  const double base = r_precision(renders, captions, source);
  EXPECT_GT(base, 0.0);
  EXPECT_LT(base, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::MatrixXf q = random_orthogonal(rng, 16);
    EXPECT_EQ(r_precision(renders * q, captions * q, source), base);
  }
}

TEST(RPrecision, SelfEmbeddingsAlwaysHit) {
  RandomStream rng(24, 0, StreamTag::kTest);
  const Eigen::MatrixXf captions = random_unit_rows(rng, 153, 32);
  std::vector<int> source = {0, 5, 152, 77};
  Eigen::MatrixXf renders(4, 32);
  for (int i = 0; i < 4; ++i) renders.row(i) = captions.row(source[std::size_t(i)]);
  EXPECT_EQ(r_precision(renders, captions, source), 1.0);
}

TEST(RPrecision, RejectsBadInput) {
  Eigen::MatrixXf captions = Eigen::MatrixXf::Identity(3, 3);
  EXPECT_THROW(r_precision(Eigen::MatrixXf::Identity(1, 4), captions, {0}), ArgumentError);
  EXPECT_THROW(r_precision(captions.topRows(1), captions, {0, 1}), ArgumentError);
  EXPECT_THROW(r_precision(captions.topRows(1), captions, {3}), ArgumentError);
  EXPECT_THROW(r_precision(2 * captions.topRows(1), captions, {0}), ArgumentError);
}

TEST(CaptionPool, SkipsBlankLines) {
  const auto dir = testing::temp_dir("captions");
  std::ofstream(dir / "pool.txt") << "a red apple\n\n  \nblue chair\r\nlast line";
  EXPECT_EQ(read_caption_pool(dir / "pool.txt"),
            (std::vector<std::string>{"a red apple", "blue chair", "last line"}));
  EXPECT_ANY_THROW(read_caption_pool(dir / "missing.txt"));
}

TEST(Turntable, EqualSpacing) {
  const auto four = turntable_azimuths(4);
  ASSERT_EQ(four.size(), 4u);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(four[std::size_t(i)], deg_to_rad(90.0 * i), 1e-12);
  EXPECT_EQ(turntable_azimuths(1), std::vector<double>{0.0});
  EXPECT_THROW(turntable_azimuths(0), ArgumentError);
}

Checkpoint empty_checkpoint() {
  Checkpoint ck = init_run(testing::tiny_run_config());
  for (auto& t : ck.params.tensors()) t.value.setZero();
  ck.params.density_bias()(0, 0) = -200.0f;
  return ck;
}

TEST(HeldoutRender, EmptyFieldIsWhite) {
  EvalRenderSettings settings;
  settings.resolution = 8;
  settings.samples = 32;
  const auto views = heldout_render(empty_checkpoint(), {0.0, 1.0, 2.0}, settings);
  ASSERT_EQ(views.size(), 3u);
  for (const auto& v : views) {
    EXPECT_EQ(v.pose.elevation, deg_to_rad(45.0));
    EXPECT_TRUE((v.rgb.data.array() == 1.0f).all());
    EXPECT_TRUE((v.transmittance.data.array() == 1.0f).all());
  }
}

TEST(HeldoutRender, DeterministicAndFrameCount) {
  Checkpoint ck = init_run(testing::tiny_run_config());
  ck.params.density_bias()(0, 0) = 1.0f;
  EvalRenderSettings settings;
  settings.resolution = 8;
  settings.samples = 16;
  const auto azimuths = turntable_azimuths(8);
  const auto a = heldout_render(ck, azimuths, settings);
  const auto b = heldout_render(ck, azimuths, settings);
  ASSERT_EQ(a.size(), 8u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_TRUE((a[i].rgb.data.array() == b[i].rgb.data.array()).all());
    EXPECT_TRUE((a[i].rgb.data.array() < 1.0f).any());
  }
}

TEST(HeldoutRender, TilingAgreesToRounding) {
  Checkpoint ck = init_run(testing::tiny_run_config());
  ck.params.density_bias()(0, 0) = 1.0f;
  const CameraPose pose{0.4, 0.3, 4.0, 1.2};
  const auto whole = render_view(ck, pose, 9, 16, 4096);
  const auto tiled = render_view(ck, pose, 9, 16, 7);
  EXPECT_LT((whole.rgb.data - tiled.rgb.data).cwiseAbs().maxCoeff(), 1e-5f);
  EXPECT_LT((whole.depth.data - tiled.depth.data).cwiseAbs().maxCoeff(), 1e-5f);
}

TEST(Turntable, MirrorSymmetricSceneFlipsAtHalfTurn) {
  // Symmetric under x -> -x: the view from the opposite side is a mirror image.
  std::vector<Sphere> scene(3);
  scene[0].center = {0.45, 0.3, 0.0};
  scene[0].color = {0.9, 0.2, 0.1};
  scene[0].radius = 0.3;
  scene[1].center = {-0.45, 0.3, 0.0};
  scene[1].color = {0.9, 0.2, 0.1};
  scene[1].radius = 0.3;
  scene[2].center = {0.0, -0.4, 0.2};
  scene[2].color = {0.1, 0.3, 0.9};
  scene[2].radius = 0.35;
  const auto field = sphere_field<float>(scene);
  const int res = 32;
  const auto azimuths = turntable_azimuths(2);
  const CameraPose front{azimuths[0], deg_to_rad(45.0), 4.0, 1.2};
  const CameraPose back{azimuths[1], deg_to_rad(45.0), 4.0, 1.2};
  const auto a = render_analytic(field, front, res, 256);
  const auto b = render_analytic(field, back, res, 256);
  double max_diff = 0, asymmetry = 0;
  for (int y = 0; y < res; ++y) {
    for (int x = 0; x < res; ++x) {
      max_diff = std::max(max_diff, double((a.pixel(y, x) - b.pixel(y, res - 1 - x)).cwiseAbs().maxCoeff()));
      asymmetry = std::max(asymmetry, double((a.pixel(y, x) - a.pixel(y, res - 1 - x)).cwiseAbs().maxCoeff()));
    }
  }
  EXPECT_LT(max_diff, 1e-3);
  EXPECT_GT(asymmetry, 0.1);
}

TEST(WriteView, WritesThreeImages) {
  const auto dir = testing::temp_dir("write_view");
  EvalRenderSettings settings;
  settings.resolution = 4;
  settings.samples = 8;
  const auto views = heldout_render(empty_checkpoint(), {0.0}, settings);
  write_view(dir, "frame_000", views.front());
  for (const char* name : {"frame_000.png", "frame_000_depth.png", "frame_000_transmittance.png"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / name)) << name;
  }
}

}  // namespace
}  // namespace dreamfield
