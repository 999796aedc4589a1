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

#include "dreamfield/checkpoint.hpp"
#include "dreamfield/train.hpp"

#include "fixtures.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <fstream>
#include <sstream>

namespace dreamfield {
namespace {

using testing::temp_dir;
using testing::tiny_run_config;
using testing::tiny_targets;

bool bit_equal(const MatX<float>& a, const MatX<float>& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(float) * std::size_t(a.size())) == 0;
}

Checkpoint trained_state() {
  Checkpoint state = init_run(tiny_run_config());
  RandomStream rng(9, 0, StreamTag::kTest);
  for (auto& t : state.params.tensors()) {
    for (Index i = 0; i < t.value.size(); ++i) t.value.data()[i] = float(rng.normal());
  }
  for (auto* moments : {&state.optim.first_moment, &state.optim.second_moment}) {
    for (auto& m : *moments) {
      for (Index i = 0; i < m.size(); ++i) m.data()[i] = float(rng.uniform());
    }
  }
  state.optim.step = 37;
  state.iteration = 37;
  state.tracker.origin = Vec3<float>(0.125f, -0.0625f, 1e-7f);
  state.config_json = to_json(tiny_run_config());
  return state;
}

TEST(Checkpoint, RoundTripIsBitExact) {
  const auto dir = temp_dir("ckpt_roundtrip");
  const Checkpoint a = trained_state();
  save_checkpoint(dir / "a.ckpt", a);
  const Checkpoint b = load_checkpoint(dir / "a.ckpt");
  EXPECT_EQ(b.iteration, a.iteration);
  EXPECT_EQ(b.optim.step, a.optim.step);
  EXPECT_EQ(nlohmann::json::parse(b.config_json), nlohmann::json::parse(a.config_json));
  EXPECT_EQ(b.params.arch(), a.params.arch());
  EXPECT_EQ(b.basis.levels, a.basis.levels);
  EXPECT_TRUE(bit_equal(b.basis.frequencies, a.basis.frequencies));
  EXPECT_EQ(b.tracker.origin, a.tracker.origin);
  EXPECT_EQ(b.tracker.decay, a.tracker.decay);
  ASSERT_EQ(b.params.tensors().size(), a.params.tensors().size());
  for (std::size_t i = 0; i < a.params.tensors().size(); ++i) {
    EXPECT_EQ(b.params.tensors()[i].name, a.params.tensors()[i].name);
    EXPECT_TRUE(bit_equal(b.params.tensors()[i].value, a.params.tensors()[i].value));
    EXPECT_TRUE(bit_equal(b.optim.first_moment[i], a.optim.first_moment[i]));
    EXPECT_TRUE(bit_equal(b.optim.second_moment[i], a.optim.second_moment[i]));
  }
}

TEST(Checkpoint, ArchitectureMismatchIsShapeError) {
  const auto dir = temp_dir("ckpt_mismatch");
  save_checkpoint(dir / "a.ckpt", trained_state());
  FieldArch other = trained_state().params.arch();
  other.width = 32;
  EXPECT_THROW(load_checkpoint(dir / "a.ckpt", other), ShapeMismatchError);
}

TEST(Checkpoint, CorruptFilesAreFormatErrors) {
  const auto dir = temp_dir("ckpt_corrupt");
  save_checkpoint(dir / "a.ckpt", trained_state());
  std::string bytes;
  {
    std::ifstream in(dir / "a.ckpt", std::ios::binary);
    bytes.assign(std::istreambuf_iterator<char>(in), {});
  }
  auto write = [&](const std::string& name, const std::string& content) {
    std::ofstream(dir / name, std::ios::binary) << content;
    return dir / name;
  };
  EXPECT_THROW(load_checkpoint(write("short.ckpt", bytes.substr(0, bytes.size() - 5))),
               FormatError);
  EXPECT_THROW(load_checkpoint(write("magic.ckpt", "NOT-A-CKPT 1\n{}\n")), FormatError);
  std::string future = bytes;
  future.replace(future.find(" 1\n"), 3, " 9\n");
  EXPECT_THROW(load_checkpoint(write("version.ckpt", future)), FormatError);
  EXPECT_THROW(load_checkpoint(write("empty.ckpt", "")), FormatError);
  EXPECT_THROW(load_checkpoint(dir / "missing.ckpt"), FormatError);
}

TEST(Checkpoint, SaveLeavesNoTemporaryFile) {
  const auto dir = temp_dir("ckpt_atomic");
  save_checkpoint(dir / "a.ckpt", trained_state());
  save_checkpoint(dir / "a.ckpt", trained_state());
  int files = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir)) ++files;
  EXPECT_EQ(files, 1);
}

struct RunLog {
  std::string metrics;
  Checkpoint state;
};

RunLog run(long until, Checkpoint state, const std::filesystem::path& dir = {}) {
  const RunConfig config = tiny_run_config();
  const auto targets = tiny_targets(config.train_resolution);
  PhotometricScorer<float> scorer(targets.images, config.crop_size);
  std::ostringstream metrics;
  TrainOptions options;
  options.until = until;
  options.metrics = &metrics;
  options.views = &targets.poses;
  options.checkpoint_dir = dir;
  train(config, state, scorer, options);
  return {metrics.str(), std::move(state)};
}

TEST(Determinism, IdenticalSeedsGiveIdenticalMetrics) {
  const RunLog a = run(12, init_run(tiny_run_config()));
  const RunLog b = run(12, init_run(tiny_run_config()));
  EXPECT_FALSE(a.metrics.empty());
  EXPECT_EQ(a.metrics, b.metrics);
  for (std::size_t i = 0; i < a.state.params.tensors().size(); ++i) {
    EXPECT_TRUE(bit_equal(a.state.params.tensors()[i].value, b.state.params.tensors()[i].value));
  }
}

TEST(Determinism, DifferentSeedsDiffer) {
  RunConfig other = tiny_run_config(6);
  const RunLog a = run(4, init_run(tiny_run_config()));
  const RunLog b = run(4, init_run(other));
  EXPECT_NE(a.metrics, b.metrics);
}

TEST(Determinism, ResumeMatchesUninterruptedRun) {
  const auto dir = temp_dir("resume");
  const RunLog full = run(12, init_run(tiny_run_config()));
  const RunLog first = run(6, init_run(tiny_run_config()), dir);
  const Checkpoint reloaded = load_checkpoint(dir / kCheckpointName);
  EXPECT_EQ(reloaded.iteration, 6);
  const RunLog second = run(12, reloaded);
  EXPECT_EQ(first.metrics + second.metrics, full.metrics);
  for (std::size_t i = 0; i < full.state.params.tensors().size(); ++i) {
    EXPECT_TRUE(
        bit_equal(second.state.params.tensors()[i].value, full.state.params.tensors()[i].value));
  }
  EXPECT_EQ(second.state.tracker.origin, full.state.tracker.origin);
}

TEST(Train, MetricsLinesMatchHeader) {
  const RunLog a = run(3, init_run(tiny_run_config()));
  std::istringstream lines(a.metrics);
  std::string line;
  int count = 0;
  while (std::getline(lines, line)) {
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 5) << line;
    EXPECT_EQ(line.substr(0, line.find(',')), std::to_string(count));
    ++count;
  }
  EXPECT_EQ(count, 3);
}

TEST(Train, ZeroIterationsLeavesStateUntouched) {
  const Checkpoint init = init_run(tiny_run_config());
  const RunLog a = run(0, init);
  EXPECT_TRUE(a.metrics.empty());
  EXPECT_EQ(a.state.iteration, 0);
  for (std::size_t i = 0; i < init.params.tensors().size(); ++i) {
    EXPECT_TRUE(bit_equal(a.state.params.tensors()[i].value, init.params.tensors()[i].value));
  }
}

TEST(Train, PhotometricLossDecreases) {
  RunConfig config = tiny_run_config();
  const auto targets = tiny_targets(config.train_resolution);
  PhotometricScorer<float> scorer(targets.images, config.crop_size);
  Checkpoint state = init_run(config);
  std::vector<double> losses;
  TrainOptions options;
  options.until = 60;
  options.views = &targets.poses;
  options.on_iteration = [&](const IterationMetrics& m) { losses.push_back(m.guidance_loss); };
  config.sparsity.mode = SparsityMode::kNone;
  train(config, state, scorer, options);
  ASSERT_EQ(losses.size(), 60u);
  const double head = (losses[0] + losses[1] + losses[2]) / 3;
  const double tail = (losses[57] + losses[58] + losses[59]) / 3;
  EXPECT_LT(tail, 0.5 * head);
}

}  // namespace
}  // namespace dreamfield
