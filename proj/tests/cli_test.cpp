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
#include "dreamfield/cli.hpp"
#include "dreamfield/image_io.hpp"
#include "dreamfield/train.hpp"

#include "fixtures.hpp"
#include "stub_service.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace dreamfield {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using testing::temp_dir;

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  return {std::istreambuf_iterator<char>(in), {}};
}

int count_lines(const std::string& text) { return int(std::count(text.begin(), text.end(), '\n')); }

/// Writes a configuration file for a field small enough to train in a test.
fs::path tiny_config_file(const fs::path& dir) {
  const json j = {{"encoding", {{"levels", 4}, {"features", 8}}},
                  {"arch", {{"width", 16}, {"bottleneck", 16}, {"blocks", 2}}},
                  {"iterations", 2},
                  {"render_chunk_points", 512}};
  std::ofstream(dir / "tiny.json") << j.dump();
  return dir / "tiny.json";
}

std::vector<std::string> tiny_generate_args(const fs::path& dir, const std::string& endpoint) {
  return {"generate", "--prompt", "a small red ball", "--endpoint", endpoint,
          "--config", tiny_config_file(dir).string(), "--train-res", "8", "--crop", "8",
          "--samples", "8", "--frames", "2", "--frame-samples", "8", "--log-every", "0",
          "--out", (dir / "run").string()};
}

class ScopedEnv {
 public:
  ScopedEnv(const char* name, const std::string& value) : name_(name) {
    if (const char* old = std::getenv(name)) old_ = old;
    ::setenv(name, value.c_str(), 1);
  }
  ~ScopedEnv() {
    if (old_) {
      ::setenv(name_, old_->c_str(), 1);
    } else {
      ::unsetenv(name_);
    }
  }

 private:
  const char* name_;
  std::optional<std::string> old_;
};

TEST(Cli, HelpAndVersion) {
  EXPECT_EQ(cli({"--help"}).code, kExitOk);
  const auto v = cli({"--version"});
  EXPECT_EQ(v.code, kExitOk);
  EXPECT_NE(v.out.find(kArtifactVersion), std::string::npos);
}

TEST(Cli, UnknownSubcommandOrFlagIsInvalidInput) {
  EXPECT_EQ(cli({"frobnicate"}).code, kExitInvalidInput);
  EXPECT_EQ(cli({"render", "--checkpoint", "x", "--bogus"}).code, kExitInvalidInput);
  EXPECT_EQ(cli({"eval", "--captions", "x"}).code, kExitInvalidInput);
}

TEST(Cli, GenerateWithoutPromptIsInvalidInput) {
  const auto r = cli({"generate", "--endpoint", "http://127.0.0.1:9"});
  EXPECT_EQ(r.code, kExitInvalidInput);
  EXPECT_NE(r.err.find("--prompt"), std::string::npos) << r.err;
}

TEST(Cli, GenerateWithoutEndpointIsInvalidInput) {
  ScopedEnv env(kEndpointEnv, "");
  EXPECT_EQ(cli({"generate", "--prompt", "x"}).code, kExitInvalidInput);
}

TEST(Cli, GenerateAgainstDeadServiceExitsThree) {
  const auto dir = temp_dir("cli_dead_generate");
  const auto r = cli(tiny_generate_args(dir, testing::dead_endpoint()));
  EXPECT_EQ(r.code, kExitServiceUnavailable) << r.err;
}

TEST(Cli, BadConfigFileIsInvalidInput) {
  const auto dir = temp_dir("cli_bad_config");
  std::ofstream(dir / "bad.json") << R"({"itterations": 3})";
  const auto r = cli({"generate", "--prompt", "x", "--endpoint", "http://127.0.0.1:9", "--config",
                      (dir / "bad.json").string()});
  EXPECT_EQ(r.code, kExitInvalidInput);
  EXPECT_NE(r.err.find("itterations"), std::string::npos) << r.err;
}

TEST(Cli, GenerateResumeAndRender) {
  testing::StubService stub;
  const auto dir = temp_dir("cli_generate");
  auto args = tiny_generate_args(dir, stub.endpoint());
  args.insert(args.end(), {"--iters", "3", "--azimuth-range", "90"});
  const auto r = cli(args);
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const fs::path run = dir / "run";
  for (const char* f : {"checkpoint.ckpt", "metrics.csv", "manifest.json", "frames/frame_000.png",
                        "frames/frame_001.png", "frames/frame_001_depth.png"}) {
    EXPECT_TRUE(fs::exists(run / f)) << f;
  }
  EXPECT_EQ(count_lines(slurp(run / "metrics.csv")), 1 + 3);

  const json manifest = json::parse(slurp(run / "manifest.json"));
  EXPECT_EQ(manifest.at("command"), "generate");
  EXPECT_EQ(manifest.at("artifact_version"), kArtifactVersion);
  const json& config = manifest.at("config");
  // Flags override the file, the file overrides defaults.
  EXPECT_EQ(config.at("iterations"), 3);
  EXPECT_EQ(config.at("arch").at("width"), 16);
  EXPECT_EQ(config.at("encoding").at("features"), 8);
  EXPECT_EQ(config.at("train_resolution"), 8);
  EXPECT_NEAR(config.at("pose").at("azimuth_range_deg").at(0).get<double>(), -45.0, 1e-9);
  EXPECT_NEAR(config.at("pose").at("azimuth_range_deg").at(1).get<double>(), 45.0, 1e-9);
  EXPECT_EQ(config.at("prompt"), "a small red ball");

  auto resume = tiny_generate_args(dir, stub.endpoint());
  resume.insert(resume.end(), {"--iters", "5", "--resume"});
  ASSERT_EQ(cli(resume).code, kExitOk);
  EXPECT_EQ(load_checkpoint(run / "checkpoint.ckpt").iteration, 5);
  EXPECT_EQ(count_lines(slurp(run / "metrics.csv")), 1 + 5);

  // Rendering needs no service.
  const auto frames = dir / "turntable";
  const auto rr = cli({"render", "--checkpoint", (run / "checkpoint.ckpt").string(), "--out",
                       frames.string(), "--frames", "3", "--resolution", "6", "--samples", "8"});
  ASSERT_EQ(rr.code, kExitOk) << rr.err;
  for (const char* f : {"frame_000.png", "frame_002.png", "frame_002_transmittance.png"}) {
    EXPECT_TRUE(fs::exists(frames / f)) << f;
  }
  EXPECT_EQ(read_png_rgb(frames / "frame_000.png").width, 6);
}

TEST(Cli, EndpointFromEnvironment) {
  testing::StubService stub;
  const auto dir = temp_dir("cli_env");
  ScopedEnv env(kEndpointEnv, stub.endpoint());
  const auto r = cli({"generate", "--prompt", "x", "--config", tiny_config_file(dir).string(),
                      "--train-res", "8", "--crop", "8", "--samples", "8", "--iters", "1",
                      "--frames", "1", "--frame-samples", "4", "--log-every", "0", "--out",
                      (dir / "run").string()});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  EXPECT_GT(stub.requests(), 0);
}

void write_pool(const fs::path& path, int size) {
  std::ofstream pool(path);
  for (int i = 0; i < size; ++i) pool << "caption number " << i << '\n';
}

fs::path write_checkpoint_for(const fs::path& dir, const std::string& prompt, std::uint64_t seed) {
  RunConfig config = testing::tiny_run_config(seed);
  config.prompt = prompt;
  config.train_resolution = 8;
  config.crop_size = 8;
  Checkpoint ck = init_run(config);
  ck.params.density_bias()(0, 0) = 1.0f;
  ck.config_json = to_json(config);
  const fs::path path = dir / ("ck" + std::to_string(seed) + ".ckpt");
  save_checkpoint(path, ck);
  return path;
}

TEST(Cli, EvalReportsRPrecision) {
  testing::StubService stub;
  const auto dir = temp_dir("cli_eval");
  write_pool(dir / "pool.txt", 153);
  const auto a = write_checkpoint_for(dir, "caption number 4", 1);
  const auto b = write_checkpoint_for(dir, "caption number 100", 2);
  const auto r = cli({"eval", "--checkpoint", a.string(), "--checkpoint", b.string(), "--captions",
                      (dir / "pool.txt").string(), "--endpoint", stub.endpoint(), "--samples", "8",
                      "--out", (dir / "report.txt").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(slurp(dir / "report.txt"), r.out);
  EXPECT_NE(r.out.find("captions: 153"), std::string::npos);
  EXPECT_NE(r.out.find("objects: 2"), std::string::npos);
  EXPECT_NE(r.out.find("r_precision: "), std::string::npos);
  EXPECT_NE(r.out.find("source: [100] caption number 100"), std::string::npos);
  EXPECT_NE(r.out.find("  5. "), std::string::npos);
}

TEST(Cli, EvalCaptionOutsidePoolIsInvalidInput) {
  testing::StubService stub;
  const auto dir = temp_dir("cli_eval_pool");
  write_pool(dir / "pool.txt", 5);
  const auto a = write_checkpoint_for(dir, "not in the pool", 1);
  const auto r = cli({"eval", "--checkpoint", a.string(), "--captions",
                      (dir / "pool.txt").string(), "--endpoint", stub.endpoint()});
  EXPECT_EQ(r.code, kExitInvalidInput);
  EXPECT_NE(r.err.find("not in the pool"), std::string::npos) << r.err;
}

TEST(Cli, EvalAgainstDeadServiceExitsThree) {
  const auto dir = temp_dir("cli_eval_dead");
  write_pool(dir / "pool.txt", 5);
  const auto a = write_checkpoint_for(dir, "caption number 1", 1);
  const auto r = cli({"eval", "--checkpoint", a.string(), "--captions",
                      (dir / "pool.txt").string(), "--endpoint", testing::dead_endpoint()});
  EXPECT_EQ(r.code, kExitServiceUnavailable) << r.err;
}

fs::path tiny_dataset(const std::string& name) {
  const auto dir = temp_dir(name);
  const auto r = cli({"synth", "--out", (dir / "data").string(), "--resolution", "8", "--samples",
                      "16"});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  return dir;
}

std::vector<std::string> tiny_reconstruct_args(const fs::path& dir) {
  return {"reconstruct", "--targets", (dir / "data").string(), "--config",
          tiny_config_file(dir).string(), "--samples", "8", "--crop", "6", "--eval-samples", "8",
          "--log-every", "0", "--out", (dir / "run").string()};
}

TEST(Cli, ReconstructZeroIterations) {
  const auto dir = tiny_dataset("cli_recon_zero");
  auto args = tiny_reconstruct_args(dir);
  args.insert(args.end(), {"--iters", "0"});
  const auto r = cli(args);
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("heldout_psnr_db"), std::string::npos) << r.out;
  EXPECT_TRUE(fs::exists(dir / "run" / "checkpoint.ckpt"));
  const json manifest = json::parse(slurp(dir / "run" / "manifest.json"));
  EXPECT_EQ(manifest.at("config").at("scorer"), "photometric");
  EXPECT_EQ(manifest.at("config").at("train_resolution"), 8);
  EXPECT_TRUE(manifest.at("summary").contains("heldout_psnr_db"));
}

TEST(Cli, ReconstructFewIterations) {
  const auto dir = tiny_dataset("cli_recon_few");
  auto args = tiny_reconstruct_args(dir);
  args.insert(args.end(), {"--iters", "3"});
  const auto r = cli(args);
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(count_lines(slurp(dir / "run" / "metrics.csv")), 1 + 3);
}

TEST(Cli, ReconstructMissingPoseFileIsInvalidInput) {
  const auto dir = temp_dir("cli_recon_missing");
  const auto r = cli({"reconstruct", "--targets", (dir / "nothing").string(), "--out",
                      (dir / "run").string()});
  EXPECT_EQ(r.code, kExitInvalidInput);
}

TEST(Cli, ReconstructCorruptImageNamesFile) {
  const auto dir = tiny_dataset("cli_recon_corrupt");
  std::ofstream(dir / "data" / "train_03.png", std::ios::trunc) << "garbage";
  auto args = tiny_reconstruct_args(dir);
  args.insert(args.end(), {"--iters", "1"});
  const auto r = cli(args);
  EXPECT_EQ(r.code, kExitInvalidInput);
  EXPECT_NE(r.err.find("train_03.png"), std::string::npos) << r.err;
}

TEST(Cli, RenderMissingCheckpointIsInvalidInput) {
  const auto dir = temp_dir("cli_render_missing");
  EXPECT_EQ(cli({"render", "--checkpoint", (dir / "none.ckpt").string()}).code, kExitInvalidInput);
}

}  // namespace
}  // namespace dreamfield
