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

#include "dreamfield/cli.hpp"

#include "dreamfield/checkpoint.hpp"
#include "dreamfield/eval.hpp"
#include "dreamfield/remote_scorer.hpp"
#include "dreamfield/scene.hpp"
#include "dreamfield/train.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <optional>
#include <sstream>

namespace dreamfield {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string iso_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buffer[32];
  std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buffer;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

/// Run flags shared by generate and reconstruct. Unset flags leave the
/// configuration file or default in place.
struct RunFlags {
  std::optional<std::string> prompt;
  std::optional<std::uint64_t> seed;
  std::optional<long> iters;
  std::optional<int> train_res;
  std::optional<int> crop;
  std::optional<int> samples;
  std::optional<std::string> sparsity;
  std::optional<double> tau;
  std::optional<double> tau_start;
  std::optional<int> anneal_iters;
  std::optional<double> lambda;
  std::optional<double> elevation;
  std::optional<std::string> azimuth_range;
  std::optional<double> radius;
  std::optional<double> focal_scale;
  std::optional<std::string> scorer;
  std::optional<std::string> endpoint;
  std::optional<std::string> out;
  std::optional<std::string> config;
  std::optional<std::string> targets;
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--prompt", f.prompt, "Caption to generate");
  cmd->add_option("--seed", f.seed, "Random seed");
  cmd->add_option("--iters", f.iters, "Optimization iterations");
  cmd->add_option("--train-res", f.train_res, "Render resolution during training");
  cmd->add_option("--crop", f.crop, "Random crop size");
  cmd->add_option("--samples", f.samples, "Samples per ray");
  cmd->add_option("--sparsity", f.sparsity, "none|perturb|beta|gated|additive");
  cmd->add_option("--tau", f.tau, "Target transmittance");
  cmd->add_option("--tau-start", f.tau_start, "Initial target transmittance");
  cmd->add_option("--anneal-iters", f.anneal_iters, "Iterations of the tau ramp");
  cmd->add_option("--lambda", f.lambda, "Transmittance loss weight");
  cmd->add_option("--elevation", f.elevation, "Camera elevation in degrees");
  cmd->add_option("--azimuth-range", f.azimuth_range,
                  "Azimuth width in degrees centered on 0, or LO,HI in degrees");
  cmd->add_option("--radius", f.radius, "Camera distance");
  cmd->add_option("--focal-scale", f.focal_scale, "Focal length multiplier");
  cmd->add_option("--scorer", f.scorer, "photometric|remote");
  cmd->add_option("--endpoint", f.endpoint, "Scoring service URL");
  cmd->add_option("--out", f.out, "Output directory");
  cmd->add_option("--config", f.config, "JSON configuration file");
}

/// defaults < config file < flags.
RunConfig resolve_config(const RunConfig& defaults, const RunFlags& f) {
  RunConfig c = defaults;
  if (f.config) c = merge_json(c, read_text(*f.config));
  if (f.prompt) c.prompt = *f.prompt;
  if (f.seed) c.seed = *f.seed;
  if (f.iters) c.iterations = *f.iters;
  if (f.train_res) c.train_resolution = *f.train_res;
  if (f.crop) c.crop_size = *f.crop;
  if (f.samples) c.samples = *f.samples;
  if (f.sparsity) c.sparsity.mode = parse_sparsity_mode(*f.sparsity);
  if (f.tau) c.sparsity.tau_target = *f.tau;
  if (f.tau_start) c.sparsity.tau_start = *f.tau_start;
  if (f.anneal_iters) c.sparsity.anneal_iters = *f.anneal_iters;
  if (f.lambda) c.sparsity.lambda = *f.lambda;
  if (f.elevation) c.elevation = deg_to_rad(*f.elevation);
  if (f.azimuth_range) c.azimuth_range = parse_azimuth_range(*f.azimuth_range);
  if (f.radius) c.radius = *f.radius;
  if (f.focal_scale) c.focal_scale = *f.focal_scale;
  if (f.scorer) c.scorer = parse_scorer_kind(*f.scorer);
  if (f.endpoint) c.endpoint = *f.endpoint;
  if (f.out) c.out_dir = *f.out;
  if (f.targets) c.targets = *f.targets;
  if (c.endpoint.empty()) {
    if (const char* env = std::getenv(kEndpointEnv)) c.endpoint = env;
  }
  return c;
}

void write_manifest(const fs::path& dir, const std::string& command, const RunConfig& config,
                    const std::string& started, const json& summary) {
  const json manifest = {{"artifact_version", kArtifactVersion},
                         {"command", command},
                         {"config", json::parse(to_json(config))},
                         {"started_at", started},
                         {"finished_at", summary.is_null() ? json(nullptr) : json(iso_now())},
                         {"summary", summary}};
  std::ofstream out(dir / "manifest.json");
  out << manifest.dump(2) << '\n';
}

/// Opens metrics.csv, appending when resuming from a checkpoint.
std::ofstream open_metrics(const fs::path& dir, bool append) {
  const fs::path path = dir / "metrics.csv";
  const bool fresh = !append || !fs::exists(path);
  std::ofstream metrics(path, fresh ? std::ios::trunc : std::ios::app);
  if (!metrics) throw ConfigError("cannot write '" + path.string() + "'");
  if (fresh) metrics << kMetricsHeader << '\n';
  return metrics;
}

/// Loads the checkpoint in `dir` when resuming, otherwise a fresh state.
Checkpoint start_state(const RunConfig& config, const fs::path& dir, bool resume) {
  const fs::path path = dir / kCheckpointName;
  if (resume && fs::exists(path)) {
    Checkpoint state = load_checkpoint(path, config.arch);
    state.config_json = to_json(config);
    return state;
  }
  return init_run(config);
}

struct Progress {
  std::ostream& out;
  long every;
  void operator()(const IterationMetrics& m) const {
    if (every > 0 && (m.iteration + 1) % every == 0) {
      out << "iter " << (m.iteration + 1) << "  " << format_metrics(m) << std::endl;
    }
  }
};

json metrics_summary(const std::vector<IterationMetrics>& history) {
  if (history.empty()) return json::object();
  const std::size_t tail = std::max<std::size_t>(1, history.size() / 10);
  double mean_t = 0;
  for (std::size_t i = history.size() - tail; i < history.size(); ++i) {
    mean_t += history[i].mean_transmittance;
  }
  const auto& last = history.back();
  return {{"iterations_run", history.size()},
          {"final_total_loss", last.total_loss},
          {"final_guidance_loss", last.guidance_loss},
          {"final_mean_transmittance", last.mean_transmittance},
          {"mean_transmittance_last_10pct", mean_t / double(tail)}};
}

void write_turntable(const Checkpoint& state, const fs::path& dir, int frames, int resolution,
                     int samples) {
  EvalRenderSettings settings;
  settings.resolution = resolution;
  settings.samples = samples;
  const auto azimuths = turntable_azimuths(frames);
  for (std::size_t i = 0; i < azimuths.size(); ++i) {
    char stem[32];
    std::snprintf(stem, sizeof stem, "frame_%03zu", i);
    const auto views = heldout_render(state, {azimuths[i]}, settings);
    write_view(dir, stem, views.front());
  }
}

struct GenerateFlags {
  RunFlags run;
  bool resume = false;
  int frames = 8;
  int frame_samples = 512;
  long log_every = 100;
};

int cmd_generate(const GenerateFlags& flags, std::ostream& out, std::ostream& err) {
  RunConfig defaults;
  defaults.scorer = ScorerKind::kRemote;
  RunConfig config = resolve_config(defaults, flags.run);
  if (config.prompt.empty()) throw ConfigError("generate: --prompt is required");
  if (config.scorer != ScorerKind::kRemote) {
    throw ConfigError("generate: uses the remote scorer; use 'reconstruct' for photometric runs");
  }
  if (config.endpoint.empty()) {
    throw ConfigError(std::string("generate: no scoring endpoint (set --endpoint or ") +
                      kEndpointEnv + ")");
  }
  validate(config);
  const fs::path dir = config.out_dir;
  fs::create_directories(dir);
  const std::string started = iso_now();
  write_manifest(dir, "generate", config, started, nullptr);

  ScorerClient client(config.endpoint);
  RemoteScorer scorer(client, Caption{config.prompt, std::nullopt});
  Checkpoint state = start_state(config, dir, flags.resume);
  std::ofstream metrics = open_metrics(dir, flags.resume && state.iteration > 0);

  std::vector<IterationMetrics> history;
  TrainOptions options;
  options.metrics = &metrics;
  options.log = &err;
  options.checkpoint_dir = dir;
  const Progress progress{out, flags.log_every};
  options.on_iteration = [&](const IterationMetrics& m) {
    history.push_back(m);
    progress(m);
  };
  const TrainSummary summary = train(config, state, scorer, options);
  write_turntable(state, dir / "frames", flags.frames, config.train_resolution, flags.frame_samples);

  json s = metrics_summary(history);
  s["skipped_steps"] = summary.skipped_steps;
  s["scorer_model"] = client.info().model;
  write_manifest(dir, "generate", config, started, s);
  out << "wrote " << (dir / kCheckpointName).string() << '\n';
  return kExitOk;
}

struct ReconstructFlags {
  RunFlags run;
  std::optional<std::string> heldout;
  bool resume = false;
  int eval_samples = 512;
  long log_every = 100;
};

fs::path pose_file_of(const fs::path& targets) {
  return fs::is_directory(targets) ? targets / "poses.txt" : targets;
}

int cmd_reconstruct(const ReconstructFlags& flags, std::ostream& out, std::ostream& err) {
  RunConfig defaults;
  defaults.scorer = ScorerKind::kPhotometric;
  defaults.background = BackgroundMode::kWhite;
  defaults.track_origin = false;
  RunFlags run = flags.run;
  RunConfig config = resolve_config(defaults, run);
  if (config.targets.empty()) throw ConfigError("reconstruct: --targets is required");
  if (config.scorer != ScorerKind::kPhotometric) {
    throw ConfigError("reconstruct: only the photometric scorer is supported");
  }
  const fs::path pose_file = pose_file_of(config.targets);
  if (!fs::exists(pose_file)) throw FormatError("pose file '" + pose_file.string() + "' not found");
  const PosedImages targets = load_posed_images(pose_file);
  const int target_res = targets.images.front().height;
  if (targets.images.front().width != target_res) {
    throw FormatError("target images must be square");
  }
  if (!run.train_res) config.train_resolution = target_res;
  if (config.train_resolution != target_res) {
    throw ConfigError("reconstruct: --train-res must equal the target image size " +
                      std::to_string(target_res));
  }
  if (!run.crop && config.crop_size > config.train_resolution) {
    config.crop_size = config.train_resolution;
  }
  validate(config);

  fs::path heldout_file = flags.heldout ? fs::path(*flags.heldout)
                                        : pose_file.parent_path() / "heldout.txt";
  std::optional<PosedImages> heldout;
  if (flags.heldout || fs::exists(heldout_file)) heldout = load_posed_images(heldout_file);

  const fs::path dir = config.out_dir;
  fs::create_directories(dir);
  const std::string started = iso_now();
  write_manifest(dir, "reconstruct", config, started, nullptr);

  PhotometricScorer<float> scorer(targets.images, config.crop_size);
  Checkpoint state = start_state(config, dir, flags.resume);
  std::ofstream metrics = open_metrics(dir, flags.resume && state.iteration > 0);
  std::vector<IterationMetrics> history;
  TrainOptions options;
  options.metrics = &metrics;
  options.log = &err;
  options.checkpoint_dir = dir;
  options.views = &targets.poses;
  const Progress progress{out, flags.log_every};
  options.on_iteration = [&](const IterationMetrics& m) {
    history.push_back(m);
    progress(m);
  };
  const TrainSummary summary = train(config, state, scorer, options);

  json s = metrics_summary(history);
  s["skipped_steps"] = summary.skipped_steps;
  double train_psnr = 0;
  for (std::size_t i = 0; i < targets.images.size(); ++i) {
    const ViewRender v = render_view(state, targets.poses[i], target_res, flags.eval_samples);
    train_psnr += psnr(v.rgb, targets.images[i]);
  }
  train_psnr /= double(targets.images.size());
  s["train_view_psnr_db"] = train_psnr;
  out << "train_view_psnr_db " << train_psnr << '\n';
  if (heldout) {
    json per_view = json::array();
    double mean = 0;
    for (std::size_t i = 0; i < heldout->images.size(); ++i) {
      const ViewRender v = render_view(state, heldout->poses[i], target_res, flags.eval_samples);
      const double p = psnr(v.rgb, heldout->images[i]);
      per_view.push_back({{"file", heldout->files[i]}, {"psnr_db", p}});
      mean += p;
      write_view(dir / "heldout", fs::path(heldout->files[i]).stem().string(), v);
    }
    mean /= double(heldout->images.size());
    s["heldout_psnr_db"] = mean;
    s["heldout_views"] = per_view;
    out << "heldout_psnr_db " << mean << '\n';
  }
  write_manifest(dir, "reconstruct", config, started, s);
  return kExitOk;
}

struct EvalFlags {
  std::vector<std::string> checkpoints;
  std::string captions;
  std::optional<std::string> endpoint;
  std::optional<std::string> out;
  int samples = 512;
};

int cmd_eval(const EvalFlags& flags, std::ostream& out) {
  std::string endpoint = flags.endpoint.value_or("");
  if (endpoint.empty()) {
    if (const char* env = std::getenv(kEndpointEnv)) endpoint = env;
  }
  if (endpoint.empty()) {
    throw ConfigError(std::string("eval: no scoring endpoint (set --endpoint or ") + kEndpointEnv + ")");
  }
  const std::vector<std::string> pool = read_caption_pool(flags.captions);
  if (pool.size() < 2) throw ConfigError("eval: the caption pool needs at least 2 captions");

  std::vector<Checkpoint> checkpoints;
  std::vector<int> sources;
  for (const auto& path : flags.checkpoints) {
    if (!fs::exists(path)) throw FormatError("checkpoint '" + path + "' not found");
    checkpoints.push_back(load_checkpoint(path));
    const RunConfig config = merge_json(RunConfig{}, checkpoints.back().config_json);
    const auto it = std::find(pool.begin(), pool.end(), config.prompt);
    if (it == pool.end()) {
      throw ConfigError("eval: caption of '" + path + "' (\"" + config.prompt +
                        "\") is not in the pool");
    }
    sources.push_back(int(it - pool.begin()));
  }

  ScorerClient client(endpoint);
  const int model_res = client.info().resolution;
  const Eigen::MatrixXf caption_embeddings = embed_batch(client, pool);
  std::vector<RgbImage<float>> renders;
  for (const auto& ck : checkpoints) {
    const RunConfig config = merge_json(RunConfig{}, ck.config_json);
    EvalRenderSettings settings;
    settings.resolution = config.train_resolution;
    settings.samples = flags.samples;
    const ViewRender view = heldout_render(ck, {0.0}, settings).front();
    renders.push_back(resize_bilinear(view.rgb, model_res));
  }
  const Eigen::MatrixXf render_embeddings = embed_batch(client, renders);
  const double precision = r_precision(render_embeddings, caption_embeddings, sources);

  std::ostringstream report;
  report << "model: " << client.info().model << '\n';
  report << "captions: " << pool.size() << '\n';
  report << "objects: " << checkpoints.size() << '\n';
  char line[64];
  std::snprintf(line, sizeof line, "%.6f", precision);
  report << "r_precision: " << line << '\n';
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    const auto top = rank_captions(render_embeddings.row(Index(i)).transpose(), caption_embeddings, 5);
    report << "\nobject: " << flags.checkpoints[i] << '\n';
    report << "source: [" << sources[i] << "] " << pool[std::size_t(sources[i])] << '\n';
    report << "retrieved: " << (top.front() == sources[i] ? "hit" : "miss") << '\n';
    for (std::size_t r = 0; r < top.size(); ++r) {
      const float score = render_embeddings.row(Index(i)).dot(caption_embeddings.row(top[r]));
      std::snprintf(line, sizeof line, "%.6f", score);
      report << "  " << (r + 1) << ". " << line << " [" << top[r] << "] "
             << pool[std::size_t(top[r])] << '\n';
    }
  }
  if (flags.out) {
    std::ofstream file(*flags.out);
    if (!file) throw ConfigError("cannot write '" + *flags.out + "'");
    file << report.str();
  }
  out << report.str();
  return kExitOk;
}

struct RenderFlags {
  std::string checkpoint;
  std::optional<std::string> out;
  int frames = 8;
  std::optional<int> resolution;
  int samples = 512;
  double elevation = 45.0;
};

int cmd_render(const RenderFlags& flags, std::ostream& out) {
  if (!fs::exists(flags.checkpoint)) {
    throw FormatError("checkpoint '" + flags.checkpoint + "' not found");
  }
  const Checkpoint ck = load_checkpoint(flags.checkpoint);
  const RunConfig config = merge_json(RunConfig{}, ck.config_json);
  EvalRenderSettings settings;
  settings.resolution = flags.resolution.value_or(config.train_resolution);
  settings.samples = flags.samples;
  settings.elevation = deg_to_rad(flags.elevation);
  settings.radius = config.radius;
  settings.focal_scale = config.focal_scale;
  if (settings.resolution < 1 || settings.samples < 1) {
    throw ConfigError("render: resolution and samples must be >= 1");
  }
  const fs::path dir =
      flags.out ? fs::path(*flags.out) : fs::path(flags.checkpoint).parent_path() / "frames";
  const auto azimuths = turntable_azimuths(flags.frames);
  for (std::size_t i = 0; i < azimuths.size(); ++i) {
    char stem[32];
    std::snprintf(stem, sizeof stem, "frame_%03zu", i);
    write_view(dir, stem, heldout_render(ck, {azimuths[i]}, settings).front());
  }
  out << "wrote " << azimuths.size() << " frames to " << dir.string() << '\n';
  return kExitOk;
}

struct SynthFlags {
  std::string out;
  int resolution = 64;
  int samples = 512;
};

int cmd_synth(const SynthFlags& flags, std::ostream& out) {
  if (flags.resolution < 1 || flags.samples < 1) {
    throw ConfigError("synth: resolution and samples must be >= 1");
  }
  SynthConfig config = default_synth_config();
  config.resolution = flags.resolution;
  config.samples = flags.samples;
  synthesize_dataset(flags.out, two_sphere_scene(), config);
  out << "wrote two-sphere dataset to " << flags.out << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Text-guided neural radiance field optimization", "dreamfield"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kArtifactVersion);

  GenerateFlags generate;
  CLI::App* gen = app.add_subcommand("generate", "Optimize a field for a caption (remote scorer)");
  add_run_flags(gen, generate.run);
  gen->add_flag("--resume", generate.resume, "Continue from checkpoint.ckpt in --out");
  gen->add_option("--frames", generate.frames, "Turntable frames written at the end")
      ->check(CLI::PositiveNumber);
  gen->add_option("--frame-samples", generate.frame_samples, "Samples per ray for the turntable")
      ->check(CLI::PositiveNumber);
  gen->add_option("--log-every", generate.log_every, "Progress line interval (0 disables)");

  ReconstructFlags reconstruct;
  CLI::App* rec = app.add_subcommand("reconstruct", "Fit posed target images (photometric scorer)");
  add_run_flags(rec, reconstruct.run);
  rec->add_option("--targets", reconstruct.run.targets, "Pose file or directory with poses.txt");
  rec->add_option("--heldout", reconstruct.heldout, "Pose file of held-out views");
  rec->add_flag("--resume", reconstruct.resume, "Continue from checkpoint.ckpt in --out");
  rec->add_option("--eval-samples", reconstruct.eval_samples, "Samples per ray for PSNR renders")
      ->check(CLI::PositiveNumber);
  rec->add_option("--log-every", reconstruct.log_every, "Progress line interval (0 disables)");

  EvalFlags eval;
  CLI::App* ev = app.add_subcommand("eval", "R-Precision of checkpoints against a caption pool");
  ev->add_option("--checkpoint", eval.checkpoints, "Checkpoint file (repeatable)")->required();
  ev->add_option("--captions", eval.captions, "Caption pool, one per line")->required();
  ev->add_option("--endpoint", eval.endpoint, "Scoring service URL");
  ev->add_option("--out", eval.out, "Report file");
  ev->add_option("--samples", eval.samples, "Samples per ray")->check(CLI::PositiveNumber);

  RenderFlags render;
  CLI::App* ren = app.add_subcommand("render", "Turntable, depth and transmittance renders");
  ren->add_option("--checkpoint", render.checkpoint, "Checkpoint file")->required();
  ren->add_option("--out", render.out, "Frame directory");
  ren->add_option("--frames", render.frames, "Number of frames")->check(CLI::PositiveNumber);
  ren->add_option("--resolution", render.resolution, "Frame size in pixels");
  ren->add_option("--samples", render.samples, "Samples per ray");
  ren->add_option("--elevation", render.elevation, "Camera elevation in degrees");

  SynthFlags synth;
  CLI::App* syn = app.add_subcommand("synth", "Write the synthetic two-sphere dataset");
  syn->add_option("--out", synth.out, "Dataset directory")->required();
  syn->add_option("--resolution", synth.resolution, "Image size in pixels");
  syn->add_option("--samples", synth.samples, "Samples per ray");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInvalidInput;
  }

  try {
    if (gen->parsed()) return cmd_generate(generate, out, err);
    if (rec->parsed()) return cmd_reconstruct(reconstruct, out, err);
    if (ev->parsed()) return cmd_eval(eval, out);
    if (ren->parsed()) return cmd_render(render, out);
    if (syn->parsed()) return cmd_synth(synth, out);
  } catch (const TransportError& e) {
    err << "error: " << e.what() << '\n';
    return kExitServiceUnavailable;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalidInput;
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalidInput;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalidInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace dreamfield
