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

#include "dreamfield/guidance.hpp"
#include "dreamfield/tensor_payload.hpp"

#include <memory>
#include <string>
#include <vector>

namespace dreamfield {

/// Connection-level failure talking to the scoring service.
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The service stayed unreachable through every retry.
class ServiceUnavailable : public TransportError {
 public:
  using TransportError::TransportError;
};

struct ModelInfo {
  std::string model;
  int resolution = 224;
  int embedding_dim = 0;
};

struct RetryPolicy {
  int retries = 3;
  double base_delay_seconds = 0.5;
  double timeout_seconds = 120.0;
};

/// HTTP client for the image-text scoring service.
///
///   GET  /v1/info          -> {"model": str, "resolution": int, "embedding_dim": int}
///   POST /v1/embed_text    JSON {"captions": [...]} -> tensor [N, D]
///   POST /v1/embed_image   tensor [B, H, W, 3]      -> tensor [B, D]
///   POST /v1/image_grad    tensor [1, H, W, 3], header X-Caption (JSON string)
///                          -> tensor [1, H, W, 3], header X-Tensor-Meta {"loss": x}
///
/// Connection failures and HTTP 503 are retried with exponential backoff;
/// other non-200 statuses raise ProtocolError.
class ScorerClient {
 public:
  explicit ScorerClient(std::string endpoint, RetryPolicy policy = {});
  ~ScorerClient();
  ScorerClient(const ScorerClient&) = delete;
  ScorerClient& operator=(const ScorerClient&) = delete;

  const std::string& endpoint() const { return endpoint_; }

  /// Cached after the first successful call.
  const ModelInfo& info();

  /// One unit-norm row per caption.
  Eigen::MatrixXf embed_text(const std::vector<std::string>& captions);
  /// One unit-norm row per image. Images must be at the model resolution.
  Eigen::MatrixXf embed_images(const std::vector<RgbImage<float>>& images);
  GuidanceResult<float> image_grad(const RgbImage<float>& image, const std::string& caption);

 private:
  struct Impl;
  std::string endpoint_;
  RetryPolicy policy_;
  std::unique_ptr<Impl> impl_;
  std::optional<ModelInfo> info_;
};

/// -<g(image), h(caption)> and its pixel gradient, computed by the service.
/// Fills the caption's embedding cache on first use.
GuidanceResult<float> score_remote(ScorerClient& client, const RgbImage<float>& image,
                                   Caption& caption);

Eigen::MatrixXf embed_batch(ScorerClient& client, const std::vector<RgbImage<float>>& images);
Eigen::MatrixXf embed_batch(ScorerClient& client, const std::vector<std::string>& captions);

class RemoteScorer final : public Scorer<float> {
 public:
  RemoteScorer(ScorerClient& client, Caption caption);

  int input_resolution() const override { return resolution_; }
  GuidanceResult<float> score(const RgbImage<float>& image, const ViewContext& view) override;

  const Caption& caption() const { return caption_; }

 private:
  ScorerClient& client_;
  Caption caption_;
  int resolution_;
};

/// [1, H, W, 3] row-major payload and back.
TensorPayload image_to_tensor(const RgbImage<float>& image);
RgbImage<float> tensor_to_image(const TensorPayload& tensor);

}  // namespace dreamfield
