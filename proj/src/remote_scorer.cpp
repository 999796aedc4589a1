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

#include "dreamfield/remote_scorer.hpp"

#include <httplib.h>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <thread>

namespace dreamfield {

namespace {

using json = nlohmann::json;

Eigen::MatrixXf rows_from_tensor(const TensorPayload& tensor, std::size_t expected_rows) {
  if (tensor.shape.size() != 2 || std::size_t(tensor.shape[0]) != expected_rows) {
    throw ProtocolError("embedding response: expected shape [" + std::to_string(expected_rows) +
                        ", D]");
  }
  const Index rows = Index(tensor.shape[0]);
  const Index cols = Index(tensor.shape[1]);
  Eigen::MatrixXf out =
      Eigen::Map<const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
          tensor.data.data(), rows, cols);
  if (!out.allFinite()) throw ProtocolError("embedding response contains non-finite values");
  for (Index r = 0; r < rows; ++r) {
    const float norm = out.row(r).norm();
    if (std::abs(norm - 1.0f) > 1e-3f) {
      throw ProtocolError("embedding response row " + std::to_string(r) + " has norm " +
                          std::to_string(norm));
    }
    out.row(r) /= norm;
  }
  return out;
}

}  // namespace

struct ScorerClient::Impl {
  explicit Impl(const std::string& endpoint) : client(endpoint) {}
  httplib::Client client;
};

ScorerClient::ScorerClient(std::string endpoint, RetryPolicy policy)
    : endpoint_(std::move(endpoint)), policy_(policy), impl_(std::make_unique<Impl>(endpoint_)) {
  if (!impl_->client.is_valid()) throw ArgumentError("invalid scorer endpoint '" + endpoint_ + "'");
  const auto timeout = std::chrono::duration<double>(policy_.timeout_seconds);
  const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(timeout);
  impl_->client.set_connection_timeout(std::chrono::seconds(5));
  impl_->client.set_read_timeout(micros);
  impl_->client.set_write_timeout(micros);
}

ScorerClient::~ScorerClient() = default;

namespace {

template <typename Call>
httplib::Result with_retries(const RetryPolicy& policy, const std::string& what, Call&& call) {
  std::string last_error;
  for (int attempt = 0; attempt <= policy.retries; ++attempt) {
    if (attempt > 0) {
      const double delay = policy.base_delay_seconds * std::pow(2.0, attempt - 1);
      std::this_thread::sleep_for(std::chrono::duration<double>(delay));
    }
    httplib::Result result = call();
    if (!result) {
      last_error = httplib::to_string(result.error());
      continue;
    }
    if (result->status == 503) {
      last_error = "HTTP 503 (service not ready)";
      continue;
    }
    if (result->status != 200) {
      throw ProtocolError(what + ": HTTP " + std::to_string(result->status) + ": " +
                          result->body);
    }
    return result;
  }
  throw ServiceUnavailable(what + ": scoring service unreachable after " +
                           std::to_string(policy.retries) + " retries (" + last_error + ")");
}

}  // namespace

const ModelInfo& ScorerClient::info() {
  if (info_) return *info_;
  auto result = with_retries(policy_, "GET /v1/info", [&] { return impl_->client.Get("/v1/info"); });
  try {
    const json body = json::parse(result->body);
    ModelInfo info;
    info.model = body.at("model").get<std::string>();
    info.resolution = body.at("resolution").get<int>();
    info.embedding_dim = body.value("embedding_dim", 0);
    if (info.resolution < 1) throw ProtocolError("model info: bad resolution");
    info_ = info;
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("model info: ") + e.what());
  }
  return *info_;
}

TensorPayload image_to_tensor(const RgbImage<float>& image) {
  TensorPayload tensor;
  tensor.shape = {1, image.height, image.width, 3};
  tensor.data.resize(std::size_t(image.data.size()));
  for (Index p = 0; p < image.pixel_count(); ++p) {
    for (int c = 0; c < 3; ++c) tensor.data[std::size_t(3 * p + c)] = image.data(p, c);
  }
  return tensor;
}

RgbImage<float> tensor_to_image(const TensorPayload& tensor) {
  if (tensor.shape.size() != 4 || tensor.shape[0] != 1 || tensor.shape[3] != 3) {
    throw ProtocolError("image tensor: expected shape [1, H, W, 3]");
  }
  RgbImage<float> image(int(tensor.shape[1]), int(tensor.shape[2]));
  for (Index p = 0; p < image.pixel_count(); ++p) {
    for (int c = 0; c < 3; ++c) image.data(p, c) = tensor.data[std::size_t(3 * p + c)];
  }
  return image;
}

Eigen::MatrixXf ScorerClient::embed_text(const std::vector<std::string>& captions) {
  if (captions.empty()) throw ArgumentError("embed_text: empty caption list");
  const std::string body = json{{"captions", captions}}.dump();
  auto result = with_retries(policy_, "POST /v1/embed_text", [&] {
    return impl_->client.Post("/v1/embed_text", body, "application/json");
  });
  return rows_from_tensor(decode_tensor(result->body), captions.size());
}

Eigen::MatrixXf ScorerClient::embed_images(const std::vector<RgbImage<float>>& images) {
  if (images.empty()) throw ArgumentError("embed_images: empty image list");
  TensorPayload tensor;
  const int h = images.front().height;
  const int w = images.front().width;
  tensor.shape = {std::int64_t(images.size()), h, w, 3};
  tensor.data.reserve(images.size() * std::size_t(h) * std::size_t(w) * 3);
  for (const auto& image : images) {
    if (image.height != h || image.width != w) {
      throw ArgumentError("embed_images: all images must share one resolution");
    }
    const TensorPayload one = image_to_tensor(image);
    tensor.data.insert(tensor.data.end(), one.data.begin(), one.data.end());
  }
  const std::string body = encode_tensor(tensor);
  auto result = with_retries(policy_, "POST /v1/embed_image", [&] {
    return impl_->client.Post("/v1/embed_image", body, kTensorContentType);
  });
  return rows_from_tensor(decode_tensor(result->body), images.size());
}

GuidanceResult<float> ScorerClient::image_grad(const RgbImage<float>& image,
                                               const std::string& caption) {
  const std::string body = encode_tensor(image_to_tensor(image));
  const httplib::Headers headers = {
      {"X-Caption", json(caption).dump(-1, ' ', /*ensure_ascii=*/true)}};
  auto result = with_retries(policy_, "POST /v1/image_grad", [&] {
    return impl_->client.Post("/v1/image_grad", headers, body, kTensorContentType);
  });

  GuidanceResult<float> out;
  try {
    const json meta = json::parse(result->get_header_value("X-Tensor-Meta"));
    out.loss = meta.at("loss").get<float>();
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("image_grad: bad X-Tensor-Meta header: ") + e.what());
  }
  out.image_gradient = tensor_to_image(decode_tensor(result->body));
  if (out.image_gradient.height != image.height || out.image_gradient.width != image.width) {
    throw ProtocolError("image_grad: gradient shape differs from the image");
  }
  if (!std::isfinite(out.loss) || !out.image_gradient.data.allFinite()) {
    throw ProtocolError("image_grad: non-finite loss or gradient");
  }
  return out;
}

GuidanceResult<float> score_remote(ScorerClient& client, const RgbImage<float>& image,
                                   Caption& caption) {
  const int resolution = client.info().resolution;
  if (image.height != resolution || image.width != resolution) {
    throw ArgumentError("score_remote: image must be resized to " + std::to_string(resolution) +
                        "x" + std::to_string(resolution));
  }
  if (!caption.embedding) {
    caption.embedding = client.embed_text({caption.text}).row(0).transpose();
  }
  return client.image_grad(image, caption.text);
}

Eigen::MatrixXf embed_batch(ScorerClient& client, const std::vector<RgbImage<float>>& images) {
  return client.embed_images(images);
}

Eigen::MatrixXf embed_batch(ScorerClient& client, const std::vector<std::string>& captions) {
  return client.embed_text(captions);
}

RemoteScorer::RemoteScorer(ScorerClient& client, Caption caption)
    : client_(client), caption_(std::move(caption)), resolution_(client.info().resolution) {}

GuidanceResult<float> RemoteScorer::score(const RgbImage<float>& image, const ViewContext&) {
  return score_remote(client_, image, caption_);
}

}  // namespace dreamfield
