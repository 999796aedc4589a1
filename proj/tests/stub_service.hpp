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

// In-process stand-in for the scoring service. Image embeddings are
// g(I) = normalize(A flatten(I)) with a fixed random A; caption embeddings are
// fixed random unit vectors keyed by the caption text. image_grad returns the
// analytic gradient of -<g(I), h(y)>.

#include "dreamfield/remote_scorer.hpp"
#include "dreamfield/rng.hpp"

#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <functional>
#include <map>
#include <string>
#include <thread>

namespace dreamfield::testing {

class StubService {
 public:
  StubService(int resolution = 8, int dim = 16, std::uint64_t seed = 7)
      : resolution_(resolution), dim_(dim), seed_(seed) {
    const int inputs = resolution * resolution * 3;
    projection_.resize(dim, inputs);
    RandomStream rng(seed, 0, StreamTag::kTest);
    for (Index i = 0; i < projection_.size(); ++i) projection_.data()[i] = float(rng.normal());
    install_routes();
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~StubService() {
    server_.stop();
    thread_.join();
  }

  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_); }
  int resolution() const { return resolution_; }

  /// Answer the next `n` requests with HTTP 503.
  void fail_next(int n) { unavailable_ = n; }
  /// Pin a caption's embedding.
  void set_caption(const std::string& text, const Eigen::VectorXf& embedding) {
    pinned_[text] = embedding.normalized();
  }
  int requests() const { return requests_; }

  Eigen::VectorXf embed_caption(const std::string& text) const {
    if (auto it = pinned_.find(text); it != pinned_.end()) return it->second;
    RandomStream rng(seed_ + std::hash<std::string>{}(text), 1, StreamTag::kTest);
    Eigen::VectorXf v(dim_);
    for (int i = 0; i < dim_; ++i) v[i] = float(rng.normal());
    return v.normalized();
  }

  Eigen::VectorXf embed_pixels(const Eigen::VectorXf& pixels) const {
    return (projection_ * pixels).normalized();
  }

  /// -<g(I), h> and its gradient with respect to the flattened pixels.
  float loss_and_grad(const Eigen::VectorXf& pixels, const Eigen::VectorXf& h,
                      Eigen::VectorXf* grad) const {
    const Eigen::VectorXf u = projection_ * pixels;
    const float norm = u.norm();
    const Eigen::VectorXf g = u / norm;
    const float dot = g.dot(h);
    if (grad) *grad = -projection_.transpose() * ((h - g * dot) / norm);
    return -dot;
  }

 private:
  bool gate(httplib::Response& res) {
    ++requests_;
    if (unavailable_ > 0) {
      --unavailable_;
      res.status = 503;
      res.set_content("loading", "text/plain");
      return false;
    }
    return true;
  }

  void reply_tensor(httplib::Response& res, const TensorPayload& tensor) {
    res.set_content(encode_tensor(tensor), kTensorContentType);
  }

  TensorPayload rows(const std::vector<Eigen::VectorXf>& embeddings) const {
    TensorPayload out;
    out.shape = {std::int64_t(embeddings.size()), dim_};
    for (const auto& e : embeddings) out.data.insert(out.data.end(), e.data(), e.data() + dim_);
    return out;
  }

  void install_routes() {
    using nlohmann::json;
    server_.Get("/v1/info", [this](const httplib::Request&, httplib::Response& res) {
      if (!gate(res)) return;
      res.set_content(
          json{{"model", "linear-stub"}, {"resolution", resolution_}, {"embedding_dim", dim_}}
              .dump(),
          "application/json");
    });
    server_.Get("/v1/health", [this](const httplib::Request&, httplib::Response& res) {
      if (!gate(res)) return;
      res.set_content("ok", "text/plain");
    });
    server_.Post("/v1/embed_text", [this](const httplib::Request& req, httplib::Response& res) {
      if (!gate(res)) return;
      const auto captions = json::parse(req.body).at("captions").get<std::vector<std::string>>();
      if (captions.empty()) {
        res.status = 400;
        return;
      }
      std::vector<Eigen::VectorXf> out;
      for (const auto& c : captions) out.push_back(embed_caption(c));
      reply_tensor(res, rows(out));
    });
    server_.Post("/v1/embed_image", [this](const httplib::Request& req, httplib::Response& res) {
      if (!gate(res)) return;
      const TensorPayload images = decode_tensor(req.body);
      if (images.shape.size() != 4 || images.shape[1] != resolution_ ||
          images.shape[2] != resolution_ || images.shape[3] != 3) {
        res.status = 400;
        return;
      }
      const Index per = Index(resolution_) * resolution_ * 3;
      std::vector<Eigen::VectorXf> out;
      for (std::int64_t b = 0; b < images.shape[0]; ++b) {
        out.push_back(embed_pixels(Eigen::Map<const Eigen::VectorXf>(images.data.data() + b * per, per)));
      }
      reply_tensor(res, rows(out));
    });
    server_.Post("/v1/image_grad", [this](const httplib::Request& req, httplib::Response& res) {
      if (!gate(res)) return;
      const TensorPayload image = decode_tensor(req.body);
      if (image.shape.size() != 4 || image.shape[0] != 1 || image.shape[1] != resolution_) {
        res.status = 400;
        return;
      }
      const std::string caption = json::parse(req.get_header_value("X-Caption")).get<std::string>();
      const Eigen::Map<const Eigen::VectorXf> pixels(image.data.data(), Index(image.data.size()));
      Eigen::VectorXf grad;
      const float loss = loss_and_grad(pixels, embed_caption(caption), &grad);
      TensorPayload out;
      out.shape = image.shape;
      out.data.assign(grad.data(), grad.data() + grad.size());
      res.set_header("X-Tensor-Meta", json{{"loss", loss}}.dump());
      reply_tensor(res, out);
    });
  }

  int resolution_;
  int dim_;
  std::uint64_t seed_;
  Eigen::MatrixXf projection_;
  std::map<std::string, Eigen::VectorXf> pinned_;
  std::atomic<int> unavailable_{0};
  std::atomic<int> requests_{0};
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

/// An endpoint on which nothing listens.
inline std::string dead_endpoint() { return "http://127.0.0.1:1"; }

/// Fast retries so failure paths finish quickly in tests.
inline RetryPolicy quick_retries() {
  RetryPolicy p;
  p.retries = 3;
  p.base_delay_seconds = 0.01;
  p.timeout_seconds = 10.0;
  return p;
}

}  // namespace dreamfield::testing
