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

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dreamfield {

/// Malformed or semantically invalid message from the scoring service.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Binary tensor body shared with the scoring service:
///
///   bytes 0..3    magic "TPv1"
///   bytes 4..7    dtype code, uint32 LE (1 = float32)
///   bytes 8..11   rank, uint32 LE
///   bytes 12..15  reserved, zero
///   rank x int64 LE dimensions
///   product(shape) x float32 LE, row-major
struct TensorPayload {
  static constexpr std::uint32_t kFloat32 = 1;
  static constexpr std::size_t kHeaderBytes = 16;

  std::vector<std::int64_t> shape;
  std::vector<float> data;

  std::size_t element_count() const;
};

std::string encode_tensor(const TensorPayload& tensor);

/// Throws ProtocolError on bad magic, unknown dtype or a length that does not
/// match the declared shape.
TensorPayload decode_tensor(std::string_view bytes);

inline constexpr const char* kTensorContentType = "application/octet-stream";

}  // namespace dreamfield
