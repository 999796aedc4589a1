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

#include "dreamfield/tensor_payload.hpp"

#include <bit>
#include <cstring>

namespace dreamfield {

namespace {

static_assert(std::endian::native == std::endian::little,
              "tensor payloads are little-endian; big-endian hosts need byte swapping");

template <typename T>
void put(std::string& out, T value) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  out.append(bytes, sizeof(T));
}

template <typename T>
T get(std::string_view bytes, std::size_t offset) {
  T value;
  std::memcpy(&value, bytes.data() + offset, sizeof(T));
  return value;
}

}  // namespace

std::size_t TensorPayload::element_count() const {
  std::size_t n = 1;
  for (auto d : shape) n *= std::size_t(d);
  return n;
}

std::string encode_tensor(const TensorPayload& tensor) {
  for (auto d : tensor.shape) {
    if (d < 0) throw ProtocolError("encode_tensor: negative dimension");
  }
  if (tensor.element_count() != tensor.data.size()) {
    throw ProtocolError("encode_tensor: data length does not match shape");
  }
  std::string out;
  out.reserve(TensorPayload::kHeaderBytes + 8 * tensor.shape.size() + 4 * tensor.data.size());
  out.append("TPv1", 4);
  put<std::uint32_t>(out, TensorPayload::kFloat32);
  put<std::uint32_t>(out, std::uint32_t(tensor.shape.size()));
  put<std::uint32_t>(out, 0u);
  for (auto d : tensor.shape) put<std::int64_t>(out, d);
  out.append(reinterpret_cast<const char*>(tensor.data.data()), 4 * tensor.data.size());
  return out;
}

TensorPayload decode_tensor(std::string_view bytes) {
  if (bytes.size() < TensorPayload::kHeaderBytes) throw ProtocolError("tensor payload truncated");
  if (bytes.substr(0, 4) != "TPv1") throw ProtocolError("tensor payload: bad magic");
  if (get<std::uint32_t>(bytes, 4) != TensorPayload::kFloat32) {
    throw ProtocolError("tensor payload: unsupported dtype");
  }
  const std::uint32_t rank = get<std::uint32_t>(bytes, 8);
  if (rank > 16) throw ProtocolError("tensor payload: implausible rank");
  std::size_t offset = TensorPayload::kHeaderBytes;
  if (bytes.size() < offset + 8 * std::size_t(rank)) {
    throw ProtocolError("tensor payload: truncated shape");
  }
  TensorPayload tensor;
  for (std::uint32_t i = 0; i < rank; ++i) {
    const auto d = get<std::int64_t>(bytes, offset);
    if (d < 0) throw ProtocolError("tensor payload: negative dimension");
    tensor.shape.push_back(d);
    offset += 8;
  }
  const std::size_t count = tensor.element_count();
  if (bytes.size() - offset != 4 * count) {
    throw ProtocolError("tensor payload: expected " + std::to_string(4 * count) +
                        " data bytes, got " + std::to_string(bytes.size() - offset));
  }
  tensor.data.resize(count);
  std::memcpy(tensor.data.data(), bytes.data() + offset, 4 * count);
  return tensor;
}

}  // namespace dreamfield
