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

#include <json.hpp>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>

namespace dreamfield {

namespace {

using json = nlohmann::json;
static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little-endian");

using RowMajor = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Entry {
  std::string name;
  const MatX<float>* value;
};

json arch_to_json(const FieldArch& a) {
  return {{"input_dim", a.input_dim},
          {"width", a.width},
          {"bottleneck", a.bottleneck},
          {"blocks", a.blocks},
          {"layer_norm_eps", a.layer_norm_eps}};
}

FieldArch arch_from_json(const json& j) {
  FieldArch a;
  a.input_dim = j.at("input_dim").get<int>();
  a.width = j.at("width").get<int>();
  a.bottleneck = j.at("bottleneck").get<int>();
  a.blocks = j.at("blocks").get<int>();
  a.layer_norm_eps = j.at("layer_norm_eps").get<double>();
  return a;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck) {
  const auto& tensors = ck.params.tensors();
  if (ck.optim.first_moment.size() != tensors.size() ||
      ck.optim.second_moment.size() != tensors.size()) {
    throw ArgumentError("save_checkpoint: optimizer state does not match the parameters");
  }
  const MatX<float> origin = ck.tracker.origin.transpose();
  const MatX<float> frequencies = ck.basis.frequencies;
  std::vector<Entry> entries;
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    entries.push_back({"param/" + tensors[i].name, &tensors[i].value});
  }
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    entries.push_back({"adam_m/" + tensors[i].name, &ck.optim.first_moment[i]});
  }
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    entries.push_back({"adam_v/" + tensors[i].name, &ck.optim.second_moment[i]});
  }
  entries.push_back({"basis/frequencies", &frequencies});
  entries.push_back({"origin", &origin});

  json table = json::array();
  std::size_t offset = 0;
  for (const auto& e : entries) {
    table.push_back({{"name", e.name},
                     {"shape", {e.value->rows(), e.value->cols()}},
                     {"dtype", "float32"},
                     {"offset", offset}});
    offset += std::size_t(e.value->size()) * sizeof(float);
  }
  json config = json::parse(ck.config_json.empty() ? "{}" : ck.config_json);
  const json header = {{"iteration", ck.iteration},
                       {"adam_step", ck.optim.step},
                       {"arch", arch_to_json(ck.params.arch())},
                       {"levels", ck.basis.levels},
                       {"origin_decay", ck.tracker.decay},
                       {"config", config},
                       {"data_bytes", offset},
                       {"tensors", table}};

  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write checkpoint '" + tmp.string() + "'");
    out << kCheckpointMagic << ' ' << kCheckpointVersion << '\n' << header.dump() << '\n';
    for (const auto& e : entries) {
      const RowMajor data = *e.value;
      out.write(reinterpret_cast<const char*>(data.data()),
                std::streamsize(data.size() * sizeof(float)));
    }
    if (!out) throw FormatError("failed writing checkpoint '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path,
                           const std::optional<FieldArch>& expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open checkpoint '" + path.string() + "'");
  const std::string where = "checkpoint '" + path.string() + "'";

  std::string magic_line;
  std::getline(in, magic_line);
  std::istringstream magic_fields(magic_line);
  std::string magic;
  int version = 0;
  if (!(magic_fields >> magic >> version) || magic != kCheckpointMagic) {
    throw FormatError(where + ": not a checkpoint file");
  }
  if (version != kCheckpointVersion) {
    throw FormatError(where + ": unsupported format version " + std::to_string(version));
  }
  std::string header_line;
  if (!std::getline(in, header_line)) throw FormatError(where + ": truncated header");
  const std::string payload((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  Checkpoint ck;
  try {
    const json header = json::parse(header_line);
    const FieldArch arch = arch_from_json(header.at("arch"));
    if (expected && !(*expected == arch)) {
      throw ShapeMismatchError(where + ": architecture differs from the expected one");
    }
    validate(arch);
    if (header.at("data_bytes").get<std::size_t>() != payload.size()) {
      throw FormatError(where + ": expected " + std::to_string(header.at("data_bytes").get<std::size_t>()) +
                        " data bytes, found " + std::to_string(payload.size()));
    }

    std::map<std::string, MatX<float>> loaded;
    for (const auto& t : header.at("tensors")) {
      if (t.at("dtype").get<std::string>() != "float32") {
        throw FormatError(where + ": unsupported dtype for " + t.at("name").get<std::string>());
      }
      const Index rows = t.at("shape").at(0).get<Index>();
      const Index cols = t.at("shape").at(1).get<Index>();
      const std::size_t offset = t.at("offset").get<std::size_t>();
      const std::size_t bytes = std::size_t(rows * cols) * sizeof(float);
      if (rows < 0 || cols < 0 || offset + bytes > payload.size()) {
        throw FormatError(where + ": tensor " + t.at("name").get<std::string>() +
                          " lies outside the data section");
      }
      RowMajor data(rows, cols);
      std::memcpy(data.data(), payload.data() + offset, bytes);
      loaded[t.at("name").get<std::string>()] = data;
    }
    auto take = [&](const std::string& name, Index rows, Index cols) {
      auto it = loaded.find(name);
      if (it == loaded.end()) throw ShapeMismatchError(where + ": missing tensor " + name);
      if (it->second.rows() != rows || it->second.cols() != cols) {
        throw ShapeMismatchError(where + ": tensor " + name + " has shape [" +
                                 std::to_string(it->second.rows()) + ", " +
                                 std::to_string(it->second.cols()) + "], expected [" +
                                 std::to_string(rows) + ", " + std::to_string(cols) + "]");
      }
      return it->second;
    };

    ck.params = FieldParams<float>(arch);
    for (auto& t : ck.params.tensors()) {
      const Index r = t.value.rows(), c = t.value.cols();
      t.value = take("param/" + t.name, r, c);
      ck.optim.first_moment.push_back(take("adam_m/" + t.name, r, c));
      ck.optim.second_moment.push_back(take("adam_v/" + t.name, r, c));
    }
    ck.optim.step = header.at("adam_step").get<long>();
    ck.basis.levels = header.at("levels").get<int>();
    const auto freq = loaded.find("basis/frequencies");
    if (freq == loaded.end() || freq->second.cols() != 3 || 2 * freq->second.rows() != arch.input_dim) {
      throw ShapeMismatchError(where + ": basis frequencies do not match input_dim " +
                               std::to_string(arch.input_dim));
    }
    ck.basis.frequencies = freq->second;
    ck.tracker.origin = take("origin", 1, 3).transpose();
    ck.tracker.decay = header.at("origin_decay").get<double>();
    ck.iteration = header.at("iteration").get<long>();
    ck.config_json = header.at("config").dump();
  } catch (const json::exception& e) {
    throw FormatError(where + ": malformed header: " + e.what());
  } catch (const ConfigError& e) {
    throw ShapeMismatchError(where + ": " + e.what());
  }
  return ck;
}

}  // namespace dreamfield
