// src/model/checkpoint.cc

// Copyright 2026 The HEAR Toolkit Authors
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

#include "hear/model/checkpoint.hpp"

#include <cmath>
#include <set>

#include "hear/core/byte_io.hpp"
#include "hear/core/embedding_io.hpp"
#include "hear/core/error.hpp"

namespace hear::model {

std::vector<std::uint8_t> encode_checkpoint(const CheckpointContents& c) {
  ByteWriter w;
  w.put_bytes("HCKP");
  w.put<std::uint16_t>(kCheckpointVersion);
  const std::string blob = c.config.dump();
  w.put<std::uint32_t>(static_cast<std::uint32_t>(blob.size()));
  w.put_bytes(blob);
  for (const auto& t : c.tensors) {
    if (t.name.size() > 0xFFFF) throw ValidationError("tensor name too long: " + t.name);
    if (t.shape.size() > 255) throw ValidationError("tensor rank too large: " + t.name);
    if (grad::numel(t.shape) != t.data.size()) throw ValidationError("tensor size mismatch: " + t.name);
    w.put<std::uint16_t>(static_cast<std::uint16_t>(t.name.size()));
    w.put_bytes(t.name);
    w.put<std::uint8_t>(static_cast<std::uint8_t>(t.shape.size()));
    for (auto d : t.shape) w.put<std::uint32_t>(static_cast<std::uint32_t>(d));
    for (float v : t.data) w.put<float>(v);
  }
  return std::move(w.bytes());
}

CheckpointContents decode_checkpoint(std::span<const std::uint8_t> bytes, const std::string& context) {
  ByteReader r(bytes, context);
  if (bytes.size() < 4 || r.get_string(4) != "HCKP") throw ValidationError(context + ": bad magic (not a checkpoint)");
  const auto version = r.get<std::uint16_t>();
  if (version != kCheckpointVersion) {
    throw ValidationError(context + ": unsupported checkpoint version " + std::to_string(version));
  }
  CheckpointContents c;
  const auto blob_len = r.get<std::uint32_t>();
  try {
    c.config = nlohmann::json::parse(r.get_string(blob_len));
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(context + ": config blob is not valid JSON: " + e.what());
  }
  // Tensors run to end of file.
  while (!r.done()) {
    StoredTensor t;
    t.name = r.get_string(r.get<std::uint16_t>());
    const auto rank = r.get<std::uint8_t>();
    for (std::uint8_t i = 0; i < rank; ++i) t.shape.push_back(r.get<std::uint32_t>());
    t.data.resize(grad::numel(t.shape));
    for (auto& v : t.data) v = r.get<float>();
    c.tensors.push_back(std::move(t));
  }
  return c;
}

template <typename Real>
CheckpointContents snapshot(const HearModel<Real>& model, nlohmann::json metadata) {
  CheckpointContents c;
  c.config = {{"model", to_json(model.config())}, {"meta", std::move(metadata)}};
  for (const auto& p : model.parameters()) {
    StoredTensor t{p.name, p.tensor.shape, {}};
    t.data.reserve(p.tensor.size());
    for (Real v : p.tensor.data) t.data.push_back(static_cast<float>(v));
    c.tensors.push_back(std::move(t));
  }
  return c;
}

template <typename Real>
HearModel<Real> restore(const CheckpointContents& c) {
  if (!c.config.contains("model")) throw ValidationError("checkpoint config has no 'model' section");
  HearModel<Real> model(model_config_from_json(c.config.at("model")));
  std::set<std::string> seen;
  for (const auto& t : c.tensors) {
    if (!seen.insert(t.name).second) throw ValidationError("checkpoint repeats tensor '" + t.name + "'");
    Tensor<Real>* target = nullptr;
    try {
      target = &model.param(t.name);
    } catch (const ValidationError&) {
      throw ValidationError("checkpoint tensor '" + t.name + "' does not belong to the configured model");
    }
    if (target->shape != t.shape) {
      throw ValidationError("checkpoint tensor '" + t.name + "' has shape " + grad::shape_string(t.shape) +
                            ", model expects " + grad::shape_string(target->shape));
    }
    for (std::size_t i = 0; i < t.data.size(); ++i) {
      if (!std::isfinite(t.data[i])) throw ValidationError("checkpoint tensor '" + t.name + "' is not finite");
      target->data[i] = static_cast<Real>(t.data[i]);
    }
  }
  for (const auto& p : model.parameters()) {
    if (!seen.count(p.name)) throw ValidationError("checkpoint is missing tensor '" + p.name + "'");
  }
  return model;
}

template <typename Real>
void save_checkpoint(const HearModel<Real>& model, const std::filesystem::path& path, nlohmann::json metadata) {
  write_file_bytes(path, encode_checkpoint(snapshot(model, std::move(metadata))));
}

CheckpointContents read_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(read_file_bytes(path), path.string());
}

template <typename Real>
HearModel<Real> load_checkpoint(const std::filesystem::path& path) {
  return restore<Real>(read_checkpoint(path));
}

template <typename Real>
void round_to_stored(HearModel<Real>& model) {
  for (auto& p : model.parameters()) {
    for (auto& v : p.tensor.data) v = static_cast<Real>(static_cast<float>(v));
  }
}

#define HEAR_INSTANTIATE(Real)                                                                \
  template CheckpointContents snapshot<Real>(const HearModel<Real>&, nlohmann::json);         \
  template HearModel<Real> restore<Real>(const CheckpointContents&);                          \
  template void save_checkpoint<Real>(const HearModel<Real>&, const std::filesystem::path&,   \
                                      nlohmann::json);                                        \
  template HearModel<Real> load_checkpoint<Real>(const std::filesystem::path&);               \
  template void round_to_stored<Real>(HearModel<Real>&);

HEAR_INSTANTIATE(float)
HEAR_INSTANTIATE(double)

#undef HEAR_INSTANTIATE

}  // namespace hear::model
