// src/core/embedding_io.cc

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

#include "hear/core/embedding_io.hpp"

#include <cmath>
#include <fstream>
#include <iterator>

#include "hear/core/byte_io.hpp"
#include "hear/core/error.hpp"

namespace hear {

std::vector<std::uint8_t> encode_embedding(const EmbeddingSequence& seq) {
  seq.validate();
  if (seq.source_id.size() > 255) {
    throw ValidationError("embedding source_id longer than 255 bytes");
  }
  ByteWriter w;
  w.put_bytes("HEMB");
  w.put<std::uint16_t>(kEmbeddingFormatVersion);
  w.put<std::uint8_t>(static_cast<std::uint8_t>(seq.scale));
  w.put<std::uint8_t>(static_cast<std::uint8_t>(seq.source_id.size()));
  w.put_bytes(seq.source_id);
  w.put<float>(static_cast<float>(seq.frame_rate_hz));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(seq.num_frames));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(seq.dim));
  for (double v : seq.frames) w.put<float>(static_cast<float>(v));
  return std::move(w.bytes());
}

EmbeddingSequence decode_embedding(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "HEMB");
  if (bytes.size() < 4 || r.get_string(4) != "HEMB") throw ValidationError("HEMB: bad magic");
  const auto version = r.get<std::uint16_t>();
  if (version != kEmbeddingFormatVersion) {
    throw ValidationError("HEMB: unsupported version " + std::to_string(version));
  }
  EmbeddingSequence seq;
  const auto scale = r.get<std::uint8_t>();
  if (scale > 1) throw ValidationError("HEMB: invalid scale byte " + std::to_string(scale));
  seq.scale = static_cast<Scale>(scale);
  const auto id_len = r.get<std::uint8_t>();
  seq.source_id = r.get_string(id_len);
  seq.frame_rate_hz = r.get<float>();
  seq.num_frames = r.get<std::uint32_t>();
  seq.dim = r.get<std::uint32_t>();
  const std::size_t expected = seq.num_frames * seq.dim * sizeof(float);
  if (r.remaining() < expected) {
    throw ValidationError("HEMB: truncated payload (expected " + std::to_string(expected) +
                          " bytes for T=" + std::to_string(seq.num_frames) +
                          ", D=" + std::to_string(seq.dim) + ", have " +
                          std::to_string(r.remaining()) + ")");
  }
  if (r.remaining() > expected) {
    throw ValidationError("HEMB: payload length " + std::to_string(r.remaining()) +
                          " does not match T*D*4 = " + std::to_string(expected));
  }
  seq.frames.resize(seq.num_frames * seq.dim);
  for (auto& v : seq.frames) v = r.get<float>();
  seq.validate();
  return seq;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

void write_embedding(const EmbeddingSequence& seq, const std::filesystem::path& path) {
  write_file_bytes(path, encode_embedding(seq));
}

EmbeddingSequence read_embedding(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  try {
    return decode_embedding(bytes);
  } catch (const ValidationError& ex) {
    throw ValidationError(path.string() + ": " + ex.what());
  }
}

}  // namespace hear
