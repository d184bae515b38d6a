// include/hear/core/embedding_io.hpp

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

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "hear/core/types.hpp"

namespace hear {

// HEMB v1, little-endian:
//   "HEMB" | u16 version | u8 scale | u8 source_id_len | source_id |
//   f32 frame_rate_hz | u32 T | u32 D | T*D f32 row-major
inline constexpr std::uint16_t kEmbeddingFormatVersion = 1;

std::vector<std::uint8_t> encode_embedding(const EmbeddingSequence& seq);
EmbeddingSequence decode_embedding(std::span<const std::uint8_t> bytes);

void write_embedding(const EmbeddingSequence& seq, const std::filesystem::path& path);
EmbeddingSequence read_embedding(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace hear
