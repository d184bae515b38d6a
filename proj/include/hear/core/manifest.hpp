// include/hear/core/manifest.hpp

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

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hear/core/types.hpp"

namespace hear {

enum class Split { kTrain, kVal, kTest };

std::string_view to_string(Split split);
Split split_from_string(std::string_view name);

struct ManifestEntry {
  std::string id;
  std::optional<std::string> audio_path;
  std::map<std::string, std::string> embedding_paths;
  std::optional<ScoreVector> scores;
  Split split = Split::kTrain;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

/// Ordered dataset index. Relative paths resolve against base_dir.
struct Manifest {
  std::vector<ManifestEntry> entries;
  std::filesystem::path base_dir;

  std::filesystem::path resolve(const std::string& path) const;
  std::vector<const ManifestEntry*> split(Split which) const;
};

// JSON-lines, one object per line. Blank lines are skipped; unknown keys ignored.
Manifest load_manifest(const std::filesystem::path& path);
Manifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir = {});

std::string serialize_manifest(const Manifest& manifest);
void save_manifest(const Manifest& manifest, const std::filesystem::path& path);

// Checks id uniqueness and per-entry invariants.
void validate_manifest(const Manifest& manifest);

}  // namespace hear
