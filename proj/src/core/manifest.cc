// src/core/manifest.cc

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

#include "hear/core/manifest.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "hear/core/error.hpp"

namespace hear {

using nlohmann::json;

std::string_view to_string(Split split) {
  switch (split) {
    case Split::kTrain:
      return "train";
    case Split::kVal:
      return "val";
    case Split::kTest:
      return "test";
  }
  return "train";
}

Split split_from_string(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "val") return Split::kVal;
  if (name == "test") return Split::kTest;
  throw ValidationError("unknown split '" + std::string(name) + "'");
}

std::filesystem::path Manifest::resolve(const std::string& path) const {
  std::filesystem::path p(path);
  if (p.is_absolute() || base_dir.empty()) return p;
  return base_dir / p;
}

std::vector<const ManifestEntry*> Manifest::split(Split which) const {
  std::vector<const ManifestEntry*> out;
  for (const auto& e : entries) {
    if (e.split == which) out.push_back(&e);
  }
  return out;
}

namespace {

ScoreVector parse_scores(const json& j) {
  ScoreVector s;
  if (j.is_array()) {
    s.values = j.get<std::vector<double>>();
  } else if (j.is_object()) {
    s.values = j.at("values").get<std::vector<double>>();
    if (j.contains("dimension_names")) {
      s.dimension_names = j.at("dimension_names").get<std::vector<std::string>>();
    }
  } else {
    throw ValidationError("'scores' must be an array or an object with 'values'");
  }
  s.validate();
  return s;
}

ManifestEntry parse_entry(const json& j) {
  if (!j.is_object()) throw ValidationError("expected a JSON object");
  ManifestEntry e;
  if (!j.contains("id") || !j.at("id").is_string()) {
    throw ValidationError("missing string field 'id'");
  }
  e.id = j.at("id").get<std::string>();
  if (j.contains("audio_path") && !j.at("audio_path").is_null()) {
    e.audio_path = j.at("audio_path").get<std::string>();
  }
  if (j.contains("embedding_paths") && !j.at("embedding_paths").is_null()) {
    e.embedding_paths = j.at("embedding_paths").get<std::map<std::string, std::string>>();
  }
  if (j.contains("scores") && !j.at("scores").is_null()) e.scores = parse_scores(j.at("scores"));
  if (j.contains("split") && !j.at("split").is_null()) {
    e.split = split_from_string(j.at("split").get<std::string>());
  }
  if (!e.audio_path && e.embedding_paths.empty()) {
    throw ValidationError("entry '" + e.id + "' has neither audio_path nor embedding_paths");
  }
  return e;
}

}  // namespace

Manifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir) {
  Manifest m;
  m.base_dir = base_dir;
  std::set<std::string> seen;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ManifestEntry entry;
    try {
      entry = parse_entry(json::parse(line));
    } catch (const json::exception& ex) {
      throw ValidationError("manifest line " + std::to_string(line_no) + ": " + ex.what());
    } catch (const ValidationError& ex) {
      throw ValidationError("manifest line " + std::to_string(line_no) + ": " + ex.what());
    }
    if (!seen.insert(entry.id).second) {
      throw ValidationError("manifest line " + std::to_string(line_no) + ": duplicate id '" +
                            entry.id + "'");
    }
    m.entries.push_back(std::move(entry));
  }
  if (m.entries.empty()) throw ValidationError("empty manifest");
  return m;
}

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open manifest " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_manifest(buffer.str(), path.parent_path());
}

std::string serialize_manifest(const Manifest& manifest) {
  std::string out;
  for (const auto& e : manifest.entries) {
    json j;
    j["id"] = e.id;
    if (e.audio_path) j["audio_path"] = *e.audio_path;
    if (!e.embedding_paths.empty()) j["embedding_paths"] = e.embedding_paths;
    if (e.scores) {
      if (e.scores->dimension_names.empty()) {
        j["scores"] = e.scores->values;
      } else {
        j["scores"] = {{"values", e.scores->values},
                       {"dimension_names", e.scores->dimension_names}};
      }
    }
    j["split"] = std::string(to_string(e.split));
    out += j.dump();
    out += '\n';
  }
  return out;
}

void save_manifest(const Manifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write manifest " + path.string());
  out << serialize_manifest(manifest);
  if (!out) throw IoError("failed writing manifest " + path.string());
}

void validate_manifest(const Manifest& manifest) {
  std::set<std::string> seen;
  for (const auto& e : manifest.entries) {
    if (!seen.insert(e.id).second) throw ValidationError("duplicate id '" + e.id + "'");
    if (!e.audio_path && e.embedding_paths.empty()) {
      throw ValidationError("entry '" + e.id + "' has neither audio_path nor embedding_paths");
    }
    if (e.scores) e.scores->validate();
  }
}

}  // namespace hear
