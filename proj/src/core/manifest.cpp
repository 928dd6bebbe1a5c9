// Copyright 2026 The NNMPC Authors
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

#include "core/manifest.hpp"

#include "core/error.hpp"
#include "core/io.hpp"
#include <nlohmann/json.hpp>

#ifndef NNMPC_VERSION_STRING
#define NNMPC_VERSION_STRING "0.0.0"
#endif

namespace nnmpc {
namespace {

using json = nlohmann::ordered_json;

json refs_json(const std::vector<FileRef>& refs) {
  json a = json::array();
  for (const FileRef& r : refs) {
    a.push_back(json{{"role", r.role}, {"path", r.path}, {"sha256", r.sha256}});
  }
  return a;
}

std::vector<FileRef> refs_from(const json& a, const char* where) {
  if (!a.is_array()) throw Error(ErrorCode::kSchema, std::string("manifest: ") + where + ": expected an array");
  std::vector<FileRef> out;
  for (const json& r : a) {
    out.push_back(FileRef{r.at("role").get<std::string>(), r.at("path").get<std::string>(),
                          r.at("sha256").get<std::string>()});
  }
  return out;
}

}  // namespace

const char* library_version() { return NNMPC_VERSION_STRING; }

Manifest make_manifest(const std::string& command, const std::string& config_json) {
  Manifest m;
  m.command = command;
  m.version = library_version();
  m.config = config_json;
  m.config_sha256 = sha256_hex(config_json);
  return m;
}

FileRef file_ref(const std::string& role, const std::filesystem::path& path,
                 const std::filesystem::path& base_dir) {
  std::error_code ec;
  std::filesystem::path rel = std::filesystem::relative(path, base_dir, ec);
  if (ec || rel.empty()) rel = path;
  return FileRef{role, rel.generic_string(), file_sha256(path)};
}

std::string serialize_manifest(const Manifest& m) {
  json root;
  root["command"] = m.command;
  root["version"] = m.version;
  root["config_sha256"] = m.config_sha256;
  root["config"] = m.config.empty() ? json::object() : json::parse(m.config);
  root["scenario"] = m.scenario.empty() ? json(nullptr) : json::parse(m.scenario);
  json seeds = json::object();
  for (const auto& [name, value] : m.seeds) seeds[name] = value;
  root["seeds"] = seeds;
  root["inputs"] = refs_json(m.inputs);
  root["outputs"] = refs_json(m.outputs);
  root["note"] = m.note;
  return root.dump(2) + "\n";
}

Manifest parse_manifest(const std::string& text) {
  try {
    const json root = json::parse(text);
    Manifest m;
    m.command = root.at("command").get<std::string>();
    m.version = root.at("version").get<std::string>();
    m.config_sha256 = root.at("config_sha256").get<std::string>();
    m.config = root.at("config").dump(2) + "\n";
    if (!root.at("scenario").is_null()) m.scenario = root.at("scenario").dump(2) + "\n";
    for (auto it = root.at("seeds").begin(); it != root.at("seeds").end(); ++it) {
      m.seeds.emplace_back(it.key(), it.value().get<std::uint64_t>());
    }
    m.inputs = refs_from(root.at("inputs"), "inputs");
    m.outputs = refs_from(root.at("outputs"), "outputs");
    m.note = root.value("note", "");
    if (sha256_hex(m.config) != m.config_sha256) {
      throw Error(ErrorCode::kSchema, "manifest: config does not match config_sha256");
    }
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kSchema, std::string("manifest: ") + e.what());
  }
}

std::filesystem::path manifest_path(const std::filesystem::path& dir, const std::string& command) {
  return dir / (command + ".manifest.json");
}

void save_manifest(const Manifest& m, const std::filesystem::path& dir) {
  write_text_file(manifest_path(dir, m.command), serialize_manifest(m));
}

Manifest load_manifest(const std::filesystem::path& path) {
  return parse_manifest(read_text_file(path));
}

std::filesystem::path resolve(const FileRef& ref, const std::filesystem::path& manifest_file) {
  const std::filesystem::path p(ref.path);
  if (p.is_absolute()) return p;
  return manifest_file.parent_path() / p;
}

void verify_outputs(const Manifest& m, const std::filesystem::path& manifest_file) {
  for (const FileRef& r : m.outputs) {
    if (file_sha256(resolve(r, manifest_file)) != r.sha256) {
      throw Error(ErrorCode::kIo, "manifest: " + r.path + " does not match its recorded hash");
    }
  }
}

}  // namespace nnmpc
