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

// Run manifests: everything needed to reproduce a command's outputs, plus
// the hashes of what it wrote. No timestamps, so equal runs give equal
// manifests up to the timing files.

#ifndef NNMPC_CORE_MANIFEST_HPP_
#define NNMPC_CORE_MANIFEST_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace nnmpc {

struct FileRef {
  std::string role;
  std::string path;  // relative to the manifest's directory when possible
  std::string sha256;

  friend bool operator==(const FileRef&, const FileRef&) = default;
};

struct Manifest {
  std::string command;
  std::string version;
  std::string config;        // canonical config JSON
  std::string config_sha256;
  std::string scenario;      // canonical scenario JSON, empty when unused
  std::vector<std::pair<std::string, std::uint64_t>> seeds;
  std::vector<FileRef> inputs;
  std::vector<FileRef> outputs;
  std::string note;

  friend bool operator==(const Manifest&, const Manifest&) = default;
};

const char* library_version();

// Fills version and config hash.
Manifest make_manifest(const std::string& command, const std::string& config_json);

// Hashes `path` and records it relative to `base_dir`.
FileRef file_ref(const std::string& role, const std::filesystem::path& path,
                 const std::filesystem::path& base_dir);

std::string serialize_manifest(const Manifest& m);
Manifest parse_manifest(const std::string& text);

std::filesystem::path manifest_path(const std::filesystem::path& dir,
                                    const std::string& command);
void save_manifest(const Manifest& m, const std::filesystem::path& dir);
Manifest load_manifest(const std::filesystem::path& path);

// Resolves a FileRef path against the manifest's directory.
std::filesystem::path resolve(const FileRef& ref, const std::filesystem::path& manifest_file);

// Throws Error(kIo) naming the first output whose hash no longer matches.
void verify_outputs(const Manifest& m, const std::filesystem::path& manifest_file);

}  // namespace nnmpc

#endif  // NNMPC_CORE_MANIFEST_HPP_
