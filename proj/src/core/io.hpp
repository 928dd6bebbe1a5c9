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

#ifndef NNMPC_CORE_IO_HPP_
#define NNMPC_CORE_IO_HPP_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace nnmpc {

// Throw Error(kIo) on failure.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

std::string sha256_hex(std::string_view data);
std::string file_sha256(const std::filesystem::path& path);

// printf-style "%.<digits>g".
std::string format_number(double value, int digits);

// Splits one CSV line on commas; no quoting.
std::vector<std::string_view> split_csv_line(std::string_view line);

// Throws Error(kSchema) naming `what` when the field is not a number.
double parse_number(std::string_view field, const std::string& what);

}  // namespace nnmpc

#endif  // NNMPC_CORE_IO_HPP_
