// Copyright 2026 The devenc Authors.
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
#include <string>

#include <json.hpp>

#include "devenc/nn.hpp"
#include "devenc/standardizer.hpp"
#include "devenc/types.hpp"

namespace devenc::io {

using nlohmann::json;

json to_json(const nn::MlpParams& params);
nn::MlpParams mlp_from_json(const json& j);

json to_json(const Standardizer& s);
Standardizer standardizer_from_json(const json& j);

json to_json(const Vector& v);
Vector vector_from_json(const json& j);

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

// Pretty-printed JSON text with a trailing newline.
std::string dump(const json& j);

// Checks j["format"] or j["format_version"] against `expected`.
void expect_format(const json& j, const std::string& expected);

}  // namespace devenc::io
