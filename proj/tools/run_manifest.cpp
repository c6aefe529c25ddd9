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

#include "run_manifest.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>

#include <openssl/evp.h>

#include "devenc/error.hpp"
#include "devenc/serialize.hpp"

#ifndef DEVENC_VERSION
#define DEVENC_VERSION "0.0.0"
#endif

namespace devenc::cli {

using nlohmann::json;

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof(buf), "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(io::read_file(path)); }

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

RunManifest::RunManifest(std::string command, std::vector<std::string> argv)
    : command_(std::move(command)), argv_(std::move(argv)), started_(utc_timestamp()) {}

void RunManifest::set_config_file(const std::filesystem::path& path) {
  config_file_ = {{"path", path.string()}, {"sha256", sha256_file(path)}};
}

void RunManifest::add_input(const std::filesystem::path& path) {
  inputs_.push_back({{"path", path.string()}, {"sha256", sha256_file(path)}});
}

void RunManifest::add_output(const std::filesystem::path& path) { outputs_.push_back(path); }

json RunManifest::to_json() const {
  json outputs = json::array();
  for (const auto& p : outputs_) outputs.push_back({{"path", p.string()}, {"sha256", sha256_file(p)}});
  return {{"format", "devenc.run_manifest/1"},
          {"tool_version", DEVENC_VERSION},
          {"command", command_},
          {"argv", argv_},
          {"seed", seed_},
          {"config_file", config_file_},
          {"effective_config", effective_},
          {"inputs", inputs_},
          {"outputs", std::move(outputs)},
          {"started_at", started_},
          {"finished_at", utc_timestamp()}};
}

std::filesystem::path RunManifest::write(const std::filesystem::path& primary) {
  std::filesystem::path path = primary;
  path += ".manifest.json";
  io::write_file_atomic(path, io::dump(to_json()));
  return path;
}

}  // namespace devenc::cli
