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

#include "devenc/serialize.hpp"

#include <fstream>
#include <sstream>
#include <unistd.h>

#include "devenc/error.hpp"

namespace devenc::io {

json to_json(const nn::MlpParams& params) {
  json j;
  j["layer_dims"] = params.layer_dims;
  j["output_activation"] = params.output_activation == nn::Activation::kReLU ? "relu" : "identity";
  json weights = json::array();
  json biases = json::array();
  for (std::size_t l = 0; l < params.num_layers(); ++l) {
    json rows = json::array();
    const Matrix& w = params.weights[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      rows.push_back(std::vector<double>(w.row(r).data(), w.row(r).data() + w.cols()));
    }
    weights.push_back(std::move(rows));
    biases.push_back(to_json(params.biases[l]));
  }
  j["weights"] = std::move(weights);
  j["biases"] = std::move(biases);
  return j;
}

nn::MlpParams mlp_from_json(const json& j) {
  nn::MlpParams p;
  p.layer_dims = j.at("layer_dims").get<std::vector<int>>();
  const std::string act = j.value("output_activation", "identity");
  if (act == "relu") {
    p.output_activation = nn::Activation::kReLU;
  } else if (act == "identity") {
    p.output_activation = nn::Activation::kIdentity;
  } else {
    throw SchemaError("unknown output activation: " + act);
  }
  for (const auto& rows : j.at("weights")) {
    const auto r = static_cast<Eigen::Index>(rows.size());
    const auto c = r == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(rows[0].size());
    Matrix w(r, c);
    for (Eigen::Index i = 0; i < r; ++i) {
      const auto& row = rows[static_cast<std::size_t>(i)];
      if (static_cast<Eigen::Index>(row.size()) != c) throw ShapeError("ragged weight matrix in JSON");
      for (Eigen::Index k = 0; k < c; ++k) w(i, k) = row[static_cast<std::size_t>(k)].get<double>();
    }
    p.weights.push_back(std::move(w));
  }
  for (const auto& b : j.at("biases")) p.biases.push_back(vector_from_json(b));
  p.validate();
  return p;
}

json to_json(const Standardizer& s) { return json{{"mean", s.mean}, {"std", s.std}}; }

Standardizer standardizer_from_json(const json& j) {
  Standardizer s;
  s.mean = j.at("mean").get<std::vector<double>>();
  s.std = j.at("std").get<std::vector<double>>();
  return s;
}

json to_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector vector_from_json(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw DataError("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void expect_format(const json& j, const std::string& expected) {
  std::string got;
  if (j.contains("format")) {
    got = j.at("format").get<std::string>();
  } else if (j.contains("format_version")) {
    got = j.at("format_version").get<std::string>();
  }
  if (got != expected) throw SchemaError("expected file format '" + expected + "', found '" + got + "'");
}

}  // namespace devenc::io
