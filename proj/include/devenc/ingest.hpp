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
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "devenc/dataset.hpp"
#include "devenc/types.hpp"

namespace devenc {

using Cell = std::optional<std::string>;  // nullopt = missing

// Column-major string table holding the required columns in schema order:
// 11 features, outcome, country_code, region.
struct RawTable {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> cells;  // cells[column][row]
  std::set<std::size_t> flagged_rows;    // rows with an unmappable token
  std::vector<std::string> warnings;

  std::size_t rows() const { return cells.empty() ? 0 : cells.front().size(); }
  std::size_t column(const std::string& name) const;
};

std::vector<std::string> required_columns();

// Reads a UTF-8 CSV with a header row. Unknown columns are dropped with a
// warning; empty cells stay missing. A required column that is absent raises
// SchemaError("missing required column: <name>").
RawTable load_csv(const std::filesystem::path& path);
RawTable parse_csv(const std::string& text);

// Maps survey tokens onto the numeric coding: yes/no/dk -> 1/0/0, gender and
// urban onto {0,1}, education labels onto ordinal integers; numbers are
// rewritten canonically. Unmappable tokens become missing and flag their row.
// Idempotent.
RawTable harmonize(const RawTable& raw);

// Numeric view of a harmonized table. Rows with a missing outcome, country or
// region are dropped with a warning; feature cells may be NaN.
struct NumericTable {
  std::vector<std::string> feature_names;
  Matrix features;
  Vector outcome;
  std::vector<std::string> country;
  std::vector<std::string> region;
  std::vector<std::int64_t> row_id;
  std::vector<std::string> warnings;
};

NumericTable to_numeric(const RawTable& harmonized);

inline constexpr double kMaxMissingFraction = 0.5;

// Per-feature median of observed cells.
Dataset impute_median(const NumericTable& table);

enum class ImputeProtocol { kBlind, kCongenial };

struct ImputeReport {
  std::vector<std::string> warnings;
};

// Round-robin ridge regression imputation starting from the median fill.
// Blind excludes the outcome from the predictors; congenial includes it.
Dataset impute_chained(const NumericTable& table, int iterations = 10,
                       ImputeProtocol protocol = ImputeProtocol::kBlind, ImputeReport* report = nullptr);

// Country-level quality rules: on-track prevalence outside [5%, 95%] or fewer
// than 100 rows rejects the country.
struct CountryAudit {
  std::string country;
  std::size_t rows = 0;
  double prevalence = 0.0;
  bool accepted = true;
  std::string reason;
};

struct AuditResult {
  std::vector<CountryAudit> countries;
  Dataset accepted;
};

AuditResult audit_countries(const Dataset& data, std::size_t min_rows = 100, double min_prevalence = 0.05,
                            double max_prevalence = 0.95);

// Dataset CSV: schema features, outcome, country_code, region,
// wealth_quintile, row_id. Doubles use shortest round-trip text.
std::string dataset_to_csv(const Dataset& data);
// Reads either the dataset CSV (quintile and row_id present) or an already
// numeric ingest CSV, computing quintiles and ids when absent. Missing cells
// are rejected; run ingest first.
Dataset dataset_from_csv(const std::string& text);
Dataset load_dataset(const std::filesystem::path& path);

std::string format_double(double v);

}  // namespace devenc
