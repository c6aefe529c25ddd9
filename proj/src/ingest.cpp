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

#include "devenc/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>

#include "devenc/error.hpp"
#include "devenc/schema.hpp"
#include "devenc/standardizer.hpp"

namespace devenc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::vector<std::string>> split_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool row_has_content = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        quoted = true;
        row_has_content = true;
        break;
      case ',':
        row.push_back(std::move(field));
        field.clear();
        row_has_content = true;
        break;
      case '\r':
        break;
      case '\n':
        if (row_has_content || !field.empty()) {
          row.push_back(std::move(field));
          rows.push_back(std::move(row));
        }
        field.clear();
        row.clear();
        row_has_content = false;
        break;
      default:
        field.push_back(c);
        row_has_content = true;
    }
  }
  if (quoted) throw DataError("CSV ends inside a quoted field");
  if (row_has_content || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  // Strip a UTF-8 byte order mark from the first header cell.
  if (!rows.empty() && !rows[0].empty() && rows[0][0].rfind("\xEF\xBB\xBF", 0) == 0) {
    rows[0][0].erase(0, 3);
  }
  return rows;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::optional<double> parse_number(std::string_view s) {
  double v = 0.0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) return std::nullopt;
  return v;
}

bool is_missing_token(const std::string& t) {
  return t.empty() || t == "na" || t == "nan" || t == "n/a" || t == "missing" || t == ".";
}

enum class Column { kBinary, kGender, kUrban, kEducation, kOrdinal, kContinuous, kOutcome, kLabel };

Column column_kind(const std::string& name) {
  if (name == "gender") return Column::kGender;
  if (name == "urban") return Column::kUrban;
  if (name == "mother_edu_level") return Column::kEducation;
  if (name == schema::kOutcome) return Column::kOutcome;
  if (name == schema::kCountry || name == schema::kRegion) return Column::kLabel;
  const std::size_t idx = schema::feature_index(name);
  switch (schema::kFeatures[idx].kind) {
    case schema::FeatureKind::kBinary:
      return Column::kBinary;
    case schema::FeatureKind::kOrdinal:
      return Column::kOrdinal;
    case schema::FeatureKind::kContinuous:
      return Column::kContinuous;
  }
  return Column::kContinuous;
}

std::optional<int> yes_no(const std::string& t) {
  if (t == "yes" || t == "y" || t == "true") return 1;
  if (t == "no" || t == "n" || t == "false" || t == "dk" || t == "don't know" || t == "dont know") return 0;
  if (const auto v = parse_number(t); v && (*v == 0.0 || *v == 1.0)) return static_cast<int>(*v);
  return std::nullopt;
}

// Returns the canonical text, nullopt for missing, or sets `bad` when the token
// cannot be mapped.
std::optional<std::string> harmonize_cell(Column kind, const std::string& raw, bool& bad) {
  const std::string t = lower(trim(raw));
  if (kind == Column::kLabel) {
    const std::string kept = trim(raw);
    if (kept.empty()) return std::nullopt;
    return kept;
  }
  if (is_missing_token(t)) return std::nullopt;
  std::optional<double> value;
  switch (kind) {
    case Column::kBinary:
    case Column::kOutcome:
      if (const auto v = yes_no(t)) value = *v;
      break;
    case Column::kGender:
      if (t == "male" || t == "m" || t == "boy") value = 1;
      else if (t == "female" || t == "f" || t == "girl") value = 0;
      else if (const auto v = parse_number(t); v && (*v == 0.0 || *v == 1.0)) value = *v;
      break;
    case Column::kUrban:
      if (t == "urban") value = 1;
      else if (t == "rural") value = 0;
      else if (const auto v = yes_no(t)) value = *v;
      break;
    case Column::kEducation:
      if (t == "none" || t == "no education" || t == "pre-primary" || t == "preprimary") value = 0;
      else if (t == "primary") value = 1;
      else if (t == "secondary" || t == "lower secondary" || t == "upper secondary") value = 2;
      else if (t == "higher" || t == "tertiary" || t == "higher education") value = 3;
      else if (const auto v = parse_number(t); v && *v >= 0.0 && std::floor(*v) == *v) value = *v;
      break;
    case Column::kOrdinal:
      if (const auto v = parse_number(t); v && *v >= 0.0 && std::floor(*v) == *v) value = *v;
      break;
    case Column::kContinuous:
      value = parse_number(t);
      break;
    case Column::kLabel:
      break;
  }
  if (!value) {
    bad = true;
    return std::nullopt;
  }
  return format_double(*value);
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size();
  return m % 2 == 1 ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
}

Dataset assemble(const NumericTable& table, Matrix filled) {
  Dataset out;
  out.feature_names = table.feature_names;
  out.features = std::move(filled);
  out.outcome = table.outcome;
  out.country = table.country;
  out.region = table.region;
  out.row_id = table.row_id;
  out.wealth_quintile = wealth_quintiles(out.features, out.country, schema::kWealthIndex);
  out.validate();
  return out;
}

struct ColumnMedians {
  std::vector<double> median;
  std::vector<std::vector<bool>> missing;
};

ColumnMedians observed_medians(const NumericTable& table) {
  ColumnMedians out;
  const Eigen::Index n = table.features.rows();
  if (n == 0) throw DataError("no rows to impute");
  for (Eigen::Index j = 0; j < table.features.cols(); ++j) {
    std::vector<double> observed;
    std::vector<bool> miss(static_cast<std::size_t>(n), false);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double v = table.features(i, j);
      if (std::isnan(v)) {
        miss[static_cast<std::size_t>(i)] = true;
      } else {
        observed.push_back(v);
      }
    }
    const std::string& name = table.feature_names[static_cast<std::size_t>(j)];
    if (observed.empty()) throw DataError("feature has no observed values: " + name);
    const double missing_fraction = 1.0 - static_cast<double>(observed.size()) / static_cast<double>(n);
    if (missing_fraction >= kMaxMissingFraction) {
      throw DataError("feature missing in at least 50% of rows: " + name);
    }
    out.median.push_back(median_of(std::move(observed)));
    out.missing.push_back(std::move(miss));
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  if (v == 0.0) return "0";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::size_t RawTable::column(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw SchemaError("missing required column: " + name);
  return static_cast<std::size_t>(it - columns.begin());
}

std::vector<std::string> required_columns() {
  std::vector<std::string> cols;
  for (const auto& f : schema::kFeatures) cols.emplace_back(f.name);
  cols.emplace_back(schema::kOutcome);
  cols.emplace_back(schema::kCountry);
  cols.emplace_back(schema::kRegion);
  return cols;
}

RawTable parse_csv(const std::string& text) {
  const auto rows = split_csv(text);
  if (rows.empty()) throw SchemaError("CSV has no header row");
  const auto& header = rows.front();
  std::map<std::string, std::size_t> position;
  for (std::size_t k = 0; k < header.size(); ++k) position[trim(header[k])] = k;

  RawTable table;
  table.columns = required_columns();
  std::vector<std::size_t> source;
  for (const auto& name : table.columns) {
    const auto it = position.find(name);
    if (it == position.end()) throw SchemaError("missing required column: " + name);
    source.push_back(it->second);
  }
  for (const auto& [name, k] : position) {
    if (std::find(table.columns.begin(), table.columns.end(), name) == table.columns.end() &&
        name != schema::kQuintile && name != schema::kRowId) {
      table.warnings.push_back("ignoring unknown column: " + name);
    }
  }
  table.cells.assign(table.columns.size(), {});
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    for (std::size_t c = 0; c < source.size(); ++c) {
      const std::size_t k = source[c];
      if (k < row.size() && !row[k].empty()) {
        table.cells[c].emplace_back(row[k]);
      } else {
        table.cells[c].emplace_back(std::nullopt);
      }
    }
  }
  return table;
}

RawTable load_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  RawTable table = parse_csv(buf.str());
  for (const auto& w : table.warnings) std::cerr << "warning: " << w << "\n";
  return table;
}

RawTable harmonize(const RawTable& raw) {
  RawTable out = raw;
  for (std::size_t c = 0; c < raw.columns.size(); ++c) {
    const Column kind = column_kind(raw.columns[c]);
    for (std::size_t r = 0; r < raw.rows(); ++r) {
      const Cell& cell = raw.cells[c][r];
      if (!cell) continue;
      bool bad = false;
      out.cells[c][r] = harmonize_cell(kind, *cell, bad);
      if (bad) {
        if (!out.flagged_rows.contains(r)) {
          out.warnings.push_back("row " + std::to_string(r) + ": unmappable value '" + *cell + "' in " +
                                 raw.columns[c]);
        }
        out.flagged_rows.insert(r);
      }
    }
  }
  return out;
}

NumericTable to_numeric(const RawTable& table) {
  NumericTable out;
  for (const auto& f : schema::kFeatures) out.feature_names.emplace_back(f.name);
  const std::size_t n = table.rows();
  const std::size_t outcome_col = table.column(std::string(schema::kOutcome));
  const std::size_t country_col = table.column(std::string(schema::kCountry));
  const std::size_t region_col = table.column(std::string(schema::kRegion));
  std::vector<std::size_t> feature_cols;
  for (const auto& name : out.feature_names) feature_cols.push_back(table.column(name));

  std::vector<std::size_t> keep;
  for (std::size_t r = 0; r < n; ++r) {
    const Cell& y = table.cells[outcome_col][r];
    const Cell& c = table.cells[country_col][r];
    const Cell& g = table.cells[region_col][r];
    if (!y || !c || !g || c->empty() || g->empty()) {
      out.warnings.push_back("row " + std::to_string(r) + " dropped: missing outcome, country or region");
      continue;
    }
    const auto yv = parse_number(*y);
    if (!yv || (*yv != 0.0 && *yv != 1.0)) {
      out.warnings.push_back("row " + std::to_string(r) + " dropped: outcome is not 0/1");
      continue;
    }
    keep.push_back(r);
  }
  const auto m = static_cast<Eigen::Index>(keep.size());
  out.features.resize(m, static_cast<Eigen::Index>(feature_cols.size()));
  out.outcome.resize(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const std::size_t r = keep[static_cast<std::size_t>(k)];
    for (std::size_t j = 0; j < feature_cols.size(); ++j) {
      const Cell& cell = table.cells[feature_cols[j]][r];
      const auto v = cell ? parse_number(*cell) : std::nullopt;
      out.features(k, static_cast<Eigen::Index>(j)) = v ? *v : kNaN;
    }
    out.outcome[k] = *parse_number(*table.cells[outcome_col][r]);
    out.country.push_back(*table.cells[country_col][r]);
    out.region.push_back(*table.cells[region_col][r]);
    out.row_id.push_back(static_cast<std::int64_t>(r));
  }
  return out;
}

Dataset impute_median(const NumericTable& table) {
  const ColumnMedians med = observed_medians(table);
  Matrix filled = table.features;
  for (Eigen::Index j = 0; j < filled.cols(); ++j) {
    const auto& miss = med.missing[static_cast<std::size_t>(j)];
    for (Eigen::Index i = 0; i < filled.rows(); ++i) {
      if (miss[static_cast<std::size_t>(i)]) filled(i, j) = med.median[static_cast<std::size_t>(j)];
    }
  }
  return assemble(table, std::move(filled));
}

Dataset impute_chained(const NumericTable& table, int iterations, ImputeProtocol protocol, ImputeReport* report) {
  constexpr double kRidge = 1.0;
  const ColumnMedians med = observed_medians(table);
  const Eigen::Index n = table.features.rows();
  const Eigen::Index d = table.features.cols();
  Matrix filled = table.features;
  std::vector<double> lo(static_cast<std::size_t>(d)), hi(static_cast<std::size_t>(d));
  for (Eigen::Index j = 0; j < d; ++j) {
    const auto& miss = med.missing[static_cast<std::size_t>(j)];
    lo[j] = std::numeric_limits<double>::infinity();
    hi[j] = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (miss[static_cast<std::size_t>(i)]) {
        filled(i, j) = med.median[static_cast<std::size_t>(j)];
      } else {
        lo[j] = std::min(lo[j], filled(i, j));
        hi[j] = std::max(hi[j], filled(i, j));
      }
    }
  }
  const bool use_outcome = protocol == ImputeProtocol::kCongenial;
  std::vector<bool> fallback_reported(static_cast<std::size_t>(d), false);

  for (int it = 0; it < iterations; ++it) {
    for (Eigen::Index j = 0; j < d; ++j) {
      const auto& miss = med.missing[static_cast<std::size_t>(j)];
      std::vector<Eigen::Index> obs_rows, miss_rows;
      for (Eigen::Index i = 0; i < n; ++i) (miss[static_cast<std::size_t>(i)] ? miss_rows : obs_rows).push_back(i);
      if (miss_rows.empty()) continue;

      // Predictor columns: other features, plus the outcome when congenial.
      std::vector<Eigen::Index> cols;
      for (Eigen::Index k = 0; k < d; ++k) {
        if (k != j) cols.push_back(k);
      }
      const auto p_all = static_cast<Eigen::Index>(cols.size() + (use_outcome ? 1 : 0));
      auto predictor = [&](Eigen::Index row, Eigen::Index c) {
        return c < static_cast<Eigen::Index>(cols.size()) ? filled(row, cols[static_cast<std::size_t>(c)])
                                                          : table.outcome[row];
      };
      const auto n_obs = static_cast<Eigen::Index>(obs_rows.size());
      Matrix a(n_obs, p_all);
      Vector y(n_obs);
      for (Eigen::Index r = 0; r < n_obs; ++r) {
        for (Eigen::Index c = 0; c < p_all; ++c) a(r, c) = predictor(obs_rows[r], c);
        y[r] = filled(obs_rows[r], j);
      }
      // Standardize predictors over observed rows; drop constant ones.
      const RowVector mu = a.colwise().mean();
      std::vector<Eigen::Index> active;
      std::vector<double> scale;
      for (Eigen::Index c = 0; c < p_all; ++c) {
        const double sd = std::sqrt((a.col(c).array() - mu[c]).square().mean());
        if (sd > kMinStd) {
          active.push_back(c);
          scale.push_back(sd);
        }
      }
      const double y_mean = y.mean();
      if (active.empty()) {
        if (!fallback_reported[static_cast<std::size_t>(j)] && report) {
          report->warnings.push_back("degenerate design for " + table.feature_names[static_cast<std::size_t>(j)] +
                                     "; using median fill");
        }
        fallback_reported[static_cast<std::size_t>(j)] = true;
        continue;
      }
      const auto p = static_cast<Eigen::Index>(active.size());
      Matrix x(n_obs, p);
      for (Eigen::Index c = 0; c < p; ++c) {
        x.col(c) = (a.col(active[c]).array() - mu[active[c]]) / scale[c];
      }
      Matrix gram = x.transpose() * x;
      gram.diagonal().array() += kRidge;
      const Vector beta = gram.ldlt().solve(x.transpose() * (y.array() - y_mean).matrix());
      for (Eigen::Index r : miss_rows) {
        double pred = y_mean;
        for (Eigen::Index c = 0; c < p; ++c) {
          pred += beta[c] * (predictor(r, active[c]) - mu[active[c]]) / scale[c];
        }
        filled(r, j) = std::clamp(pred, lo[j], hi[j]);
      }
    }
  }
  return assemble(table, std::move(filled));
}

AuditResult audit_countries(const Dataset& data, std::size_t min_rows, double min_prevalence, double max_prevalence) {
  AuditResult result;
  std::vector<std::size_t> keep;
  for (const auto& code : data.countries()) {
    const auto idx = data.rows_of_country(code);
    CountryAudit a;
    a.country = code;
    a.rows = idx.size();
    double pos = 0.0;
    for (std::size_t i : idx) pos += data.outcome[static_cast<Eigen::Index>(i)];
    a.prevalence = idx.empty() ? 0.0 : pos / static_cast<double>(idx.size());
    if (a.rows < min_rows) {
      a.accepted = false;
      a.reason = "fewer than " + std::to_string(min_rows) + " rows";
    } else if (a.prevalence < min_prevalence || a.prevalence > max_prevalence) {
      a.accepted = false;
      a.reason = "implausible on-track prevalence";
    }
    if (a.accepted) keep.insert(keep.end(), idx.begin(), idx.end());
    result.countries.push_back(std::move(a));
  }
  std::sort(keep.begin(), keep.end());
  result.accepted = data.subset(keep);
  return result;
}

std::string dataset_to_csv(const Dataset& data) {
  std::string out;
  for (const auto& name : data.feature_names) out += name + ",";
  out += std::string(schema::kOutcome) + "," + std::string(schema::kCountry) + "," + std::string(schema::kRegion) +
         "," + std::string(schema::kQuintile) + "," + std::string(schema::kRowId) + "\n";
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    for (Eigen::Index j = 0; j < data.features.cols(); ++j) out += format_double(data.features(r, j)) + ",";
    out += format_double(data.outcome[r]) + "," + data.country[i] + "," + data.region[i] + "," +
           std::to_string(data.wealth_quintile[i]) + "," + std::to_string(data.row_id[i]) + "\n";
  }
  return out;
}

Dataset dataset_from_csv(const std::string& text) {
  const auto rows = split_csv(text);
  if (rows.empty()) throw SchemaError("CSV has no header row");
  std::map<std::string, std::size_t> position;
  for (std::size_t k = 0; k < rows[0].size(); ++k) position[trim(rows[0][k])] = k;
  auto col = [&](std::string_view name) -> std::size_t {
    const auto it = position.find(std::string(name));
    if (it == position.end()) throw SchemaError("missing required column: " + std::string(name));
    return it->second;
  };
  Dataset data;
  for (const auto& f : schema::kFeatures) data.feature_names.emplace_back(f.name);
  std::vector<std::size_t> fcols;
  for (const auto& name : data.feature_names) fcols.push_back(col(name));
  const std::size_t ycol = col(schema::kOutcome);
  const std::size_t ccol = col(schema::kCountry);
  const std::size_t rcol = col(schema::kRegion);
  const auto qit = position.find(std::string(schema::kQuintile));
  const auto iit = position.find(std::string(schema::kRowId));

  const auto n = static_cast<Eigen::Index>(rows.size() - 1);
  data.features.resize(n, static_cast<Eigen::Index>(fcols.size()));
  data.outcome.resize(n);
  auto number = [&](std::size_t r, std::size_t k, const char* what) {
    const auto& row = rows[r];
    if (k >= row.size() || trim(row[k]).empty()) {
      throw DataError("missing value in " + std::string(what) + " at data row " + std::to_string(r) +
                      "; run ingest to impute");
    }
    const auto v = parse_number(trim(row[k]));
    if (!v) throw DataError("non-numeric value '" + row[k] + "' in " + what + " at data row " + std::to_string(r));
    return *v;
  };
  std::vector<int> quintiles;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto i = static_cast<Eigen::Index>(r - 1);
    for (std::size_t j = 0; j < fcols.size(); ++j) {
      data.features(i, static_cast<Eigen::Index>(j)) = number(r, fcols[j], data.feature_names[j].c_str());
    }
    data.outcome[i] = number(r, ycol, "ecdi_on_track");
    const auto& row = rows[r];
    data.country.push_back(ccol < row.size() ? trim(row[ccol]) : std::string());
    data.region.push_back(rcol < row.size() ? trim(row[rcol]) : std::string());
    if (qit != position.end()) quintiles.push_back(static_cast<int>(number(r, qit->second, "wealth_quintile")));
    data.row_id.push_back(iit != position.end() ? static_cast<std::int64_t>(number(r, iit->second, "row_id"))
                                                : static_cast<std::int64_t>(r - 1));
  }
  data.wealth_quintile = qit != position.end()
                             ? std::move(quintiles)
                             : wealth_quintiles(data.features, data.country, schema::kWealthIndex);
  data.validate();
  return data;
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return dataset_from_csv(buf.str());
}

}  // namespace devenc
