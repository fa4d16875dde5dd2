// Copyright 2026 The pairshap Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "pairshap/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "json.hpp"
#include "pairshap/error.hpp"
#include "pairshap/random.hpp"

namespace pairshap {

const char* ToString(FeatureKind kind) {
  return kind == FeatureKind::kBinary ? "binary" : "continuous";
}

FeatureKind ParseFeatureKind(const std::string& text) {
  if (text == "binary") return FeatureKind::kBinary;
  if (text == "continuous") return FeatureKind::kContinuous;
  ThrowConfig("unknown feature kind '" + text +
              "' (expected continuous or binary)");
}

Dataset::Dataset(std::vector<std::string> names,
                 std::vector<FeatureKind> kinds, Matrix rows,
                 std::optional<std::vector<double>> target)
    : names_(std::move(names)),
      kinds_(std::move(kinds)),
      rows_(std::move(rows)),
      target_(std::move(target)) {
  if (kinds_.size() != names_.size()) {
    ThrowData("dataset has " + std::to_string(names_.size()) +
              " names but " + std::to_string(kinds_.size()) + " kinds");
  }
  if (rows_.rows() > 0 && rows_.cols() != names_.size()) {
    ThrowData("dataset rows have " + std::to_string(rows_.cols()) +
              " values, expected " + std::to_string(names_.size()));
  }
  if (rows_.rows() == 0) rows_ = Matrix(0, names_.size());
  std::set<std::string> seen;
  for (const auto& name : names_) {
    if (!seen.insert(name).second) ThrowData("duplicate feature name '" + name + "'");
  }
  for (std::size_t r = 0; r < rows_.rows(); ++r) {
    for (std::size_t c = 0; c < rows_.cols(); ++c) {
      const double v = rows_(r, c);
      if (!std::isfinite(v)) {
        ThrowData("non-finite value at row " + std::to_string(r) +
                  ", column '" + names_[c] + "'");
      }
      if (kinds_[c] == FeatureKind::kBinary && v != 0.0 && v != 1.0) {
        ThrowData("binary feature '" + names_[c] + "' has value " +
                  std::to_string(v) + " at row " + std::to_string(r));
      }
    }
  }
  if (target_) {
    if (target_->size() != rows_.rows()) {
      ThrowData("target has " + std::to_string(target_->size()) +
                " values for " + std::to_string(rows_.rows()) + " rows");
    }
    for (std::size_t r = 0; r < target_->size(); ++r) {
      if (!std::isfinite((*target_)[r])) {
        ThrowData("non-finite target at row " + std::to_string(r));
      }
    }
  }
}

std::optional<std::size_t> Dataset::FindFeature(const std::string& name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names_.begin());
}

std::size_t Dataset::FeatureIndex(const std::string& name) const {
  if (auto idx = FindFeature(name)) return *idx;
  ThrowData("unknown feature '" + name + "'");
}

Dataset Dataset::Subset(std::span<const std::size_t> row_indices) const {
  Matrix rows(row_indices.size(), n_features());
  std::optional<std::vector<double>> target;
  if (target_) target.emplace();
  for (std::size_t i = 0; i < row_indices.size(); ++i) {
    const std::size_t src = row_indices[i];
    if (src >= n_rows()) ThrowData("row index " + std::to_string(src) + " out of range");
    std::copy_n(row(src).begin(), n_features(), rows.row(i).begin());
    if (target) target->push_back((*target_)[src]);
  }
  return Dataset(names_, kinds_, std::move(rows), std::move(target));
}

Dataset Dataset::WithoutTarget() const {
  return Dataset(names_, kinds_, rows_, std::nullopt);
}

// CSV ----------------------------------------------------------------------

namespace {

struct CsvRecord {
  std::vector<std::string> fields;
  std::size_t line = 0;  // 1-based line where the record starts
};

std::vector<CsvRecord> SplitCsv(const std::string& text,
                                const std::string& source) {
  std::vector<CsvRecord> records;
  CsvRecord current;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t line = 1;
  current.line = 1;

  auto end_field = [&] {
    current.fields.push_back(field);
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    // Blank lines are skipped rather than treated as one empty cell.
    if (!(current.fields.size() == 1 && current.fields[0].empty())) {
      records.push_back(std::move(current));
    }
    current = CsvRecord{};
    current.line = line;
  };

  std::size_t i = 0;
  // UTF-8 byte order mark.
  if (text.size() >= 3 && text.compare(0, 3, "\xEF\xBB\xBF") == 0) i = 3;
  for (; i < text.size(); ++i) {
    const char ch = text[i];
    if (in_quotes) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (ch == '\n') ++line;
        field.push_back(ch);
      }
      continue;
    }
    if (ch == '"' && !field_started) {
      in_quotes = true;
      field_started = true;
    } else if (ch == ',') {
      end_field();
    } else if (ch == '\r') {
      // CRLF: the '\n' ends the record.
    } else if (ch == '\n') {
      ++line;
      end_record();
    } else {
      field.push_back(ch);
      field_started = true;
    }
  }
  if (in_quotes) {
    ThrowData(source + ": unterminated quoted field starting near line " +
              std::to_string(current.line));
  }
  if (field_started || !field.empty() || !current.fields.empty()) end_record();
  return records;
}

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

bool ParseDouble(const std::string& cell, double& out) {
  const std::string t = Trim(cell);
  if (t.empty()) return false;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

}  // namespace

Dataset ParseCsv(const std::string& text, const CsvOptions& options,
                 const std::string& source_name) {
  const auto records = SplitCsv(text, source_name);
  if (records.empty()) ThrowData(source_name + ": missing header row");

  std::vector<std::string> header;
  for (const auto& f : records[0].fields) header.push_back(Trim(f));
  {
    std::set<std::string> seen;
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (header[c].empty()) {
        ThrowData(source_name + ": empty column name at column " +
                  std::to_string(c + 1));
      }
      if (!seen.insert(header[c]).second) {
        ThrowData(source_name + ": duplicate column name '" + header[c] + "'");
      }
    }
  }

  std::optional<std::size_t> target_col;
  if (options.target_column) {
    const auto it = std::find(header.begin(), header.end(), *options.target_column);
    if (it == header.end()) {
      ThrowData(source_name + ": unknown target column '" +
                *options.target_column + "'");
    }
    target_col = static_cast<std::size_t>(it - header.begin());
  }

  std::vector<std::string> names;
  std::vector<std::size_t> feature_cols;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (target_col && c == *target_col) continue;
    names.push_back(header[c]);
    feature_cols.push_back(c);
  }
  for (const auto& [name, kind] : options.kind_overrides) {
    (void)kind;
    if (std::find(names.begin(), names.end(), name) == names.end()) {
      ThrowData(source_name + ": kind override for unknown feature '" + name + "'");
    }
  }

  Matrix rows(records.size() - 1, names.size());
  std::optional<std::vector<double>> target;
  if (target_col) target.emplace(records.size() - 1);

  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.fields.size() != header.size()) {
      ThrowData(source_name + ": line " + std::to_string(rec.line) + " has " +
                std::to_string(rec.fields.size()) + " fields, header has " +
                std::to_string(header.size()));
    }
    for (std::size_t c = 0; c < header.size(); ++c) {
      double v = 0.0;
      if (!ParseDouble(rec.fields[c], v)) {
        const std::string what = Trim(rec.fields[c]).empty()
                                     ? "missing value"
                                     : "non-numeric cell '" + rec.fields[c] + "'";
        ThrowData(source_name + ": " + what + " at line " +
                  std::to_string(rec.line) + " (data row " +
                  std::to_string(r) + "), column '" + header[c] + "'");
      }
      if (target_col && c == *target_col) {
        (*target)[r - 1] = v;
      }
    }
    for (std::size_t f = 0; f < feature_cols.size(); ++f) {
      double v = 0.0;
      ParseDouble(rec.fields[feature_cols[f]], v);
      rows(r - 1, f) = v;
    }
  }

  std::vector<FeatureKind> kinds(names.size(), FeatureKind::kContinuous);
  for (std::size_t f = 0; f < names.size(); ++f) {
    if (auto it = options.kind_overrides.find(names[f]);
        it != options.kind_overrides.end()) {
      kinds[f] = it->second;
      continue;
    }
    bool binary = rows.rows() > 0;
    for (std::size_t r = 0; r < rows.rows() && binary; ++r) {
      binary = rows(r, f) == 0.0 || rows(r, f) == 1.0;
    }
    if (binary) kinds[f] = FeatureKind::kBinary;
  }
  return Dataset(std::move(names), std::move(kinds), std::move(rows),
                 std::move(target));
}

Dataset LoadCsv(const std::string& path, const CsvOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) ThrowData("cannot open dataset '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return ParseCsv(buffer.str(), options, path);
}

namespace {

std::string QuoteName(const std::string& name) {
  if (name.find_first_of(",\"\n\r") == std::string::npos) return name;
  std::string out = "\"";
  for (char ch : name) {
    if (ch == '"') out += "\"\"";
    else out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

void AppendNumber(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

}  // namespace

std::string FormatCsv(const Dataset& data, const std::string& target_name) {
  std::string out;
  for (std::size_t c = 0; c < data.n_features(); ++c) {
    if (c) out.push_back(',');
    out += QuoteName(data.names()[c]);
  }
  if (data.target()) {
    out.push_back(',');
    out += QuoteName(target_name);
  }
  out.push_back('\n');
  for (std::size_t r = 0; r < data.n_rows(); ++r) {
    const auto row = data.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out.push_back(',');
      AppendNumber(out, row[c]);
    }
    if (data.target()) {
      out.push_back(',');
      AppendNumber(out, (*data.target())[r]);
    }
    out.push_back('\n');
  }
  return out;
}

void WriteCsv(const Dataset& data, const std::string& path,
              const std::string& target_name) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) ThrowRuntime("cannot write '" + path + "'");
  out << FormatCsv(data, target_name);
  if (!out) ThrowRuntime("write failed for '" + path + "'");
}

// Statistics ---------------------------------------------------------------

FeatureStats ComputeStats(const Dataset& data) {
  if (data.n_rows() == 0) ThrowData("cannot compute statistics of an empty dataset");
  const std::size_t n = data.n_rows();
  FeatureStats stats;
  stats.names = data.names();
  for (std::size_t c = 0; c < data.n_features(); ++c) {
    std::vector<double> col = data.rows().Column(c);
    double sum = 0.0;
    for (double v : col) sum += v;
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (double v : col) ss += (v - mean) * (v - mean);
    std::sort(col.begin(), col.end());
    const double median = (n % 2 == 1)
                              ? col[n / 2]
                              : 0.5 * (col[n / 2 - 1] + col[n / 2]);
    stats.min.push_back(col.front());
    stats.max.push_back(col.back());
    stats.mean.push_back(mean);
    stats.median.push_back(median);
    stats.std.push_back(std::sqrt(ss / static_cast<double>(n)));
  }
  return stats;
}

void StandardizeInPlace(std::span<double> values,
                        std::span<const FeatureKind> kinds,
                        const FeatureStats& stats) {
  for (std::size_t c = 0; c < values.size(); ++c) {
    if (kinds[c] == FeatureKind::kBinary) continue;
    values[c] = stats.std[c] > 0.0 ? (values[c] - stats.mean[c]) / stats.std[c]
                                   : 0.0;
  }
}

Dataset Standardize(const Dataset& data, const FeatureStats& stats) {
  if (stats.names != data.names()) {
    ThrowData("feature statistics were computed for different feature names");
  }
  Matrix rows = data.rows();
  for (std::size_t r = 0; r < rows.rows(); ++r) {
    StandardizeInPlace(rows.row(r), data.kinds(), stats);
  }
  return Dataset(data.names(), data.kinds(), std::move(rows), data.target());
}

// Synthetic data -----------------------------------------------------------

SyntheticSpec SyntheticSpec::Uniform(std::size_t n_features) {
  SyntheticSpec spec;
  for (std::size_t i = 0; i < n_features; ++i) {
    SyntheticFeature f;
    f.name = "x" + std::to_string(i);
    spec.features.push_back(f);
  }
  spec.weights.assign(n_features, 1.0);
  return spec;
}

namespace {

using nlohmann::json;

double NumberOr(const json& obj, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_number()) {
    ThrowConfig(std::string("synthetic spec: '") + key + "' must be a number");
  }
  return obj.at(key).get<double>();
}

void ValidateSpec(const SyntheticSpec& spec) {
  if (spec.features.size() < 2) {
    ThrowConfig("synthetic spec needs at least 2 features");
  }
  if (spec.weights.size() != spec.features.size()) {
    ThrowConfig("synthetic spec: " + std::to_string(spec.weights.size()) +
                " target weights for " + std::to_string(spec.features.size()) +
                " features");
  }
  if (!(spec.noise_std >= 0.0) || !std::isfinite(spec.noise_std)) {
    ThrowConfig("synthetic spec: noise_std must be finite and >= 0");
  }
  std::set<std::string> seen;
  for (const auto& f : spec.features) {
    if (f.name.empty()) ThrowConfig("synthetic spec: feature with empty name");
    if (f.source) {
      if (!seen.count(*f.source)) {
        ThrowConfig("synthetic spec: feature '" + f.name +
                    "' depends on '" + *f.source +
                    "', which must be declared earlier");
      }
      if (f.kind == FeatureKind::kContinuous && !(f.jitter >= 0.0)) {
        ThrowConfig("synthetic spec: jitter of '" + f.name + "' must be >= 0");
      }
      if (f.kind == FeatureKind::kBinary && !(f.p_flip >= 0.0 && f.p_flip <= 1.0)) {
        ThrowConfig("synthetic spec: p_flip of '" + f.name + "' must be in [0,1]");
      }
    } else if (f.kind == FeatureKind::kContinuous) {
      if (!(f.high > f.low) || !std::isfinite(f.low) || !std::isfinite(f.high)) {
        ThrowConfig("synthetic spec: feature '" + f.name +
                    "' needs a finite range with high > low");
      }
    } else if (!(f.p >= 0.0 && f.p <= 1.0)) {
      ThrowConfig("synthetic spec: probability of '" + f.name + "' must be in [0,1]");
    }
    if (!seen.insert(f.name).second) {
      ThrowConfig("synthetic spec: duplicate feature '" + f.name + "'");
    }
  }
}

}  // namespace

SyntheticSpec ParseSyntheticSpec(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    ThrowConfig(std::string("synthetic spec is not valid JSON: ") + e.what());
  }
  SyntheticSpec spec;
  try {
    for (const auto& jf : doc.at("features")) {
      SyntheticFeature f;
      f.name = jf.at("name").get<std::string>();
      f.kind = ParseFeatureKind(jf.value("kind", std::string("continuous")));
      const json params = jf.value("params", json::object());
      if (params.contains("source")) f.source = params.at("source").get<std::string>();
      f.low = NumberOr(params, "low", 0.0);
      f.high = NumberOr(params, "high", 1.0);
      f.p = NumberOr(params, "p", 0.5);
      f.scale = NumberOr(params, "scale", 1.0);
      f.offset = NumberOr(params, "offset", 0.0);
      f.jitter = NumberOr(params, "jitter", 0.0);
      f.threshold = NumberOr(params, "threshold", 0.5);
      f.p_flip = NumberOr(params, "p_flip", 0.0);
      spec.features.push_back(std::move(f));
    }
    const json target = doc.value("target", json::object());
    if (target.contains("weights")) {
      spec.weights = target.at("weights").get<std::vector<double>>();
    } else {
      spec.weights.assign(spec.features.size(), 1.0);
    }
    spec.intercept = NumberOr(target, "intercept", 0.0);
    spec.noise_std = NumberOr(target, "noise_std", 0.0);
  } catch (const json::exception& e) {
    ThrowConfig(std::string("synthetic spec: ") + e.what());
  }
  ValidateSpec(spec);
  return spec;
}

std::string SyntheticSpecToJson(const SyntheticSpec& spec) {
  nlohmann::ordered_json doc;
  doc["features"] = nlohmann::ordered_json::array();
  for (const auto& f : spec.features) {
    nlohmann::ordered_json jf;
    jf["name"] = f.name;
    jf["kind"] = ToString(f.kind);
    nlohmann::ordered_json params;
    if (f.source) {
      params["source"] = *f.source;
      if (f.kind == FeatureKind::kContinuous) {
        params["scale"] = f.scale;
        params["offset"] = f.offset;
        params["jitter"] = f.jitter;
      } else {
        params["threshold"] = f.threshold;
        params["p_flip"] = f.p_flip;
      }
    } else if (f.kind == FeatureKind::kContinuous) {
      params["low"] = f.low;
      params["high"] = f.high;
    } else {
      params["p"] = f.p;
    }
    jf["params"] = params;
    doc["features"].push_back(jf);
  }
  doc["target"] = {{"weights", spec.weights},
                   {"intercept", spec.intercept},
                   {"noise_std", spec.noise_std}};
  return doc.dump(2);
}

Dataset GenerateSynthetic(std::size_t n_rows, const SyntheticSpec& spec,
                          std::uint64_t seed) {
  ValidateSpec(spec);
  const std::size_t n = spec.features.size();
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < n; ++i) index[spec.features[i].name] = i;

  Rng rng(seed);
  Matrix rows(n_rows, n);
  std::vector<double> target(n_rows);
  for (std::size_t r = 0; r < n_rows; ++r) {
    auto row = rows.row(r);
    for (std::size_t c = 0; c < n; ++c) {
      const auto& f = spec.features[c];
      if (f.kind == FeatureKind::kContinuous) {
        if (f.source) {
          const double jitter = rng.Uniform(-f.jitter, f.jitter);
          row[c] = f.scale * row[index.at(*f.source)] + f.offset + jitter;
        } else {
          row[c] = rng.Uniform(f.low, f.high);
        }
      } else if (f.source) {
        const bool bit = row[index.at(*f.source)] > f.threshold;
        row[c] = (bit != rng.Bernoulli(f.p_flip)) ? 1.0 : 0.0;
      } else {
        row[c] = rng.Bernoulli(f.p) ? 1.0 : 0.0;
      }
    }
    double y = spec.intercept;
    for (std::size_t c = 0; c < n; ++c) y += spec.weights[c] * row[c];
    if (spec.noise_std > 0.0) y += spec.noise_std * rng.Normal();
    target[r] = y;
  }

  std::vector<std::string> names;
  std::vector<FeatureKind> kinds;
  for (const auto& f : spec.features) {
    names.push_back(f.name);
    kinds.push_back(f.kind);
  }
  return Dataset(std::move(names), std::move(kinds), std::move(rows),
                 std::move(target));
}

}  // namespace pairshap
