// Copyright 2026 The WMVoc Authors.
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

#include "vocab_io.h"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "recognition.h"
#include "status.h"

namespace wmvoc {

namespace {

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  Require(in.good(), ErrorCode::kIo, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ofstream OpenForWrite(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  Require(out.good(), ErrorCode::kIo, "cannot write '" + path + "'");
  return out;
}

std::string Where(const std::string& path, std::size_t line) {
  return path + ":" + std::to_string(line) + ": ";
}

bool IsSpace(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }

std::vector<std::string_view> SplitWhitespace(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && IsSpace(line[i])) ++i;
    std::size_t j = i;
    while (j < line.size() && !IsSpace(line[j])) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

bool ParseDouble(std::string_view s, double* out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), *out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

template <typename Int>
bool ParseInt(std::string_view s, Int* out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), *out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

uint32_t LoadU32(const unsigned char* p) {
  return static_cast<uint32_t>(p[0]) | static_cast<uint32_t>(p[1]) << 8 |
         static_cast<uint32_t>(p[2]) << 16 | static_cast<uint32_t>(p[3]) << 24;
}

void StoreU32(uint32_t v, char* p) {
  for (int b = 0; b < 4; ++b) p[b] = static_cast<char>((v >> (8 * b)) & 0xff);
}

float LoadF32(const unsigned char* p) { return std::bit_cast<float>(LoadU32(p)); }

// Accumulates rows, resolving duplicate labels (first position, last value).
class RowCollector {
 public:
  explicit RowCollector(int dim) : dim_(dim) {}

  void Add(std::string_view label, const std::vector<double>& values, LoadStats* stats) {
    auto [it, inserted] = index_.emplace(std::string(label), labels_.size());
    if (inserted) {
      labels_.emplace_back(label);
      data_.insert(data_.end(), values.begin(), values.end());
    } else {
      std::copy(values.begin(), values.end(), data_.begin() + it->second * dim_);
      if (stats) ++stats->duplicate_labels;
    }
    if (stats) ++stats->rows_read;
  }

  SemanticVocabulary Build(bool normalize) {
    RowMatrix m(static_cast<Eigen::Index>(labels_.size()), dim_);
    if (!labels_.empty()) std::copy(data_.begin(), data_.end(), m.data());
    return SemanticVocabulary(std::move(labels_), std::move(m), normalize);
  }

 private:
  int dim_;
  std::vector<std::string> labels_;
  std::vector<double> data_;
  std::unordered_map<std::string, std::size_t> index_;
};

void ParseHeader(std::string_view line, const std::string& path, long long* count, int* dim) {
  auto fields = SplitWhitespace(line);
  Require(fields.size() == 2 && ParseInt(fields[0], count) && ParseInt(fields[1], dim) &&
              *count >= 0 && *dim >= 1,
          ErrorCode::kFormat, Where(path, 1) + "malformed header, expected '<count> <dim>'");
}

SemanticVocabulary LoadText(const std::string& path, bool normalize, bool has_header,
                            LoadStats* stats) {
  const std::string text = ReadFile(path);
  std::string_view rest(text);
  std::size_t line_no = 0;
  long long count = -1;
  int dim = -1;
  std::vector<double> values;
  std::optional<RowCollector> rows;
  long long seen = 0;

  while (!rest.empty()) {
    const std::size_t nl = rest.find('\n');
    std::string_view line = rest.substr(0, nl);
    rest = nl == std::string_view::npos ? std::string_view() : rest.substr(nl + 1);
    ++line_no;
    if (has_header && line_no == 1) {
      ParseHeader(line, path, &count, &dim);
      rows.emplace(dim);
      continue;
    }
    auto fields = SplitWhitespace(line);
    if (fields.empty()) continue;
    if (dim < 0) {
      dim = static_cast<int>(fields.size()) - 1;
      Require(dim >= 1, ErrorCode::kFormat, Where(path, line_no) + "row has no values");
      rows.emplace(dim);
    }
    Require(static_cast<int>(fields.size()) == dim + 1, ErrorCode::kFormat,
            Where(path, line_no) + "expected " + std::to_string(dim) + " values, found " +
                std::to_string(fields.size() - 1));
    values.resize(dim);
    for (int j = 0; j < dim; ++j) {
      Require(ParseDouble(fields[j + 1], &values[j]) && std::isfinite(values[j]),
              ErrorCode::kFormat, Where(path, line_no) + "bad or non-finite value");
    }
    rows->Add(fields[0], values, stats);
    ++seen;
  }
  Require(has_header || dim > 0, ErrorCode::kFormat, path + ": empty file without header");
  if (has_header) {
    Require(line_no >= 1, ErrorCode::kFormat, path + ": missing header");
    Require(seen == count, ErrorCode::kFormat,
            path + ": header announces " + std::to_string(count) + " rows, found " +
                std::to_string(seen));
  }
  return rows->Build(normalize);
}

SemanticVocabulary LoadBinary(const std::string& path, bool normalize, LoadStats* stats) {
  const std::string data = ReadFile(path);
  const std::size_t nl = data.find('\n');
  Require(nl != std::string::npos, ErrorCode::kFormat, path + ": missing header line");
  long long count = 0;
  int dim = 0;
  ParseHeader(std::string_view(data).substr(0, nl), path, &count, &dim);
  RowCollector rows(dim);
  std::vector<double> values(dim);
  std::size_t pos = nl + 1;
  const auto* bytes = reinterpret_cast<const unsigned char*>(data.data());
  for (long long e = 0; e < count; ++e) {
    while (pos < data.size() && IsSpace(data[pos])) ++pos;
    const std::size_t start = pos;
    while (pos < data.size() && data[pos] != ' ') ++pos;
    Require(pos < data.size() && pos > start, ErrorCode::kFormat,
            path + ": truncated entry " + std::to_string(e + 1));
    std::string_view label(data.data() + start, pos - start);
    ++pos;
    Require(data.size() - pos >= 4ull * dim, ErrorCode::kFormat,
            path + ": truncated vector for entry " + std::to_string(e + 1));
    for (int j = 0; j < dim; ++j) {
      values[j] = LoadF32(bytes + pos + 4ull * j);
      Require(std::isfinite(values[j]), ErrorCode::kFormat,
              path + ": non-finite value in entry " + std::to_string(e + 1));
    }
    pos += 4ull * dim;
    rows.Add(label, values, stats);
  }
  return rows.Build(normalize);
}

}  // namespace

SemanticVocabulary LoadWordVectors(const std::string& path, VectorFormat format, bool normalize,
                                   bool has_header, LoadStats* stats) {
  if (format == VectorFormat::kBinary) {
    Require(has_header, ErrorCode::kConfig, "binary vector files always carry a header");
    return LoadBinary(path, normalize, stats);
  }
  return LoadText(path, normalize, has_header, stats);
}

void WriteWordVectors(const std::string& path, const std::vector<std::string>& labels,
                      const RowMatrix& vectors, VectorFormat format) {
  Require(static_cast<Eigen::Index>(labels.size()) == vectors.rows(), ErrorCode::kShape,
          "label count does not match vector rows");
  auto out = OpenForWrite(path);
  out << labels.size() << ' ' << vectors.cols() << '\n';
  char buf[32];
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out << labels[i];
    if (format == VectorFormat::kText) {
      for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), vectors(i, j));
        out << ' ' << std::string_view(buf, ptr - buf);
      }
    } else {
      out << ' ';
      for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
        StoreU32(std::bit_cast<uint32_t>(static_cast<float>(vectors(i, j))), buf);
        out.write(buf, 4);
      }
    }
    out << '\n';
  }
  Require(out.good(), ErrorCode::kIo, "failed writing '" + path + "'");
}

FrequencyTable LoadFrequencyTable(const std::string& path) {
  const std::string text = ReadFile(path);
  std::istringstream in(text);
  std::string line;
  FrequencyTable table;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::size_t tab = line.rfind('\t');
    int64_t count = 0;
    Require(tab != std::string::npos && tab > 0 &&
                ParseInt(std::string_view(line).substr(tab + 1), &count) && count >= 0,
            ErrorCode::kFormat, Where(path, line_no) + "expected '<token>\\t<count>'");
    table[line.substr(0, tab)] = count;
  }
  return table;
}

SemanticVocabulary PruneVocabulary(const SemanticVocabulary& vocab, const FrequencyTable& freq,
                                   int64_t min_count, int64_t max_count) {
  std::vector<char> keep(vocab.size(), 0);
  for (int r : vocab.source_ids()) keep[r] = 1;
  for (int r : vocab.target_ids()) keep[r] = 1;
  for (std::size_t r = 0; r < vocab.size(); ++r) {
    if (keep[r]) continue;
    auto it = freq.find(vocab.label(static_cast<int>(r)));
    keep[r] = it != freq.end() && it->second >= min_count && it->second <= max_count;
  }
  std::vector<int> rows;
  for (std::size_t r = 0; r < vocab.size(); ++r) {
    if (keep[r]) rows.push_back(static_cast<int>(r));
  }
  return vocab.Subset(rows);
}

Vector LookupPhrase(const SemanticVocabulary& vocab, const std::string& phrase) {
  if (auto row = vocab.Find(phrase)) return vocab.prototype(*row).transpose();
  std::string underscored = phrase, spaced = phrase;
  std::replace(underscored.begin(), underscored.end(), ' ', '_');
  std::replace(spaced.begin(), spaced.end(), '_', ' ');
  if (auto row = vocab.Find(underscored)) return vocab.prototype(*row).transpose();
  if (auto row = vocab.Find(spaced)) return vocab.prototype(*row).transpose();

  const auto tokens = SplitWhitespace(spaced);
  Require(!tokens.empty(), ErrorCode::kFormat, "empty phrase");
  std::vector<Vector> members;
  for (auto token : tokens) {
    auto row = vocab.Find(token);
    Require(row.has_value(), ErrorCode::kFormat,
            "out-of-vocabulary token '" + std::string(token) + "' in '" + phrase + "'");
    members.emplace_back(vocab.prototype(*row).transpose());
  }
  return RocchioPrototype(members, vocab.normalized());
}

RowMatrix ReadFeatureMatrix(const std::string& path) {
  const std::string data = ReadFile(path);
  if (data.size() >= 4 && data.compare(0, 4, "VIFM") == 0) {
    Require(data.size() >= 12, ErrorCode::kFormat, path + ": truncated feature header");
    const auto* bytes = reinterpret_cast<const unsigned char*>(data.data());
    const uint64_t n = LoadU32(bytes + 4);
    const uint64_t p = LoadU32(bytes + 8);
    Require(data.size() == 12 + 4 * n * p, ErrorCode::kFormat,
            path + ": expected " + std::to_string(n * p) + " float32 values");
    RowMatrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    for (uint64_t i = 0; i < n * p; ++i) {
      const float v = LoadF32(bytes + 12 + 4 * i);
      Require(std::isfinite(v), ErrorCode::kFormat, path + ": non-finite feature value");
      m.data()[i] = v;
    }
    return m;
  }

  std::vector<double> values;
  std::size_t cols = 0, rows = 0, line_no = 0;
  std::string_view rest(data);
  while (!rest.empty()) {
    const std::size_t nl = rest.find('\n');
    std::string_view line = rest.substr(0, nl);
    rest = nl == std::string_view::npos ? std::string_view() : rest.substr(nl + 1);
    ++line_no;
    while (!line.empty() && IsSpace(line.back())) line.remove_suffix(1);
    if (line.empty()) continue;
    std::size_t fields = 0;
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = line.find(',', start);
      std::string_view field = line.substr(start, comma - start);
      while (!field.empty() && IsSpace(field.front())) field.remove_prefix(1);
      while (!field.empty() && IsSpace(field.back())) field.remove_suffix(1);
      double v = 0.0;
      Require(ParseDouble(field, &v) && std::isfinite(v), ErrorCode::kFormat,
              Where(path, line_no) + "bad feature value");
      values.push_back(v);
      ++fields;
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (rows == 0) cols = fields;
    Require(fields == cols, ErrorCode::kFormat,
            Where(path, line_no) + "expected " + std::to_string(cols) + " values");
    ++rows;
  }
  RowMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  if (!values.empty()) std::copy(values.begin(), values.end(), m.data());
  return m;
}

void WriteFeaturesBinary(const std::string& path, const RowMatrix& features) {
  auto out = OpenForWrite(path);
  char buf[4];
  out.write("VIFM", 4);
  StoreU32(static_cast<uint32_t>(features.rows()), buf);
  out.write(buf, 4);
  StoreU32(static_cast<uint32_t>(features.cols()), buf);
  out.write(buf, 4);
  for (Eigen::Index i = 0; i < features.size(); ++i) {
    StoreU32(std::bit_cast<uint32_t>(static_cast<float>(features.data()[i])), buf);
    out.write(buf, 4);
  }
  Require(out.good(), ErrorCode::kIo, "failed writing '" + path + "'");
}

void WriteFeaturesCsv(const std::string& path, const RowMatrix& features) {
  auto out = OpenForWrite(path);
  char buf[32];
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    for (Eigen::Index j = 0; j < features.cols(); ++j) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), features(i, j));
      if (j > 0) out << ',';
      out << std::string_view(buf, ptr - buf);
    }
    out << '\n';
  }
  Require(out.good(), ErrorCode::kIo, "failed writing '" + path + "'");
}

std::vector<std::string> ReadLabelList(const std::string& path) {
  const std::string text = ReadFile(path);
  std::istringstream in(text);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    out.push_back(line);
  }
  return out;
}

void WriteLabelList(const std::string& path, const std::vector<std::string>& labels) {
  auto out = OpenForWrite(path);
  for (const auto& l : labels) out << l << '\n';
  Require(out.good(), ErrorCode::kIo, "failed writing '" + path + "'");
}

FeatureSet LoadFeatureSet(const std::string& features_path, const std::string& labels_path,
                          const SemanticVocabulary& vocab) {
  FeatureSet set;
  set.features = ReadFeatureMatrix(features_path);
  const auto labels = ReadLabelList(labels_path);
  Require(static_cast<Eigen::Index>(labels.size()) == set.features.rows(), ErrorCode::kFormat,
          "feature rows (" + std::to_string(set.features.rows()) + ") and labels (" +
              std::to_string(labels.size()) + ") differ in count");
  set.rows.reserve(labels.size());
  for (const auto& l : labels) set.rows.push_back(vocab.IndexOf(l));
  return set;
}

LabeledFeatures ToLabeledFeatures(const FeatureSet& set, const SemanticVocabulary& vocab) {
  LabeledFeatures out;
  out.features = set.features;
  out.class_count = static_cast<int>(vocab.source_ids().size());
  out.labels.reserve(set.rows.size());
  for (int row : set.rows) {
    const int c = vocab.SourceClassOf(row);
    Require(c >= 0, ErrorCode::kFormat,
            "label '" + vocab.label(row) + "' is not a source class");
    out.labels.push_back(c);
  }
  return out;
}

LabeledFeatures LoadFeatures(const std::string& features_path, const std::string& labels_path,
                             const SemanticVocabulary& vocab) {
  return ToLabeledFeatures(LoadFeatureSet(features_path, labels_path, vocab), vocab);
}

std::unordered_map<int, std::vector<int>> LoadSynsets(const std::string& path,
                                                      const SemanticVocabulary& vocab) {
  const std::string text = ReadFile(path);
  std::istringstream in(text);
  std::string line;
  std::unordered_map<int, std::vector<int>> out;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto fields = SplitWhitespace(line);
    if (fields.empty() || fields[0].front() == '#') continue;
    const auto key = vocab.Find(fields[0]);
    Require(key.has_value(), ErrorCode::kFormat,
            Where(path, line_no) + "unknown label '" + std::string(fields[0]) + "'");
    std::vector<int> members{*key};
    for (std::size_t f = 1; f < fields.size(); ++f) {
      const auto m = vocab.Find(fields[f]);
      Require(m.has_value(), ErrorCode::kFormat,
              Where(path, line_no) + "unknown synonym '" + std::string(fields[f]) + "'");
      if (std::find(members.begin(), members.end(), *m) == members.end()) members.push_back(*m);
    }
    out[*key] = std::move(members);
  }
  return out;
}

}  // namespace wmvoc
