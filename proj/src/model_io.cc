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

#include "model_io.h"

#include <bit>
#include <fstream>
#include <sstream>

#include "status.h"

namespace wmvoc {

namespace {

constexpr char kMagic[4] = {'W', 'M', 'V', 'M'};
constexpr uint64_t kFnvOffset = 1469598103934665603ull;
constexpr uint64_t kFnvPrime = 1099511628211ull;

class Fnv {
 public:
  void Bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h_ ^= p[i];
      h_ *= kFnvPrime;
    }
  }
  void U64(uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    Bytes(b, 8);
  }
  void Label(const std::string& s) {
    U64(s.size());
    Bytes(s.data(), s.size());
  }
  void Row(const SemanticVocabulary& vocab, int row) {
    for (int j = 0; j < vocab.dim(); ++j) U64(std::bit_cast<uint64_t>(vocab.vectors()(row, j)));
  }
  uint64_t value() const { return h_; }

 private:
  uint64_t h_ = kFnvOffset;
};

uint64_t Checksum(const std::string& bytes, std::size_t n) {
  Fnv f;
  f.Bytes(bytes.data(), n);
  return f.value();
}

class Writer {
 public:
  void U32(uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<char>(v >> (8 * i)));
  }
  void U64(uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<char>(v >> (8 * i)));
  }
  void I32(int v) { U32(static_cast<uint32_t>(v)); }
  void F64(double v) { U64(std::bit_cast<uint64_t>(v)); }
  void Str(const std::string& s) {
    U32(static_cast<uint32_t>(s.size()));
    out_ += s;
  }
  void Fit(const WeibullFit& f) {
    F64(f.shape);
    F64(f.scale);
    U32(f.infinite_shape ? 1 : 0);
  }
  std::string& bytes() { return out_; }

 private:
  std::string out_;
};

class Reader {
 public:
  Reader(const std::string& bytes, std::size_t end) : bytes_(bytes), end_(end) {}

  uint32_t U32() {
    Need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(Byte()) << (8 * i);
    return v;
  }
  uint64_t U64() {
    Need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(Byte()) << (8 * i);
    return v;
  }
  int I32() { return static_cast<int>(U32()); }
  double F64() { return std::bit_cast<double>(U64()); }
  bool Bool() { return U32() != 0; }
  std::string Str() {
    const uint32_t n = U32();
    Need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  WeibullFit Fit() {
    WeibullFit f;
    f.shape = F64();
    f.scale = F64();
    f.infinite_shape = Bool();
    return f;
  }
  bool done() const { return pos_ == end_; }

 private:
  void Need(std::size_t n) const {
    Require(end_ - pos_ >= n, ErrorCode::kFormat, "model file is truncated");
  }
  unsigned char Byte() { return static_cast<unsigned char>(bytes_[pos_++]); }

  const std::string& bytes_;
  std::size_t end_;
  std::size_t pos_ = 0;
};

}  // namespace

uint64_t SourceFingerprint(const SemanticVocabulary& vocab) {
  Fnv f;
  f.U64(vocab.source_ids().size());
  f.U64(static_cast<uint64_t>(vocab.dim()));
  for (int row : vocab.source_ids()) {
    f.Label(vocab.label(row));
    f.Row(vocab, row);
  }
  return f.value();
}

uint64_t VocabFingerprint(const SemanticVocabulary& vocab) {
  Fnv f;
  f.U64(vocab.size());
  f.U64(static_cast<uint64_t>(vocab.dim()));
  for (std::size_t r = 0; r < vocab.size(); ++r) {
    f.Label(vocab.label(static_cast<int>(r)));
    f.Row(vocab, static_cast<int>(r));
  }
  return f.value();
}

std::string SerializeModel(const ModelFile& m) {
  Require(m.weights.size() == m.source_labels.size(), ErrorCode::kShape,
          "class weights and source labels differ in count");
  Writer w;
  w.bytes().append(kMagic, 4);
  w.U32(m.version);
  w.U32(static_cast<uint32_t>(m.w.rows()));
  w.U32(static_cast<uint32_t>(m.w.cols()));
  for (Eigen::Index i = 0; i < m.w.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.w.cols(); ++j) w.F64(m.w(i, j));
  }
  w.F64(m.loss.alpha);
  w.F64(m.loss.lambda_reg);
  w.F64(m.loss.epsilon);
  w.F64(m.loss.margin_c);
  w.U32(m.loss.normalize_triplet ? 1 : 0);
  w.I32(m.av_count);
  w.I32(m.bs_count);
  w.U32(m.normalized ? 1 : 0);
  w.U64(m.source_fingerprint);
  w.U64(m.vocab_fingerprint);
  w.U32(static_cast<uint32_t>(m.source_labels.size()));
  for (std::size_t c = 0; c < m.source_labels.size(); ++c) {
    const ClassWeight& cw = m.weights.classes[c];
    w.Str(m.source_labels[c]);
    w.F64(cw.weight);
    w.F64(cw.margin_radius);
    w.F64(cw.coverage_radius);
    w.Fit(cw.margin_fit);
    w.Fit(cw.coverage_fit);
    w.U32(cw.coverage_fallback ? 1 : 0);
  }
  w.U64(Checksum(w.bytes(), w.bytes().size()));
  return std::move(w.bytes());
}

ModelFile DeserializeModel(const std::string& bytes) {
  Require(bytes.size() >= 16, ErrorCode::kFormat, "model file is truncated");
  Require(bytes.compare(0, 4, kMagic, 4) == 0, ErrorCode::kFormat, "not a model file");
  const std::size_t body = bytes.size() - 8;
  Reader r(bytes, body);
  r.U32();  // magic
  ModelFile m;
  m.version = r.U32();
  Require(m.version == kModelFormatVersion, ErrorCode::kFormat,
          "unsupported model format version " + std::to_string(m.version));
  uint64_t stored = 0;
  for (int i = 0; i < 8; ++i) {
    stored |= static_cast<uint64_t>(static_cast<unsigned char>(bytes[body + i])) << (8 * i);
  }
  Require(stored == Checksum(bytes, body), ErrorCode::kFormat,
          "model file is truncated or corrupt (checksum mismatch)");
  const uint32_t rows = r.U32();
  const uint32_t cols = r.U32();
  Require(static_cast<uint64_t>(rows) * cols * 8 <= body, ErrorCode::kFormat,
          "model file is truncated");
  m.w.resize(rows, cols);
  for (uint32_t i = 0; i < rows; ++i) {
    for (uint32_t j = 0; j < cols; ++j) m.w(i, j) = r.F64();
  }
  m.loss.alpha = r.F64();
  m.loss.lambda_reg = r.F64();
  m.loss.epsilon = r.F64();
  m.loss.margin_c = r.F64();
  m.loss.normalize_triplet = r.Bool();
  m.av_count = r.I32();
  m.bs_count = r.I32();
  m.normalized = r.Bool();
  m.source_fingerprint = r.U64();
  m.vocab_fingerprint = r.U64();
  const uint32_t classes = r.U32();
  Require(classes <= body, ErrorCode::kFormat, "model file is truncated");
  for (uint32_t c = 0; c < classes; ++c) {
    m.source_labels.push_back(r.Str());
    ClassWeight cw;
    cw.weight = r.F64();
    cw.margin_radius = r.F64();
    cw.coverage_radius = r.F64();
    cw.margin_fit = r.Fit();
    cw.coverage_fit = r.Fit();
    cw.coverage_fallback = r.Bool();
    m.weights.classes.push_back(cw);
  }
  Require(r.done(), ErrorCode::kFormat, "trailing bytes in model file");
  return m;
}

void SaveModel(const std::string& path, const ModelFile& model) {
  const std::string bytes = SerializeModel(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  Require(out.good(), ErrorCode::kIo, "cannot write '" + path + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  Require(out.good(), ErrorCode::kIo, "failed writing '" + path + "'");
}

ModelFile LoadModel(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  Require(in.good(), ErrorCode::kIo, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return DeserializeModel(ss.str());
}

bool CheckFingerprint(const ModelFile& model, const SemanticVocabulary& vocab) {
  Require(vocab.dim() == model.w.cols(), ErrorCode::kFingerprint,
          "vocabulary dimension " + std::to_string(vocab.dim()) +
              " does not match the model's " + std::to_string(model.w.cols()));
  Require(vocab.normalized() == model.normalized, ErrorCode::kFingerprint,
          "vocabulary normalization differs from training");
  Require(SourceFingerprint(vocab) == model.source_fingerprint, ErrorCode::kFingerprint,
          "vocabulary fingerprint mismatch: source classes or their vectors differ from "
          "training");
  return VocabFingerprint(vocab) == model.vocab_fingerprint;
}

}  // namespace wmvoc
