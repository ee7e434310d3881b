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

#include "synth.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>

#include "random.h"
#include "status.h"

namespace wmvoc {

namespace {

Vector RandomUnit(Rng& rng, int d) {
  Vector v(d);
  for (;;) {
    for (int j = 0; j < d; ++j) v(j) = rng.Normal();
    const double n = v.norm();
    if (n > 1e-12) return v / n;
  }
}

std::string Label(const char* prefix, int width, int i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s_%0*d", prefix, width, i);
  return buf;
}

// Orthonormal columns from the Householder QR of a Gaussian matrix.
Eigen::MatrixXd RandomOrthonormal(Rng& rng, int rows, int cols) {
  Eigen::MatrixXd g(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) g(i, j) = rng.Normal();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
  // Fix column signs so the factor does not depend on QR sign conventions.
  const Eigen::MatrixXd r = qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();
  for (int j = 0; j < cols; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

}  // namespace

void SynthSpec::Validate() const {
  Require(n_source >= 1 && n_target >= 1 && n_distractors >= 0, ErrorCode::kConfig,
          "class counts must be positive and distractors nonnegative");
  Require(d >= 1 && p >= 1, ErrorCode::kConfig, "dimensions must be positive");
  Require(instances_per_class >= 1 && test_instances_per_class >= 0, ErrorCode::kConfig,
          "instance counts must be positive");
  Require(noise_sigma >= 0.0, ErrorCode::kConfig, "noise_sigma must be nonnegative");
  Require(map_condition >= 1.0, ErrorCode::kConfig, "map_condition must be at least 1");
  Require(min_angle_deg >= 0.0 && min_angle_deg < 180.0, ErrorCode::kConfig,
          "min_angle_deg must lie in [0, 180)");
  Require(class_counts.empty() || static_cast<int>(class_counts.size()) == n_source,
          ErrorCode::kConfig, "class_counts must list one count per source class");
  for (int c : class_counts) Require(c >= 1, ErrorCode::kConfig, "class counts must be positive");
}

SynthBenchmark GenerateBenchmark(const SynthSpec& spec) {
  spec.Validate();
  Rng rng(spec.seed);
  const int classes = spec.n_source + spec.n_target;
  const int rows = classes + spec.n_distractors;
  const double max_cos = std::cos(spec.min_angle_deg * std::numbers::pi / 180.0);

  RowMatrix protos(rows, spec.d);
  std::vector<std::string> labels;
  labels.reserve(rows);
  for (int c = 0; c < classes; ++c) {
    int tries = 0;
    for (;;) {
      Require(tries++ < kMaxRejections, ErrorCode::kConfig,
              "cannot place " + std::to_string(classes) + " prototypes " +
                  std::to_string(spec.min_angle_deg) + " degrees apart in d=" +
                  std::to_string(spec.d));
      const Vector u = RandomUnit(rng, spec.d);
      bool ok = true;
      for (int o = 0; o < c && ok; ++o) ok = protos.row(o).dot(u) <= max_cos;
      if (ok) {
        protos.row(c) = u.transpose();
        break;
      }
    }
    labels.push_back(c < spec.n_source ? Label("src", 3, c) : Label("tgt", 3, c - spec.n_source));
  }
  for (int r = 0; r < spec.n_distractors; ++r) {
    protos.row(classes + r) = RandomUnit(rng, spec.d).transpose();
    labels.push_back(Label("voc", 5, r));
  }

  SynthBenchmark out;
  {
    const int k = std::min(spec.p, spec.d);
    const Eigen::MatrixXd q1 = RandomOrthonormal(rng, spec.p, k);
    const Eigen::MatrixXd q2 = RandomOrthonormal(rng, spec.d, k);
    Vector sigma(k);
    for (int i = 0; i < k; ++i) {
      const double t = k == 1 ? 0.0 : static_cast<double>(i) / (k - 1);
      sigma(i) = std::pow(spec.map_condition, -t);
    }
    out.map = q1 * sigma.asDiagonal() * q2.transpose();
  }

  out.vocab = SemanticVocabulary(labels, protos, true);
  std::vector<int> source(spec.n_source), target(spec.n_target);
  for (int c = 0; c < spec.n_source; ++c) source[c] = c;
  for (int c = 0; c < spec.n_target; ++c) target[c] = spec.n_source + c;
  out.vocab.SetClasses(source, target);

  int next_id = 0;
  auto draw = [&](int row, RowMatrix& m, int i) {
    const Vector x = out.map * out.vocab.prototype(row).transpose();
    for (int j = 0; j < spec.p; ++j) m(i, j) = x(j) + spec.noise_sigma * rng.Normal();
    return next_id++;
  };

  int n_train = 0;
  for (int c = 0; c < spec.n_source; ++c) {
    n_train += spec.class_counts.empty() ? spec.instances_per_class : spec.class_counts[c];
  }
  out.train.features.resize(n_train, spec.p);
  out.train.class_count = spec.n_source;
  for (int c = 0, i = 0; c < spec.n_source; ++c) {
    const int count = spec.class_counts.empty() ? spec.instances_per_class : spec.class_counts[c];
    for (int k = 0; k < count; ++k, ++i) {
      out.train_instance_ids.push_back(draw(c, out.train.features, i));
      out.train.labels.push_back(c);
      out.train_rows.push_back(c);
    }
  }

  const int n_test = classes * spec.test_instances_per_class;
  out.test.features.resize(n_test, spec.p);
  for (int c = 0, i = 0; c < classes; ++c) {
    for (int k = 0; k < spec.test_instances_per_class; ++k, ++i) {
      out.test_instance_ids.push_back(draw(c, out.test.features, i));
      out.test.rows.push_back(c);
    }
  }
  return out;
}

void WriteBenchmark(const SynthBenchmark& bench, const std::string& dir, bool binary) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  Require(!ec, ErrorCode::kIo, "cannot create directory '" + dir + "'");
  const auto path = [&](const char* name) { return (std::filesystem::path(dir) / name).string(); };
  const SemanticVocabulary& v = bench.vocab;

  WriteWordVectors(path("vocab.txt"), v.labels(), v.vectors(), VectorFormat::kText);
  auto labels_of = [&](std::span<const int> rows) {
    std::vector<std::string> out;
    out.reserve(rows.size());
    for (int r : rows) out.push_back(v.label(r));
    return out;
  };
  auto write_features = [&](const char* name, const RowMatrix& m) {
    if (binary) {
      WriteFeaturesBinary(path(name), m);
    } else {
      WriteFeaturesCsv(path(name), m);
    }
  };
  write_features("train.feat", bench.train.features);
  WriteLabelList(path("train.labels"), labels_of(bench.train_rows));
  write_features("test.feat", bench.test.features);
  WriteLabelList(path("test.labels"), labels_of(bench.test.rows));
  WriteLabelList(path("source.classes"), labels_of(v.source_ids()));
  WriteLabelList(path("target.classes"), labels_of(v.target_ids()));
}

}  // namespace wmvoc
