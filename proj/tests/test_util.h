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

#ifndef WMVOC_TESTS_TEST_UTIL_H_
#define WMVOC_TESTS_TEST_UTIL_H_

#include <unistd.h>

#include <filesystem>
#include <string>
#include <vector>

#include "embedding.h"
#include "random.h"

namespace wmvoc::testing {

inline RowMatrix RandomMatrix(Rng& rng, int rows, int cols, double scale = 1.0) {
  RowMatrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = scale * rng.Normal();
  }
  return m;
}

inline Eigen::MatrixXd RandomW(Rng& rng, int p, int d, double scale = 1.0) {
  Eigen::MatrixXd m(p, d);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < d; ++j) m(i, j) = scale * rng.Normal();
  }
  return m;
}

inline std::vector<std::string> Labels(const std::string& prefix, int n) {
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

// n_rows random prototypes; rows [0, n_source) are source classes and the
// next n_target rows target classes.
inline SemanticVocabulary RandomVocab(Rng& rng, int n_rows, int d, int n_source, int n_target,
                                      bool normalize = true) {
  SemanticVocabulary v(Labels("w", n_rows), RandomMatrix(rng, n_rows, d), normalize);
  std::vector<int> s, t;
  for (int i = 0; i < n_source; ++i) s.push_back(i);
  for (int i = 0; i < n_target; ++i) t.push_back(n_source + i);
  v.SetClasses(s, t);
  return v;
}

// Every class receives at least one instance.
inline LabeledFeatures RandomData(Rng& rng, int n, int p, int classes, double scale = 1.0) {
  LabeledFeatures data;
  data.features = RandomMatrix(rng, n, p, scale);
  data.class_count = classes;
  for (int i = 0; i < n; ++i) {
    data.labels.push_back(i < classes ? i : static_cast<int>(rng.Below(classes)));
  }
  return data;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("wmvoc_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string File(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace wmvoc::testing

#endif  // WMVOC_TESTS_TEST_UTIL_H_
