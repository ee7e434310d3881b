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

// Exercises the public C interface only; links against the shared library.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <unistd.h>

#include "wmvoc/wmvoc.h"

namespace {

std::vector<std::string> Lines(const std::string& path) {
  std::ifstream in(path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

std::vector<const char*> Pointers(const std::vector<std::string>& v) {
  std::vector<const char*> out;
  for (const auto& s : v) out.push_back(s.c_str());
  return out;
}

class CApiTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = (std::filesystem::temp_directory_path() /
            ("wmvoc_capi_" + std::to_string(::getpid())))
               .string();
    std::filesystem::create_directories(dir_);
    wmv_synth_spec spec;
    wmv_synth_spec_default(&spec);
    spec.seed = 5;
    spec.n_distractors = 30;
    spec.instances_per_class = 10;
    spec.test_instances_per_class = 6;
    ASSERT_EQ(wmv_synth_generate(&spec, dir_.c_str(), 1), WMV_OK) << wmv_last_error();
  }
  static void TearDownTestSuite() { std::filesystem::remove_all(dir_); }

  static std::string File(const char* name) { return dir_ + "/" + name; }

  void SetUp() override {
    ASSERT_EQ(wmv_vocab_load(File("vocab.txt").c_str(), WMV_VECTORS_TEXT, 1, 1, &vocab_), WMV_OK)
        << wmv_last_error();
    const auto src = Lines(File("source.classes"));
    const auto tgt = Lines(File("target.classes"));
    const auto s = Pointers(src), t = Pointers(tgt);
    ASSERT_EQ(wmv_vocab_set_classes(vocab_, s.data(), s.size(), t.data(), t.size()), WMV_OK)
        << wmv_last_error();
  }
  void TearDown() override { wmv_vocab_free(vocab_); }

  wmv_model* TrainModel() {
    wmv_features* train = nullptr;
    EXPECT_EQ(wmv_features_load(vocab_, File("train.feat").c_str(), File("train.labels").c_str(),
                                &train),
              WMV_OK)
        << wmv_last_error();
    wmv_options* opts = nullptr;
    EXPECT_EQ(wmv_options_create(&opts), WMV_OK);
    EXPECT_EQ(wmv_options_set(opts, "max_iters", "30"), WMV_OK);
    wmv_model* model = nullptr;
    EXPECT_EQ(wmv_train(vocab_, train, opts, &model), WMV_OK) << wmv_last_error();
    wmv_options_free(opts);
    wmv_features_free(train);
    return model;
  }

  static std::string dir_;
  wmv_vocab* vocab_ = nullptr;
};

std::string CApiTest::dir_;

TEST_F(CApiTest, VocabularyQueries) {
  EXPECT_EQ(wmv_vocab_size(vocab_), 43u);
  EXPECT_EQ(wmv_vocab_dim(vocab_), 20);
  EXPECT_EQ(wmv_vocab_source_count(vocab_), 10u);
  EXPECT_EQ(wmv_vocab_target_count(vocab_), 3u);
  EXPECT_EQ(wmv_vocab_find(vocab_, "tgt_001"), 11);
  EXPECT_EQ(wmv_vocab_find(vocab_, "nothing"), -1);
  std::vector<double> v(20);
  EXPECT_EQ(wmv_vocab_lookup(vocab_, "src_000", v.data(), v.size()), WMV_OK);
  double norm = 0.0;
  for (double x : v) norm += x * x;
  EXPECT_NEAR(norm, 1.0, 1e-12);
  EXPECT_EQ(wmv_vocab_lookup(vocab_, "src_000", v.data(), 3), WMV_ERR_SHAPE);
  EXPECT_EQ(wmv_vocab_lookup(vocab_, "unknown", v.data(), v.size()), WMV_ERR_FORMAT);
  EXPECT_NE(std::strstr(wmv_last_error(), "unknown"), nullptr);
  EXPECT_EQ(wmv_vocab_restrict_to_classes(vocab_), WMV_OK);
  EXPECT_EQ(wmv_vocab_size(vocab_), 13u);
}

TEST_F(CApiTest, ErrorsAreReported) {
  wmv_vocab* v = nullptr;
  EXPECT_EQ(wmv_vocab_load("/nonexistent.txt", WMV_VECTORS_TEXT, 1, 1, &v), WMV_ERR_IO);
  EXPECT_EQ(v, nullptr);
  EXPECT_GT(std::strlen(wmv_last_error()), 0u);
  EXPECT_EQ(wmv_vocab_load(nullptr, WMV_VECTORS_TEXT, 1, 1, &v), WMV_ERR_INVALID_ARGUMENT);
  wmv_options* opts = nullptr;
  ASSERT_EQ(wmv_options_create(&opts), WMV_OK);
  EXPECT_EQ(wmv_options_set(opts, "nope", "1"), WMV_ERR_CONFIG);
  EXPECT_EQ(wmv_options_set(opts, "alpha", "1.5"), WMV_OK);
  EXPECT_EQ(wmv_options_validate(opts), WMV_ERR_CONFIG);
  wmv_options_free(opts);
  EXPECT_STREQ(wmv_status_name(WMV_ERR_FINGERPRINT), "fingerprint mismatch");
  EXPECT_EQ(wmv_exit_code(WMV_OK), 0);
  EXPECT_EQ(wmv_exit_code(WMV_ERR_CONFIG), 2);
  EXPECT_EQ(wmv_exit_code(WMV_ERR_FORMAT), 3);
}

TEST_F(CApiTest, OptionsDescribe) {
  wmv_options* opts = nullptr;
  ASSERT_EQ(wmv_options_create(&opts), WMV_OK);
  ASSERT_EQ(wmv_options_set(opts, "alpha", "0.75"), WMV_OK);
  const std::string text = wmv_options_describe(opts);
  EXPECT_NE(text.find("alpha = 0.75\n"), std::string::npos);
  EXPECT_NE(text.find("weight_rounds = 2\n"), std::string::npos);
  wmv_options_free(opts);
}

TEST_F(CApiTest, TrainSaveLoadEvaluatePredict) {
  wmv_model* model = TrainModel();
  ASSERT_NE(model, nullptr);
  int rows = 0, cols = 0;
  wmv_model_shape(model, &rows, &cols);
  EXPECT_EQ(rows, 50);
  EXPECT_EQ(cols, 20);
  ASSERT_EQ(wmv_model_class_count(model), 10u);
  EXPECT_STREQ(wmv_model_class_label(model, 0), "src_000");
  double mean = 0.0;
  for (size_t c = 0; c < 10; ++c) mean += wmv_model_class_weight(model, c) / 10.0;
  EXPECT_NEAR(mean, 1.0, 1e-12);
  EXPECT_NE(std::strstr(wmv_model_trace(model), "iter=0 obj="), nullptr);

  const std::string path = File("model.bin");
  ASSERT_EQ(wmv_model_save(model, path.c_str()), WMV_OK);
  wmv_model* loaded = nullptr;
  ASSERT_EQ(wmv_model_load(path.c_str(), &loaded), WMV_OK) << wmv_last_error();
  std::vector<double> a(rows * cols), b(rows * cols);
  ASSERT_EQ(wmv_model_weights_matrix(model, a.data(), a.size()), WMV_OK);
  ASSERT_EQ(wmv_model_weights_matrix(loaded, b.data(), b.size()), WMV_OK);
  EXPECT_EQ(a, b);
  int same = -1;
  EXPECT_EQ(wmv_model_check(loaded, vocab_, &same), WMV_OK);
  EXPECT_EQ(same, 1);

  wmv_features* test = nullptr;
  ASSERT_EQ(wmv_features_load(vocab_, File("test.feat").c_str(), File("test.labels").c_str(),
                              &test),
            WMV_OK)
      << wmv_last_error();
  EXPECT_EQ(wmv_features_count(test), 78u);
  const char* settings[] = {"supervised", "zsl", "gzsl", "openset"};
  const int top_k[] = {1, 5};
  wmv_report* one = nullptr;
  wmv_report* four = nullptr;
  ASSERT_EQ(wmv_evaluate(loaded, vocab_, test, settings, 4, top_k, 2, 1, "seed = 5\n", &one),
            WMV_OK)
      << wmv_last_error();
  ASSERT_EQ(wmv_evaluate(loaded, vocab_, test, settings, 4, top_k, 2, 4, "seed = 5\n", &four),
            WMV_OK);
  EXPECT_STREQ(wmv_report_text(one), wmv_report_text(four));
  EXPECT_NE(std::strstr(wmv_report_text(one), "seed = 5"), nullptr);
  double top1 = -1, ausuc = -1, missing = 0;
  EXPECT_EQ(wmv_report_metric(one, "supervised", "top1", &top1), WMV_OK);
  EXPECT_EQ(wmv_report_metric(one, "gzsl", "ausuc", &ausuc), WMV_OK);
  EXPECT_GT(top1, 0.5);
  EXPECT_GE(ausuc, 0.0);
  EXPECT_LE(ausuc, 1.0);
  EXPECT_NE(wmv_report_metric(one, "zsl", "ausuc", &missing), WMV_OK);
  EXPECT_NE(std::strstr(wmv_report_dump(one), "gzsl.stack\t"), nullptr);

  wmv_predictions* preds = nullptr;
  ASSERT_EQ(wmv_predict(loaded, vocab_, test, "openset", 1, 1, &preds), WMV_OK);
  const std::string text = wmv_predictions_text(preds);
  EXPECT_EQ(static_cast<size_t>(std::count(text.begin(), text.end(), '\n')), 78u);
  EXPECT_EQ(text.rfind("0\t", 0), 0u);
  wmv_predictions_free(preds);

  wmv_report_free(one);
  wmv_report_free(four);
  wmv_features_free(test);
  wmv_model_free(loaded);
  wmv_model_free(model);
}

TEST_F(CApiTest, FingerprintMismatchIsRejected) {
  wmv_model* model = TrainModel();
  ASSERT_NE(model, nullptr);
  // Swapping a source class changes the source fingerprint.
  auto src = Lines(File("source.classes"));
  src[0] = "voc_00000";
  const auto s = Pointers(src);
  const auto tgt = Lines(File("target.classes"));
  const auto t = Pointers(tgt);
  ASSERT_EQ(wmv_vocab_set_classes(vocab_, s.data(), s.size(), t.data(), t.size()), WMV_OK);
  int same = -1;
  EXPECT_EQ(wmv_model_check(model, vocab_, &same), WMV_ERR_FINGERPRINT);
  wmv_model_free(model);
}

TEST(CApiWeibullTest, FitAndStep) {
  const double samples[] = {0.5, 0.9, 1.3, 0.7, 1.1, 0.6};
  wmv_weibull_result r;
  ASSERT_EQ(wmv_fit_weibull(samples, 6, 0.05, &r), WMV_OK);
  EXPECT_FALSE(r.infinite_shape);
  EXPECT_NEAR(r.margin_radius, r.lambda * std::pow(std::log(20.0), 1.0 / r.kappa), 1e-12);
  const double same[] = {2.0, 2.0};
  ASSERT_EQ(wmv_fit_weibull(same, 2, 0.05, &r), WMV_OK);
  EXPECT_TRUE(r.infinite_shape);
  EXPECT_TRUE(std::isinf(r.kappa));
  EXPECT_EQ(r.margin_radius, 2.0);
  EXPECT_EQ(wmv_fit_weibull(samples, 0, 0.05, &r), WMV_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(wmv_fit_weibull(samples, 6, 1.5, &r), WMV_ERR_INVALID_ARGUMENT);
}

}  // namespace
