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

#include "wmvoc/wmvoc.h"

#include <algorithm>
#include <cstdlib>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "embedding.h"
#include "evaluation.h"
#include "evt.h"
#include "model_io.h"
#include "options.h"
#include "recognition.h"
#include "solver.h"
#include "status.h"
#include "synth.h"
#include "vocab_io.h"

struct wmv_vocab {
  wmvoc::SemanticVocabulary vocab;
  wmvoc::LoadStats stats;
};

struct wmv_features {
  wmvoc::FeatureSet set;
  bool labeled = false;
};

struct wmv_options {
  wmvoc::TrainConfig cfg;
  std::string text;
};

struct wmv_model {
  wmvoc::ModelFile file;
  std::string trace;
};

struct wmv_report {
  wmvoc::EvalReport report;
  std::string text;
  std::string dump;
};

struct wmv_predictions {
  std::string text;
};

namespace {

thread_local std::string g_last_error;

wmv_status ToStatus(wmvoc::ErrorCode code) {
  switch (code) {
    case wmvoc::ErrorCode::kInvalidArgument: return WMV_ERR_INVALID_ARGUMENT;
    case wmvoc::ErrorCode::kConfig: return WMV_ERR_CONFIG;
    case wmvoc::ErrorCode::kIo: return WMV_ERR_IO;
    case wmvoc::ErrorCode::kFormat: return WMV_ERR_FORMAT;
    case wmvoc::ErrorCode::kShape: return WMV_ERR_SHAPE;
    case wmvoc::ErrorCode::kNumerical: return WMV_ERR_NUMERICAL;
    case wmvoc::ErrorCode::kFingerprint: return WMV_ERR_FINGERPRINT;
  }
  return WMV_ERR_INTERNAL;
}

template <typename Fn>
wmv_status Guard(Fn&& fn) {
  g_last_error.clear();
  try {
    fn();
    return WMV_OK;
  } catch (const wmvoc::Error& e) {
    g_last_error = e.what();
    return ToStatus(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  }
  return WMV_ERR_INTERNAL;
}

void NotNull(const void* p, const char* what) {
  wmvoc::Require(p != nullptr, wmvoc::ErrorCode::kInvalidArgument,
                 std::string(what) + " must not be null");
}

std::vector<int> ResolveRows(const wmvoc::SemanticVocabulary& vocab, const char* const* labels,
                             std::size_t n) {
  std::vector<int> rows;
  rows.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    NotNull(labels[i], "label");
    rows.push_back(vocab.IndexOf(labels[i]));
  }
  std::sort(rows.begin(), rows.end());
  return rows;
}

std::vector<std::pair<std::string, std::string>> ParseConfigText(const char* text) {
  std::vector<std::pair<std::string, std::string>> out;
  if (text == nullptr) return out;
  std::string s(text);
  std::size_t pos = 0;
  while (pos < s.size()) {
    std::size_t nl = s.find('\n', pos);
    if (nl == std::string::npos) nl = s.size();
    std::string line = s.substr(pos, nl - pos);
    pos = nl + 1;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string v) {
      const auto b = v.find_first_not_of(" \t\r");
      const auto e = v.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : v.substr(b, e - b + 1);
    };
    out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return out;
}

void CheckModelInputs(const wmv_model* model, const wmv_vocab* vocab,
                      const wmv_features* features) {
  NotNull(model, "model");
  NotNull(vocab, "vocab");
  NotNull(features, "features");
  wmvoc::CheckFingerprint(model->file, vocab->vocab);
  wmvoc::Require(features->set.features.cols() == model->file.w.rows(), wmvoc::ErrorCode::kShape,
                 "feature dimension " + std::to_string(features->set.features.cols()) +
                     " does not match the model's " + std::to_string(model->file.w.rows()));
}

}  // namespace

extern "C" {

const char* wmv_last_error(void) { return g_last_error.c_str(); }

const char* wmv_status_name(wmv_status status) {
  switch (status) {
    case WMV_OK: return "ok";
    case WMV_ERR_INVALID_ARGUMENT: return "invalid argument";
    case WMV_ERR_CONFIG: return "configuration error";
    case WMV_ERR_IO: return "i/o error";
    case WMV_ERR_FORMAT: return "format error";
    case WMV_ERR_SHAPE: return "dimension mismatch";
    case WMV_ERR_NUMERICAL: return "numerical failure";
    case WMV_ERR_FINGERPRINT: return "fingerprint mismatch";
    case WMV_ERR_INTERNAL: return "internal error";
  }
  return "unknown";
}

int wmv_exit_code(wmv_status status) {
  switch (status) {
    case WMV_OK: return 0;
    case WMV_ERR_INVALID_ARGUMENT:
    case WMV_ERR_CONFIG: return 2;
    case WMV_ERR_IO:
    case WMV_ERR_FORMAT:
    case WMV_ERR_SHAPE:
    case WMV_ERR_FINGERPRINT: return 3;
    case WMV_ERR_NUMERICAL: return 4;
    case WMV_ERR_INTERNAL: return 1;
  }
  return 1;
}

wmv_status wmv_vocab_load(const char* path, wmv_vector_format format, int normalize,
                          int has_header, wmv_vocab** out) {
  return Guard([&] {
    NotNull(path, "path");
    NotNull(out, "out");
    *out = nullptr;
    auto v = std::make_unique<wmv_vocab>();
    v->vocab = wmvoc::LoadWordVectors(
        path, format == WMV_VECTORS_BINARY ? wmvoc::VectorFormat::kBinary : wmvoc::VectorFormat::kText,
        normalize != 0, has_header != 0, &v->stats);
    *out = v.release();
  });
}

void wmv_vocab_free(wmv_vocab* vocab) { delete vocab; }

size_t wmv_vocab_size(const wmv_vocab* vocab) { return vocab ? vocab->vocab.size() : 0; }

int wmv_vocab_dim(const wmv_vocab* vocab) { return vocab ? vocab->vocab.dim() : 0; }

size_t wmv_vocab_duplicate_labels(const wmv_vocab* vocab) {
  return vocab ? vocab->stats.duplicate_labels : 0;
}

int wmv_vocab_find(const wmv_vocab* vocab, const char* label) {
  if (vocab == nullptr || label == nullptr) return -1;
  auto row = vocab->vocab.Find(label);
  return row ? *row : -1;
}

wmv_status wmv_vocab_set_classes(wmv_vocab* vocab, const char* const* source, size_t n_source,
                                 const char* const* target, size_t n_target) {
  return Guard([&] {
    NotNull(vocab, "vocab");
    if (n_source > 0) NotNull(source, "source");
    if (n_target > 0) NotNull(target, "target");
    vocab->vocab.SetClasses(ResolveRows(vocab->vocab, source, n_source),
                            ResolveRows(vocab->vocab, target, n_target));
  });
}

size_t wmv_vocab_source_count(const wmv_vocab* vocab) {
  return vocab ? vocab->vocab.source_ids().size() : 0;
}

size_t wmv_vocab_target_count(const wmv_vocab* vocab) {
  return vocab ? vocab->vocab.target_ids().size() : 0;
}

wmv_status wmv_vocab_prune(wmv_vocab* vocab, const char* freq_path, int64_t min_count,
                           int64_t max_count) {
  return Guard([&] {
    NotNull(vocab, "vocab");
    NotNull(freq_path, "freq_path");
    wmvoc::Require(min_count >= 0 && min_count <= max_count, wmvoc::ErrorCode::kConfig,
                   "frequency bounds must satisfy 0 <= min <= max");
    vocab->vocab = wmvoc::PruneVocabulary(vocab->vocab, wmvoc::LoadFrequencyTable(freq_path),
                                          min_count, max_count);
  });
}

wmv_status wmv_vocab_restrict_to_classes(wmv_vocab* vocab) {
  return Guard([&] {
    NotNull(vocab, "vocab");
    std::vector<int> rows = vocab->vocab.source_ids();
    rows.insert(rows.end(), vocab->vocab.target_ids().begin(), vocab->vocab.target_ids().end());
    std::sort(rows.begin(), rows.end());
    vocab->vocab = vocab->vocab.Subset(rows);
  });
}

wmv_status wmv_vocab_load_synsets(wmv_vocab* vocab, const char* path) {
  return Guard([&] {
    NotNull(vocab, "vocab");
    NotNull(path, "path");
    vocab->vocab.SetSynsets(wmvoc::LoadSynsets(path, vocab->vocab));
  });
}

wmv_status wmv_vocab_lookup(const wmv_vocab* vocab, const char* phrase, double* out,
                            size_t dim) {
  return Guard([&] {
    NotNull(vocab, "vocab");
    NotNull(phrase, "phrase");
    NotNull(out, "out");
    wmvoc::Require(dim == static_cast<size_t>(vocab->vocab.dim()), wmvoc::ErrorCode::kShape,
                   "output buffer does not match the vocabulary dimension");
    const wmvoc::Vector v = wmvoc::LookupPhrase(vocab->vocab, phrase);
    std::copy(v.data(), v.data() + v.size(), out);
  });
}

wmv_status wmv_features_load(const wmv_vocab* vocab, const char* features_path,
                             const char* labels_path, wmv_features** out) {
  return Guard([&] {
    NotNull(features_path, "features_path");
    NotNull(out, "out");
    *out = nullptr;
    auto f = std::make_unique<wmv_features>();
    if (labels_path != nullptr) {
      NotNull(vocab, "vocab");
      f->set = wmvoc::LoadFeatureSet(features_path, labels_path, vocab->vocab);
      f->labeled = true;
    } else {
      f->set.features = wmvoc::ReadFeatureMatrix(features_path);
    }
    *out = f.release();
  });
}

void wmv_features_free(wmv_features* features) { delete features; }

size_t wmv_features_count(const wmv_features* features) {
  return features ? static_cast<size_t>(features->set.features.rows()) : 0;
}

int wmv_features_dim(const wmv_features* features) {
  return features ? static_cast<int>(features->set.features.cols()) : 0;
}

wmv_status wmv_options_create(wmv_options** out) {
  return Guard([&] {
    NotNull(out, "out");
    *out = new wmv_options();
  });
}

void wmv_options_free(wmv_options* options) { delete options; }

wmv_status wmv_options_set(wmv_options* options, const char* key, const char* value) {
  return Guard([&] {
    NotNull(options, "options");
    NotNull(key, "key");
    NotNull(value, "value");
    wmvoc::SetOption(&options->cfg, key, value);
  });
}

wmv_status wmv_options_validate(const wmv_options* options) {
  return Guard([&] {
    NotNull(options, "options");
    options->cfg.Validate();
  });
}

const char* wmv_options_describe(wmv_options* options) {
  if (options == nullptr) return "";
  options->text.clear();
  for (const auto& [k, v] : wmvoc::DescribeOptions(options->cfg)) {
    options->text += k + " = " + v + "\n";
  }
  return options->text.c_str();
}

wmv_status wmv_train(const wmv_vocab* vocab, const wmv_features* train,
                     const wmv_options* options, wmv_model** out) {
  return Guard([&] {
    NotNull(vocab, "vocab");
    NotNull(train, "train");
    NotNull(options, "options");
    NotNull(out, "out");
    *out = nullptr;
    wmvoc::Require(train->labeled, wmvoc::ErrorCode::kInvalidArgument,
                   "training features need labels");
    wmvoc::Require(!vocab->vocab.source_ids().empty(), wmvoc::ErrorCode::kInvalidArgument,
                   "no source classes set on the vocabulary");
    const wmvoc::LabeledFeatures data = wmvoc::ToLabeledFeatures(train->set, vocab->vocab);
    const wmvoc::TrainResult res = wmvoc::Train(data, vocab->vocab, options->cfg);

    auto m = std::make_unique<wmv_model>();
    m->file.w = res.w;
    m->file.weights = res.weights;
    m->file.loss = options->cfg.loss;
    m->file.av_count = options->cfg.av_count;
    m->file.bs_count = options->cfg.bs_count;
    m->file.normalized = vocab->vocab.normalized();
    for (int row : vocab->vocab.source_ids()) m->file.source_labels.push_back(vocab->vocab.label(row));
    m->file.source_fingerprint = wmvoc::SourceFingerprint(vocab->vocab);
    m->file.vocab_fingerprint = wmvoc::VocabFingerprint(vocab->vocab);
    m->trace = res.trace.ToLog();
    if (res.trace.line_search_failed) m->trace += "# warning: line search failed\n";
    if (res.trace.evt_fallbacks > 0) {
      m->trace += "# warning: " + std::to_string(res.trace.evt_fallbacks) +
                  " coverage fits fell back to the nearest foreign distance\n";
    }
    *out = m.release();
  });
}

void wmv_model_free(wmv_model* model) { delete model; }

wmv_status wmv_model_save(const wmv_model* model, const char* path) {
  return Guard([&] {
    NotNull(model, "model");
    NotNull(path, "path");
    wmvoc::SaveModel(path, model->file);
  });
}

wmv_status wmv_model_load(const char* path, wmv_model** out) {
  return Guard([&] {
    NotNull(path, "path");
    NotNull(out, "out");
    *out = nullptr;
    auto m = std::make_unique<wmv_model>();
    m->file = wmvoc::LoadModel(path);
    *out = m.release();
  });
}

const char* wmv_model_trace(const wmv_model* model) { return model ? model->trace.c_str() : ""; }

void wmv_model_shape(const wmv_model* model, int* rows, int* cols) {
  if (rows) *rows = model ? static_cast<int>(model->file.w.rows()) : 0;
  if (cols) *cols = model ? static_cast<int>(model->file.w.cols()) : 0;
}

wmv_status wmv_model_weights_matrix(const wmv_model* model, double* out, size_t n) {
  return Guard([&] {
    NotNull(model, "model");
    NotNull(out, "out");
    const auto& w = model->file.w;
    wmvoc::Require(n == static_cast<size_t>(w.size()), wmvoc::ErrorCode::kShape,
                   "output buffer does not match W");
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) out[i * w.cols() + j] = w(i, j);
    }
  });
}

size_t wmv_model_class_count(const wmv_model* model) {
  return model ? model->file.source_labels.size() : 0;
}

const char* wmv_model_class_label(const wmv_model* model, size_t i) {
  if (model == nullptr || i >= model->file.source_labels.size()) return nullptr;
  return model->file.source_labels[i].c_str();
}

double wmv_model_class_weight(const wmv_model* model, size_t i) {
  if (model == nullptr || i >= model->file.weights.size()) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  return model->file.weights.weight(static_cast<int>(i));
}

wmv_status wmv_model_check(const wmv_model* model, const wmv_vocab* vocab, int* same_vocab) {
  return Guard([&] {
    NotNull(model, "model");
    NotNull(vocab, "vocab");
    const bool same = wmvoc::CheckFingerprint(model->file, vocab->vocab);
    if (same_vocab) *same_vocab = same ? 1 : 0;
  });
}

wmv_status wmv_evaluate(const wmv_model* model, const wmv_vocab* vocab,
                        const wmv_features* test, const char* const* settings,
                        size_t n_settings, const int* top_k, size_t n_top_k, int threads,
                        const char* config_text, wmv_report** out) {
  return Guard([&] {
    NotNull(out, "out");
    *out = nullptr;
    CheckModelInputs(model, vocab, test);
    wmvoc::Require(test->labeled, wmvoc::ErrorCode::kInvalidArgument,
                   "evaluation features need labels");
    wmvoc::Require(n_settings > 0 && settings != nullptr, wmvoc::ErrorCode::kConfig,
                   "no settings requested");
    wmvoc::Require(n_top_k > 0 && top_k != nullptr, wmvoc::ErrorCode::kConfig,
                   "no top-k values requested");
    std::vector<wmvoc::Setting> parsed;
    for (size_t i = 0; i < n_settings; ++i) {
      NotNull(settings[i], "setting");
      parsed.push_back(wmvoc::ParseSetting(settings[i]));
    }
    std::vector<int> ks(top_k, top_k + n_top_k);
    auto r = std::make_unique<wmv_report>();
    r->report = wmvoc::Evaluate(model->file.w, test->set.features, test->set.rows, vocab->vocab,
                                parsed, ks, threads);
    r->report.config = ParseConfigText(config_text);
    r->text = r->report.ToText();
    r->dump = r->report.PredictionDump(vocab->vocab);
    *out = r.release();
  });
}

void wmv_report_free(wmv_report* report) { delete report; }

const char* wmv_report_text(const wmv_report* report) { return report ? report->text.c_str() : ""; }

const char* wmv_report_dump(const wmv_report* report) { return report ? report->dump.c_str() : ""; }

wmv_status wmv_report_metric(const wmv_report* report, const char* setting, const char* key,
                             double* out) {
  return Guard([&] {
    NotNull(report, "report");
    NotNull(setting, "setting");
    NotNull(key, "key");
    NotNull(out, "out");
    const wmvoc::SettingReport* r = report->report.Find(wmvoc::ParseSetting(setting));
    wmvoc::Require(r != nullptr, wmvoc::ErrorCode::kInvalidArgument,
                   std::string("setting not in report: ") + setting);
    const std::string k(key);
    std::optional<double> v;
    if (k.rfind("top", 0) == 0) {
      const int depth = std::atoi(k.c_str() + 3);
      auto it = r->top_k.find(depth);
      if (it != r->top_k.end()) v = it->second;
    } else if (k == "acc_u_to_t") {
      v = r->acc_u_to_t;
    } else if (k == "acc_s_to_t") {
      v = r->acc_s_to_t;
    } else if (k == "harmonic_mean") {
      v = r->harmonic_mean;
    } else if (k == "ausuc") {
      v = r->ausuc;
    } else if (k == "fpr") {
      v = r->fpr;
    } else if (k == "openness") {
      v = r->openness;
    }
    wmvoc::Require(v.has_value(), wmvoc::ErrorCode::kInvalidArgument,
                   "metric '" + k + "' not reported for " + setting);
    *out = *v;
  });
}

wmv_status wmv_predict(const wmv_model* model, const wmv_vocab* vocab,
                       const wmv_features* features, const char* setting, int k, int threads,
                       wmv_predictions** out) {
  return Guard([&] {
    NotNull(out, "out");
    NotNull(setting, "setting");
    *out = nullptr;
    CheckModelInputs(model, vocab, features);
    wmvoc::Require(k >= 1, wmvoc::ErrorCode::kConfig, "k must be positive");
    const wmvoc::CandidateSet candidates =
        wmvoc::MakeCandidates(vocab->vocab, wmvoc::ParseSetting(setting));
    const auto preds = wmvoc::BatchClassify(model->file.w, features->set.features, vocab->vocab,
                                            candidates, k, threads);
    auto p = std::make_unique<wmv_predictions>();
    p->text = wmvoc::FormatPredictions(preds, vocab->vocab);
    *out = p.release();
  });
}

void wmv_predictions_free(wmv_predictions* predictions) { delete predictions; }

const char* wmv_predictions_text(const wmv_predictions* predictions) {
  return predictions ? predictions->text.c_str() : "";
}

void wmv_synth_spec_default(wmv_synth_spec* spec) {
  if (spec == nullptr) return;
  const wmvoc::SynthSpec d;
  spec->seed = d.seed;
  spec->n_source = d.n_source;
  spec->n_target = d.n_target;
  spec->n_distractors = d.n_distractors;
  spec->d = d.d;
  spec->p = d.p;
  spec->instances_per_class = d.instances_per_class;
  spec->test_instances_per_class = d.test_instances_per_class;
  spec->noise_sigma = d.noise_sigma;
  spec->map_condition = d.map_condition;
  spec->min_angle_deg = d.min_angle_deg;
}

wmv_status wmv_synth_generate(const wmv_synth_spec* spec, const char* dir, int binary_features) {
  return Guard([&] {
    NotNull(spec, "spec");
    NotNull(dir, "dir");
    wmvoc::SynthSpec s;
    s.seed = spec->seed;
    s.n_source = spec->n_source;
    s.n_target = spec->n_target;
    s.n_distractors = spec->n_distractors;
    s.d = spec->d;
    s.p = spec->p;
    s.instances_per_class = spec->instances_per_class;
    s.test_instances_per_class = spec->test_instances_per_class;
    s.noise_sigma = spec->noise_sigma;
    s.map_condition = spec->map_condition;
    s.min_angle_deg = spec->min_angle_deg;
    wmvoc::WriteBenchmark(wmvoc::GenerateBenchmark(s), dir, binary_features != 0);
  });
}

wmv_status wmv_fit_weibull(const double* samples, size_t n, double significance,
                           wmv_weibull_result* out) {
  return Guard([&] {
    NotNull(out, "out");
    if (n > 0) NotNull(samples, "samples");
    const wmvoc::WeibullFit fit = wmvoc::FitWeibullOrStep(std::span<const double>(samples, n));
    out->kappa = fit.infinite_shape ? std::numeric_limits<double>::infinity() : fit.shape;
    out->lambda = fit.scale;
    out->margin_radius = wmvoc::MarginRadius(fit, significance);
    out->coverage_radius = wmvoc::CoverageRadius(fit, significance);
    out->infinite_shape = fit.infinite_shape ? 1 : 0;
  });
}

}  // extern "C"
