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

#include "evt.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "parallel.h"
#include "random.h"
#include "status.h"

namespace wmvoc {

namespace {

void CheckSamples(std::span<const double> samples) {
  Require(!samples.empty(), ErrorCode::kInvalidArgument, "weibull fit: no samples");
  for (double x : samples) {
    Require(std::isfinite(x) && x > 0.0, ErrorCode::kInvalidArgument,
            "weibull fit: samples must be finite and positive");
  }
}

// Score evaluated on log-ratios y = ln(x / x_max) <= 0, which keeps x^k
// representable for any shape in range.
double ScoreOnLogs(std::span<const double> logs, double mean_log, double shape) {
  double num = 0.0;
  double den = 0.0;
  for (double y : logs) {
    const double e = std::exp(shape * y);
    num += e * y;
    den += e;
  }
  return num / den - 1.0 / shape - mean_log;
}

std::vector<double> LogRatios(std::span<const double> samples, double* mean_log) {
  const double x_max = *std::max_element(samples.begin(), samples.end());
  std::vector<double> logs(samples.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    logs[i] = std::log(samples[i] / x_max);
    sum += logs[i];
  }
  *mean_log = sum / static_cast<double>(samples.size());
  return logs;
}

void CheckSignificance(double s) {
  Require(s > 0.0 && s < 1.0, ErrorCode::kInvalidArgument, "significance must lie in (0, 1)");
}

void CheckDistance(double dist) {
  Require(dist >= 0.0 && !std::isnan(dist), ErrorCode::kInvalidArgument,
          "distance must be nonnegative");
}

}  // namespace

double WeibullShapeScore(std::span<const double> samples, double shape) {
  CheckSamples(samples);
  double mean_log = 0.0;
  auto logs = LogRatios(samples, &mean_log);
  return ScoreOnLogs(logs, mean_log, shape);
}

WeibullFit FitWeibullMin(std::span<const double> samples) {
  CheckSamples(samples);
  if (samples.size() == 1) return {std::numeric_limits<double>::infinity(), samples[0], true};

  const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
  Require(*lo_it != *hi_it, ErrorCode::kNumerical, "weibull fit: degenerate sample");

  double mean_log = 0.0;
  const auto logs = LogRatios(samples, &mean_log);
  auto score = [&](double k) { return ScoreOnLogs(logs, mean_log, k); };

  // Geometric sweep from k = 1 until the sign changes.
  double lo = 1.0, hi = 1.0;
  if (score(1.0) < 0.0) {
    while (hi < kMaxShape && score(hi) < 0.0) {
      lo = hi;
      hi = std::min(hi * 2.0, kMaxShape);
    }
  } else {
    while (lo > kMinShape && score(lo) > 0.0) {
      hi = lo;
      lo = std::max(lo * 0.5, kMinShape);
    }
  }

  double shape;
  if (score(hi) < 0.0) {
    shape = kMaxShape;
  } else if (score(lo) > 0.0) {
    shape = kMinShape;
  } else {
    for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double s = score(mid);
      if (s == 0.0) {
        lo = hi = mid;
        break;
      }
      (s < 0.0 ? lo : hi) = mid;
    }
    shape = 0.5 * (lo + hi);
  }

  const double x_max = *hi_it;
  double sum = 0.0;
  for (double y : logs) sum += std::exp(shape * y);
  const double scale = x_max * std::pow(sum / static_cast<double>(logs.size()), 1.0 / shape);
  return {shape, scale, false};
}

WeibullFit FitWeibullOrStep(std::span<const double> samples) {
  CheckSamples(samples);
  const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
  if (*lo_it == *hi_it) return {std::numeric_limits<double>::infinity(), *lo_it, true};
  return FitWeibullMin(samples);
}

double MarginProbability(const WeibullFit& fit, double dist) {
  CheckDistance(dist);
  if (fit.infinite_shape) {
    if (dist < fit.scale) return 1.0;
    if (dist == fit.scale) return std::exp(-1.0);
    return 0.0;
  }
  return std::exp(-std::pow(dist / fit.scale, fit.shape));
}

double CoverageProbability(const WeibullFit& fit, double dist) {
  CheckDistance(dist);
  if (fit.infinite_shape) {
    if (dist < fit.scale) return 0.0;
    if (dist == fit.scale) return -std::expm1(-1.0);
    return 1.0;
  }
  return -std::expm1(-std::pow(dist / fit.scale, fit.shape));
}

double MarginRadius(const WeibullFit& fit, double significance) {
  CheckSignificance(significance);
  if (fit.infinite_shape) return fit.scale;
  return fit.scale * std::pow(std::log(1.0 / significance), 1.0 / fit.shape);
}

double CoverageRadius(const WeibullFit& fit, double significance) {
  CheckSignificance(significance);
  if (fit.infinite_shape) return fit.scale;
  return fit.scale * std::pow(-std::log1p(-significance), 1.0 / fit.shape);
}

ClassWeights ClassWeights::Uniform(std::size_t class_count) {
  ClassWeights w;
  w.classes.resize(class_count);
  return w;
}

int ClassWeights::fallback_count() const {
  return static_cast<int>(std::count_if(classes.begin(), classes.end(),
                                        [](const ClassWeight& c) { return c.coverage_fallback; }));
}

namespace {

double Distance(const double* a, const double* b, int dim) { return std::sqrt(SqDistance(a, b, dim)); }

RowMatrix EmbedAll(const EmbeddingMatrix& w, const LabeledFeatures& data) {
  Require(w.rows() == data.features.cols(), ErrorCode::kShape,
          "embedding: feature dimension mismatch");
  return EmbedRows(data.features, w);
}

std::vector<double> MarginSamplesEmbedded(int class_index, const RowMatrix& embedded,
                                          const LabeledFeatures& data,
                                          const SemanticVocabulary& vocab,
                                          std::span<const int> extra_rows) {
  const int dim = vocab.dim();
  const int self = vocab.source_ids()[class_index];
  const double* u = vocab.prototype(self).data();
  std::vector<double> out;
  out.reserve(data.size() + vocab.source_ids().size() + vocab.target_ids().size() +
              extra_rows.size());
  auto push = [&out](double d) {
    if (d > 0.0) out.push_back(d);
  };
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data.labels[i] == class_index) continue;
    push(Distance(u, embedded.row(i).data(), dim));
  }
  for (int row : vocab.source_ids()) {
    if (row != self) push(Distance(u, vocab.prototype(row).data(), dim));
  }
  for (int row : vocab.target_ids()) push(Distance(u, vocab.prototype(row).data(), dim));
  for (int row : extra_rows) push(Distance(u, vocab.prototype(row).data(), dim));
  Require(!out.empty(), ErrorCode::kInvalidArgument,
          "margin samples: no foreign instances or prototypes for class '" + vocab.label(self) +
              "'");
  return out;
}

// Returns the within-class distances kept by the outlier filter and, via
// `nearest_foreign`, the smallest foreign instance distance (inf if none).
std::vector<double> CoverageSamplesEmbedded(int class_index, const RowMatrix& embedded,
                                            const LabeledFeatures& data,
                                            const SemanticVocabulary& vocab,
                                            double* nearest_foreign) {
  const int dim = vocab.dim();
  const int self = vocab.source_ids()[class_index];
  const double* u = vocab.prototype(self).data();
  double foreign = std::numeric_limits<double>::infinity();
  std::vector<double> within;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double d = Distance(u, embedded.row(i).data(), dim);
    if (data.labels[i] == class_index) {
      within.push_back(d);
    } else {
      foreign = std::min(foreign, d);
    }
  }
  Require(!within.empty(), ErrorCode::kInvalidArgument,
          "coverage samples: class '" + vocab.label(self) + "' has no training instances");
  std::vector<double> kept;
  for (double c : within) {
    if (c <= foreign) kept.push_back(c);
  }
  if (nearest_foreign) *nearest_foreign = foreign;
  return kept;
}

}  // namespace

std::vector<double> CollectMarginSamples(int class_index, const EmbeddingMatrix& w,
                                         const LabeledFeatures& data,
                                         const SemanticVocabulary& vocab,
                                         std::span<const int> extra_rows) {
  Require(class_index >= 0 && class_index < static_cast<int>(vocab.source_ids().size()),
          ErrorCode::kInvalidArgument, "class index out of range");
  return MarginSamplesEmbedded(class_index, EmbedAll(w, data), data, vocab, extra_rows);
}

std::vector<double> CollectCoverageSamples(int class_index, const EmbeddingMatrix& w,
                                           const LabeledFeatures& data,
                                           const SemanticVocabulary& vocab) {
  Require(class_index >= 0 && class_index < static_cast<int>(vocab.source_ids().size()),
          ErrorCode::kInvalidArgument, "class index out of range");
  return CoverageSamplesEmbedded(class_index, EmbedAll(w, data), data, vocab, nullptr);
}

ClassWeights ComputeAllWeights(const EmbeddingMatrix& w, const LabeledFeatures& data,
                               const SemanticVocabulary& vocab, const EvtConfig& cfg) {
  CheckSignificance(cfg.significance);
  Require(w.cols() == vocab.dim(), ErrorCode::kShape, "embedding: semantic dimension mismatch");
  const RowMatrix embedded = EmbedAll(w, data);
  const std::size_t classes = vocab.source_ids().size();
  Require(static_cast<int>(classes) == data.class_count, ErrorCode::kShape,
          "dataset class count does not match the vocabulary source set");

  std::vector<int> extra;
  if (cfg.open_vocab_sample > 0) {
    std::vector<char> in_split(vocab.size(), 0);
    for (int r : vocab.source_ids()) in_split[r] = 1;
    for (int r : vocab.target_ids()) in_split[r] = 1;
    std::vector<int> open;
    for (int r = 0; r < static_cast<int>(vocab.size()); ++r) {
      if (!in_split[r]) open.push_back(r);
    }
    const std::size_t cap = std::min<std::size_t>(
        {open.size(), static_cast<std::size_t>(cfg.open_vocab_sample),
         static_cast<std::size_t>(kOpenVocabSampleCap)});
    // Partial Fisher-Yates; sorted afterwards so the distance order is stable.
    Rng rng(cfg.seed);
    for (std::size_t i = 0; i < cap; ++i) {
      std::swap(open[i], open[i + rng.Below(open.size() - i)]);
    }
    extra.assign(open.begin(), open.begin() + cap);
    std::sort(extra.begin(), extra.end());
  }

  ClassWeights out = ClassWeights::Uniform(classes);
  ParallelFor(classes, 1, cfg.threads, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t c = begin; c < end; ++c) {
      ClassWeight& cw = out.classes[c];
      const int ci = static_cast<int>(c);
      const auto margin = MarginSamplesEmbedded(ci, embedded, data, vocab, extra);
      cw.margin_fit = FitWeibullOrStep(margin);
      double nearest_foreign = 0.0;
      const auto coverage = CoverageSamplesEmbedded(ci, embedded, data, vocab, &nearest_foreign);
      if (coverage.empty()) {
        cw.coverage_fit = {std::numeric_limits<double>::infinity(), nearest_foreign, true};
        cw.coverage_fallback = true;
      } else {
        // Instances sitting exactly on the prototype carry no spread.
        std::vector<double> positive;
        for (double d : coverage) {
          if (d > 0.0) positive.push_back(d);
        }
        cw.coverage_fit = positive.empty()
                              ? WeibullFit{std::numeric_limits<double>::infinity(), 0.0, true}
                              : FitWeibullOrStep(positive);
      }
      cw.margin_radius = MarginRadius(cw.margin_fit, cfg.significance);
      cw.coverage_radius =
          cw.coverage_fit.scale == 0.0 ? 0.0 : CoverageRadius(cw.coverage_fit, cfg.significance);
      cw.weight = cw.margin_radius + cw.coverage_radius;
    }
  });

  double total = 0.0;
  for (const auto& cw : out.classes) total += cw.weight;
  const double mean = total / static_cast<double>(classes);
  Require(std::isfinite(mean) && mean > 0.0, ErrorCode::kNumerical,
          "class weights: nonpositive mean radius");
  for (auto& cw : out.classes) cw.weight /= mean;
  return out;
}

}  // namespace wmvoc
