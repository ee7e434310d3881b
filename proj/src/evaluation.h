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

#ifndef WMVOC_EVALUATION_H_
#define WMVOC_EVALUATION_H_

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "embedding.h"
#include "recognition.h"

namespace wmvoc {

// True when `predicted` is in the synset of `truth` (the label itself when
// no synset is registered).
bool IsCorrect(const SemanticVocabulary& vocab, int truth, int predicted);

// Fraction of instances whose truth synset meets the top-k prediction.
// Errors on length mismatch or when a prediction is shallower than k.
double TopKAccuracy(std::span<const Prediction> predictions, std::span<const int> truth,
                    const SemanticVocabulary& vocab, int k);

// 2ab / (a + b); 0 when either input is 0. Rates must lie in [0, 1];
// percentages are accepted when both inputs exceed 1 (and are at most 100)
// and the result is then a percentage too.
double HarmonicMean(double acc_u, double acc_s);

// Calibrated stacking input for one test instance: the nearest seen-class
// and nearest unseen-side candidates with their squared distances.
struct StackingInstance {
  int truth = 0;
  bool unseen = false;  // truth is not a source class
  int seen_pred = 0;
  double seen_dist = 0.0;
  int unseen_pred = 0;
  double unseen_dist = 0.0;
};

struct SeenUnseenPoint {
  double acc_unseen = 0.0;
  double acc_seen = 0.0;
};

struct AusucResult {
  double area = 0.0;
  // From gamma = -inf (seen side always wins) to gamma = +inf.
  std::vector<SeenUnseenPoint> curve;
};

// Sweeps the calibration offset gamma added to unseen-side scores
// (score = -distance + gamma [unseen]) through every value at which some
// instance's decision flips, and integrates seen accuracy over unseen
// accuracy with the trapezoid rule. Needs both seen and unseen instances.
AusucResult CalibratedStackingAusuc(std::span<const StackingInstance> instances,
                                    const SemanticVocabulary& vocab);

// Accuracies with a fixed calibration offset; ties go to the lower row.
SeenUnseenPoint AccuracyAtGamma(std::span<const StackingInstance> instances,
                                const SemanticVocabulary& vocab, double gamma);

// Builds stacking inputs for `candidates` (seen side = source rows,
// unseen side = the rest of the candidate set).
std::vector<StackingInstance> BuildStackingInstances(const EmbeddingMatrix& w,
                                                     const RowMatrix& features,
                                                     std::span<const int> truth,
                                                     const SemanticVocabulary& vocab,
                                                     const CandidateSet& candidates,
                                                     int threads = 1);

double Ausuc(const EmbeddingMatrix& w, const RowMatrix& features, std::span<const int> truth,
             const SemanticVocabulary& vocab, const CandidateSet& candidates, int threads = 1);

// N_e / N_un: share of unseen-class instances whose top-1 is a source class.
struct FalsePositiveCounts {
  std::size_t errors = 0;   // N_e
  std::size_t unseen = 0;   // N_un
  double rate = 0.0;
};
FalsePositiveCounts FalsePositiveRate(std::span<const Prediction> predictions,
                                      std::span<const int> truth,
                                      const SemanticVocabulary& vocab);

// 1 - sqrt(2 |W_s| / |W|); requires vocab_size >= 2 num_source.
double Openness(std::size_t num_source, std::size_t vocab_size);

struct SettingReport {
  Setting setting = Setting::kSupervised;
  std::size_t instances = 0;
  std::size_t candidates = 0;
  std::map<int, double> top_k;
  // Filled for gzsl and openset.
  std::optional<double> acc_u_to_t;
  std::optional<double> acc_s_to_t;
  std::optional<double> harmonic_mean;
  std::optional<double> ausuc;
  std::optional<double> fpr;
  std::size_t n_e = 0;
  std::size_t n_un = 0;
  std::optional<double> openness;
  // Rankings of the instances evaluated in this setting, in input order,
  // with the row indices of the test set they came from.
  std::vector<int> instance_rows;
  std::vector<int> truth;
  std::vector<Prediction> predictions;
  // Nearest seen/unseen candidates per instance (gzsl and openset).
  std::vector<StackingInstance> stacking;
};

struct EvalReport {
  std::vector<SettingReport> settings;
  // key = value lines echoed into the [config] section.
  std::vector<std::pair<std::string, std::string>> config;

  const SettingReport* Find(Setting s) const;
  // Structured text: a [config] section and one [setting.<name>] section
  // per setting, `key = value` per line.
  std::string ToText() const;
  // One line per instance per setting,
  //   <setting>\t<instance_index>\t<truth>\t<label>:<dist>...
  // followed, for gzsl and openset, by calibrated stacking inputs
  //   <setting>.stack\t<instance_index>\t<truth>\t<seen>:<dist>\t<unseen>:<dist>
  // Distances are printed with 17 significant digits.
  std::string PredictionDump(const SemanticVocabulary& vocab) const;
};

// Runs every requested setting over the test set. `truth` holds vocabulary
// rows. Supervised uses source-class instances, zsl target-class
// instances, gzsl and openset every instance.
EvalReport Evaluate(const EmbeddingMatrix& w, const RowMatrix& features,
                    std::span<const int> truth, const SemanticVocabulary& vocab,
                    std::span<const Setting> settings, std::span<const int> top_k,
                    int threads = 1);

// Prediction lines in the `predict` output format:
// <instance_index>\t<label1>:<dist1>\t... with 6-decimal distances.
std::string FormatPredictions(std::span<const Prediction> predictions,
                              const SemanticVocabulary& vocab);

}  // namespace wmvoc

#endif  // WMVOC_EVALUATION_H_
