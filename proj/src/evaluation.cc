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

#include "evaluation.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <unordered_set>

#include "status.h"

namespace wmvoc {

bool IsCorrect(const SemanticVocabulary& vocab, int truth, int predicted) {
  if (predicted == truth) return true;
  const std::vector<int>* synset = vocab.Synset(truth);
  return synset != nullptr && std::find(synset->begin(), synset->end(), predicted) != synset->end();
}

double TopKAccuracy(std::span<const Prediction> predictions, std::span<const int> truth,
                    const SemanticVocabulary& vocab, int k) {
  Require(predictions.size() == truth.size(), ErrorCode::kInvalidArgument,
          "top-k accuracy: prediction and truth counts differ");
  Require(k >= 1, ErrorCode::kInvalidArgument, "k must be at least 1");
  Require(!truth.empty(), ErrorCode::kInvalidArgument, "top-k accuracy: no instances");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const auto& ids = predictions[i].ids;
    Require(ids.size() >= static_cast<std::size_t>(k), ErrorCode::kInvalidArgument,
            "top-k accuracy: k exceeds the ranked depth");
    for (int r = 0; r < k; ++r) {
      if (IsCorrect(vocab, truth[i], ids[r])) {
        ++hits;
        break;
      }
    }
  }
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

double HarmonicMean(double acc_u, double acc_s) {
  Require(std::isfinite(acc_u) && std::isfinite(acc_s) && acc_u >= 0.0 && acc_s >= 0.0,
          ErrorCode::kInvalidArgument, "harmonic mean: accuracies must be nonnegative");
  if (acc_u == 0.0 || acc_s == 0.0) return 0.0;
  const bool rates = acc_u <= 1.0 && acc_s <= 1.0;
  const bool percents = acc_u > 1.0 && acc_s > 1.0 && acc_u <= 100.0 && acc_s <= 100.0;
  Require(rates || percents, ErrorCode::kInvalidArgument,
          "harmonic mean: inputs must both be rates in [0, 1] or both percentages");
  return 2.0 * acc_u * acc_s / (acc_u + acc_s);
}

namespace {

// Unseen side wins when -du + gamma > -ds; exact ties go to the lower row.
bool UnseenWins(const StackingInstance& s, double gamma) {
  const double unseen_score = -s.unseen_dist + gamma;
  const double seen_score = -s.seen_dist;
  return unseen_score > seen_score || (unseen_score == seen_score && s.unseen_pred < s.seen_pred);
}

}  // namespace

SeenUnseenPoint AccuracyAtGamma(std::span<const StackingInstance> instances,
                                const SemanticVocabulary& vocab, double gamma) {
  std::size_t n_seen = 0, n_unseen = 0, ok_seen = 0, ok_unseen = 0;
  for (const auto& s : instances) {
    const int pred = UnseenWins(s, gamma) ? s.unseen_pred : s.seen_pred;
    const bool ok = IsCorrect(vocab, s.truth, pred);
    if (s.unseen) {
      ++n_unseen;
      ok_unseen += ok;
    } else {
      ++n_seen;
      ok_seen += ok;
    }
  }
  SeenUnseenPoint p;
  if (n_unseen > 0) p.acc_unseen = static_cast<double>(ok_unseen) / static_cast<double>(n_unseen);
  if (n_seen > 0) p.acc_seen = static_cast<double>(ok_seen) / static_cast<double>(n_seen);
  return p;
}

AusucResult CalibratedStackingAusuc(std::span<const StackingInstance> instances,
                                    const SemanticVocabulary& vocab) {
  std::size_t n_seen = 0, n_unseen = 0;
  for (const auto& s : instances) (s.unseen ? n_unseen : n_seen)++;
  Require(n_seen > 0 && n_unseen > 0, ErrorCode::kInvalidArgument,
          "AUSUC needs test instances from both seen and unseen classes");

  // Each instance switches from its seen to its unseen prediction once, at
  // gamma_i = unseen_dist - seen_dist.
  std::vector<double> flip(instances.size());
  long ok_seen = 0, ok_unseen = 0;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto& s = instances[i];
    flip[i] = s.unseen_dist - s.seen_dist;
    const bool ok = IsCorrect(vocab, s.truth, s.seen_pred);
    (s.unseen ? ok_unseen : ok_seen) += ok;
  }
  std::vector<std::size_t> order(instances.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return flip[a] < flip[b]; });

  const double ns = static_cast<double>(n_seen);
  const double nu = static_cast<double>(n_unseen);
  AusucResult res;
  res.curve.push_back({ok_unseen / nu, ok_seen / ns});
  for (std::size_t g = 0; g < order.size();) {
    std::size_t h = g;
    while (h < order.size() && flip[order[h]] == flip[order[g]]) {
      const auto& s = instances[order[h]];
      const long delta = static_cast<long>(IsCorrect(vocab, s.truth, s.unseen_pred)) -
                         static_cast<long>(IsCorrect(vocab, s.truth, s.seen_pred));
      (s.unseen ? ok_unseen : ok_seen) += delta;
      ++h;
    }
    res.curve.push_back({ok_unseen / nu, ok_seen / ns});
    g = h;
  }
  for (std::size_t i = 1; i < res.curve.size(); ++i) {
    const auto& a = res.curve[i - 1];
    const auto& b = res.curve[i];
    res.area += (b.acc_unseen - a.acc_unseen) * (a.acc_seen + b.acc_seen) * 0.5;
  }
  return res;
}

std::vector<StackingInstance> BuildStackingInstances(const EmbeddingMatrix& w,
                                                     const RowMatrix& features,
                                                     std::span<const int> truth,
                                                     const SemanticVocabulary& vocab,
                                                     const CandidateSet& candidates,
                                                     int threads) {
  Require(static_cast<Eigen::Index>(truth.size()) == features.rows(), ErrorCode::kInvalidArgument,
          "truth count does not match feature rows");
  std::vector<int> seen_ids, unseen_ids;
  for (int id : candidates.ids) (vocab.IsSource(id) ? seen_ids : unseen_ids).push_back(id);
  Require(!seen_ids.empty() && !unseen_ids.empty(), ErrorCode::kInvalidArgument,
          "calibrated stacking needs seen and unseen candidates");
  const auto seen = BatchClassify(w, features, BuildPrototypeTable(vocab, seen_ids), 1, threads);
  const auto unseen =
      BatchClassify(w, features, BuildPrototypeTable(vocab, unseen_ids), 1, threads);
  std::vector<StackingInstance> out(truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) {
    out[i] = {truth[i],           !vocab.IsSource(truth[i]),
              seen[i].ids[0],     seen[i].distances[0],
              unseen[i].ids[0],   unseen[i].distances[0]};
  }
  return out;
}

double Ausuc(const EmbeddingMatrix& w, const RowMatrix& features, std::span<const int> truth,
             const SemanticVocabulary& vocab, const CandidateSet& candidates, int threads) {
  const auto inst = BuildStackingInstances(w, features, truth, vocab, candidates, threads);
  return CalibratedStackingAusuc(inst, vocab).area;
}

FalsePositiveCounts FalsePositiveRate(std::span<const Prediction> predictions,
                                      std::span<const int> truth,
                                      const SemanticVocabulary& vocab) {
  Require(predictions.size() == truth.size(), ErrorCode::kInvalidArgument,
          "false positive rate: prediction and truth counts differ");
  FalsePositiveCounts c;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (vocab.IsSource(truth[i])) continue;
    ++c.unseen;
    Require(!predictions[i].ids.empty(), ErrorCode::kInvalidArgument, "empty prediction");
    if (vocab.IsSource(predictions[i].ids[0])) ++c.errors;
  }
  Require(c.unseen > 0, ErrorCode::kInvalidArgument,
          "false positive rate: no unseen-class test instances");
  c.rate = static_cast<double>(c.errors) / static_cast<double>(c.unseen);
  return c;
}

double Openness(std::size_t num_source, std::size_t vocab_size) {
  Require(vocab_size > 0 && vocab_size >= 2 * num_source, ErrorCode::kInvalidArgument,
          "openness: vocabulary must hold at least twice the source classes");
  return 1.0 - std::sqrt(2.0 * static_cast<double>(num_source) / static_cast<double>(vocab_size));
}

const SettingReport* EvalReport::Find(Setting s) const {
  for (const auto& r : settings) {
    if (r.setting == s) return &r;
  }
  return nullptr;
}

namespace {

std::string Num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string Pct(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", 100.0 * v);
  return buf;
}

void Rate(std::string& out, const char* key, const std::optional<double>& v) {
  if (!v) return;
  out += std::string(key) + " = " + Num(*v) + "\n";
  out += std::string(key) + "_pct = " + Pct(*v) + "\n";
}

}  // namespace

std::string EvalReport::ToText() const {
  std::string out = "# wmvoc evaluation report\nformat_version = 1\n";
  out += "\n[config]\n";
  for (const auto& [k, v] : config) out += k + " = " + v + "\n";
  for (const auto& r : settings) {
    out += "\n[setting." + std::string(SettingName(r.setting)) + "]\n";
    out += "instances = " + std::to_string(r.instances) + "\n";
    out += "candidates = " + std::to_string(r.candidates) + "\n";
    for (const auto& [k, acc] : r.top_k) {
      const std::string key = "top" + std::to_string(k);
      Rate(out, key.c_str(), acc);
    }
    Rate(out, "acc_u_to_t", r.acc_u_to_t);
    Rate(out, "acc_s_to_t", r.acc_s_to_t);
    Rate(out, "harmonic_mean", r.harmonic_mean);
    if (r.ausuc) out += "ausuc = " + Num(*r.ausuc) + "\n";
    if (r.fpr) {
      Rate(out, "fpr", r.fpr);
      out += "n_e = " + std::to_string(r.n_e) + "\n";
      out += "n_un = " + std::to_string(r.n_un) + "\n";
    }
    if (r.openness) out += "openness = " + Num(*r.openness) + "\n";
  }
  return out;
}

std::string FormatPredictions(std::span<const Prediction> predictions,
                              const SemanticVocabulary& vocab) {
  std::string out;
  char buf[64];
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    out += std::to_string(i);
    const auto& p = predictions[i];
    for (std::size_t r = 0; r < p.ids.size(); ++r) {
      std::snprintf(buf, sizeof(buf), ":%.6f", p.distances[r]);
      out += "\t" + vocab.label(p.ids[r]) + buf;
    }
    out += "\n";
  }
  return out;
}

std::string EvalReport::PredictionDump(const SemanticVocabulary& vocab) const {
  std::string out;
  auto entry = [&](int id, double dist) { return vocab.label(id) + ":" + Num(dist); };
  for (const auto& r : settings) {
    const std::string name = SettingName(r.setting);
    for (std::size_t i = 0; i < r.predictions.size(); ++i) {
      out += name + "\t" + std::to_string(r.instance_rows[i]) + "\t" + vocab.label(r.truth[i]);
      const auto& p = r.predictions[i];
      for (std::size_t k = 0; k < p.ids.size(); ++k) out += "\t" + entry(p.ids[k], p.distances[k]);
      out += "\n";
    }
    for (std::size_t i = 0; i < r.stacking.size(); ++i) {
      const auto& s = r.stacking[i];
      out += name + ".stack\t" + std::to_string(r.instance_rows[i]) + "\t" + vocab.label(s.truth) +
             "\t" + entry(s.seen_pred, s.seen_dist) + "\t" + entry(s.unseen_pred, s.unseen_dist) +
             "\n";
    }
  }
  return out;
}

EvalReport Evaluate(const EmbeddingMatrix& w, const RowMatrix& features,
                    std::span<const int> truth, const SemanticVocabulary& vocab,
                    std::span<const Setting> settings, std::span<const int> top_k, int threads) {
  Require(static_cast<Eigen::Index>(truth.size()) == features.rows(), ErrorCode::kInvalidArgument,
          "truth count does not match feature rows");
  Require(!top_k.empty(), ErrorCode::kConfig, "no top-k values requested");
  for (int k : top_k) Require(k >= 1, ErrorCode::kConfig, "top-k values must be positive");
  for (int t : truth) {
    Require(t >= 0 && t < static_cast<int>(vocab.size()), ErrorCode::kInvalidArgument,
            "truth label out of range");
  }
  const int max_k = *std::max_element(top_k.begin(), top_k.end());
  std::unordered_set<int> targets(vocab.target_ids().begin(), vocab.target_ids().end());

  EvalReport report;
  for (Setting setting : settings) {
    SettingReport r;
    r.setting = setting;
    const CandidateSet candidates = MakeCandidates(vocab, setting);
    Require(!candidates.ids.empty(), ErrorCode::kInvalidArgument,
            std::string("no candidates for setting ") + SettingName(setting));
    r.candidates = candidates.ids.size();

    for (std::size_t i = 0; i < truth.size(); ++i) {
      bool use = true;
      if (setting == Setting::kSupervised) use = vocab.IsSource(truth[i]);
      if (setting == Setting::kZsl) use = targets.count(truth[i]) > 0;
      if (use) r.instance_rows.push_back(static_cast<int>(i));
    }
    Require(!r.instance_rows.empty(), ErrorCode::kInvalidArgument,
            std::string("no test instances for setting ") + SettingName(setting));
    r.instances = r.instance_rows.size();
    RowMatrix x(static_cast<Eigen::Index>(r.instances), features.cols());
    for (std::size_t i = 0; i < r.instances; ++i) {
      x.row(static_cast<Eigen::Index>(i)) = features.row(r.instance_rows[i]);
      r.truth.push_back(truth[r.instance_rows[i]]);
    }

    const int depth = static_cast<int>(std::min<std::size_t>(max_k, r.candidates));
    r.predictions = BatchClassify(w, x, BuildPrototypeTable(vocab, candidates.ids), depth, threads);
    for (int k : top_k) {
      if (k <= depth) r.top_k[k] = TopKAccuracy(r.predictions, r.truth, vocab, k);
    }

    if (setting == Setting::kGzsl || setting == Setting::kOpenset) {
      std::vector<Prediction> seen_p, unseen_p;
      std::vector<int> seen_t, unseen_t;
      for (std::size_t i = 0; i < r.instances; ++i) {
        const bool unseen = !vocab.IsSource(r.truth[i]);
        (unseen ? unseen_p : seen_p).push_back(r.predictions[i]);
        (unseen ? unseen_t : seen_t).push_back(r.truth[i]);
      }
      if (!seen_t.empty()) r.acc_s_to_t = TopKAccuracy(seen_p, seen_t, vocab, 1);
      if (!unseen_t.empty()) {
        r.acc_u_to_t = TopKAccuracy(unseen_p, unseen_t, vocab, 1);
        const FalsePositiveCounts fp = FalsePositiveRate(r.predictions, r.truth, vocab);
        r.fpr = fp.rate;
        r.n_e = fp.errors;
        r.n_un = fp.unseen;
      }
      if (r.acc_s_to_t && r.acc_u_to_t) {
        r.harmonic_mean = HarmonicMean(*r.acc_u_to_t, *r.acc_s_to_t);
        bool has_seen = false, has_unseen = false;
        for (int id : candidates.ids) (vocab.IsSource(id) ? has_seen : has_unseen) = true;
        if (has_seen && has_unseen) {
          r.stacking = BuildStackingInstances(w, x, r.truth, vocab, candidates, threads);
          r.ausuc = CalibratedStackingAusuc(r.stacking, vocab).area;
        }
      }
      const std::size_t sources = vocab.source_ids().size();
      if (r.candidates >= 2 * sources) r.openness = Openness(sources, r.candidates);
    }
    report.settings.push_back(std::move(r));
  }
  return report;
}

}  // namespace wmvoc
