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

// Acceptance suite: one PASS/FAIL line per criterion.
//
//   wmvoc_acceptance [--only N] [--pilot] [--cli PATH] [--fixture PATH]
//
// --pilot reruns the vocabulary-gain comparison and prints a fresh fixture.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "evaluation.h"
#include "evt.h"
#include "loss.h"
#include "oracles.h"
#include "parallel.h"
#include "random.h"
#include "recognition.h"
#include "solver.h"
#include "synth.h"

namespace wmvoc {
namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Fmt(const char* format, ...) __attribute__((format(printf, 1, 2)));
std::string Fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

RowMatrix Gaussian(Rng& rng, int rows, int cols, double scale = 1.0) {
  RowMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = scale * rng.Normal();
  return m;
}

std::vector<std::string> Names(const std::string& prefix, int n) {
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

// A random training problem within the gradient-suite bounds.
struct Draw {
  SemanticVocabulary vocab;
  LabeledFeatures data;
  NeighborSets neighbors;
  ClassWeights weights;
  LossConfig cfg;
  Eigen::MatrixXd w;
};

Draw RandomDraw(Rng& rng) {
  Draw d;
  const int classes = 2 + static_cast<int>(rng.Below(4));
  const int targets = 1 + static_cast<int>(rng.Below(3));
  const int rows = classes + targets + static_cast<int>(rng.Below(6));
  const int dim = 2 + static_cast<int>(rng.Below(7));   // d <= 8
  const int p = 2 + static_cast<int>(rng.Below(9));     // p <= 10
  const int n = classes + static_cast<int>(rng.Below(21 - classes));  // N <= 20
  d.vocab = SemanticVocabulary(Names("w", rows), Gaussian(rng, rows, dim), rng.Uniform() < 0.7);
  std::vector<int> s, t;
  for (int i = 0; i < classes; ++i) s.push_back(i);
  for (int i = 0; i < targets; ++i) t.push_back(classes + i);
  d.vocab.SetClasses(s, t);
  d.data.features = Gaussian(rng, n, p, 0.5);
  d.data.class_count = classes;
  for (int i = 0; i < n; ++i) {
    d.data.labels.push_back(i < classes ? i : static_cast<int>(rng.Below(classes)));
  }
  const int k = static_cast<int>(rng.Below(4));  // A_V = B_S <= 3
  d.neighbors = BuildNeighborSets(d.vocab, k, k);
  d.weights = ClassWeights::Uniform(classes);
  for (auto& c : d.weights.classes) c.weight = 0.5 + rng.Uniform();
  d.cfg.alpha = rng.Uniform();
  d.cfg.lambda_reg = 0.1 * rng.Uniform();
  d.cfg.epsilon = 0.2 * rng.Uniform();
  d.cfg.margin_c = 2.0 * rng.Uniform();
  d.cfg.normalize_triplet = rng.Uniform() < 0.3;
  d.w = Gaussian(rng, p, dim, 0.5);
  return d;
}

Outcome HarmonicAnchor() {
  const double h = HarmonicMean(28.92, 70.20);
  return {std::abs(h - 40.96) <= 0.01, Fmt("H(28.92, 70.20) = %.4f", h)};
}

Outcome GradientSuite() {
  Rng rng(2024);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const Draw d = RandomDraw(rng);
    const Objective obj(d.data, d.vocab, d.neighbors, d.weights, d.cfg);
    const Eigen::MatrixXd g = obj.Evaluate(d.w).grad;
    const Eigen::MatrixXd fd =
        oracle::NumericGradient(d.w, d.data, d.vocab, d.neighbors, d.weights, d.cfg, 1e-6);
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      // Entries below 1e-3 in magnitude are compared on an absolute scale.
      const double scale = std::max({std::abs(g.data()[i]), std::abs(fd.data()[i]), 1e-3});
      worst = std::max(worst, std::abs(g.data()[i] - fd.data()[i]) / scale);
    }
  }
  return {worst < 1e-5, Fmt("max relative error %.3g over 20 draws", worst)};
}

Outcome ConvexitySuite() {
  Rng rng(77);
  double worst = -std::numeric_limits<double>::infinity();
  int failures = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Draw d = RandomDraw(rng);
    const Objective obj(d.data, d.vocab, d.neighbors, d.weights, d.cfg);
    const Eigen::MatrixXd a = Gaussian(rng, d.w.rows(), d.w.cols());
    const Eigen::MatrixXd b = Gaussian(rng, d.w.rows(), d.w.cols());
    const double mid = obj.Evaluate(0.5 * (a + b)).value;
    const double chord = 0.5 * (obj.Evaluate(a).value + obj.Evaluate(b).value);
    const double excess = mid - chord;
    worst = std::max(worst, excess);
    if (excess > 1e-9) ++failures;
  }
  return {failures == 0, Fmt("%d of 100 violations, largest excess %.3g", failures, worst)};
}

Outcome RidgeCollapse() {
  SynthSpec spec;
  spec.seed = 11;
  spec.n_source = 10;
  spec.n_target = 1;
  spec.n_distractors = 0;
  spec.d = 10;
  spec.p = 30;
  spec.instances_per_class = 20;
  spec.test_instances_per_class = 1;
  const SynthBenchmark b = GenerateBenchmark(spec);
  TrainConfig cfg;
  cfg.loss.alpha = 1.0;
  cfg.loss.epsilon = 0.0;
  cfg.loss.lambda_reg = 0.01;
  cfg.av_count = 0;
  cfg.bs_count = 0;
  cfg.solver.grad_tol = 1e-12;
  cfg.solver.max_iters = 1000;
  const TrainResult r = Train(b.train, b.vocab, cfg);
  const Eigen::MatrixXd ridge = oracle::RidgeSolution(b.train, b.vocab, 0.01);
  const double rel = (r.w - ridge).norm() / ridge.norm();
  return {rel < 1e-6,
          Fmt("relative Frobenius error %.3g on %zu x (p=30, d=10)", rel, b.train.size())};
}

Outcome EvtRecovery() {
  Rng rng(42);
  std::vector<double> x(500);
  for (double& v : x) v = 1.5 * std::pow(-std::log(rng.UniformOpen()), 0.5);
  const WeibullFit f = FitWeibullMin(x);
  const oracle::GridFit g = oracle::WeibullGrid(x);
  const bool shape_cell = std::abs(std::log(f.shape / g.shape)) <= std::log(g.shape_step);
  const bool scale_cell = std::abs(std::log(f.scale / g.scale)) <= std::log(g.scale_step);
  const bool within = std::abs(f.shape - g.shape) <= 0.15 * g.shape;
  const WeibullFit unit{1.0, 1.0, false};
  const double m = MarginRadius(unit, 0.05), c = CoverageRadius(unit, 0.05);
  const bool closed = std::abs(m - std::log(20.0)) <= 1e-12 &&
                      std::abs(c - std::log(20.0 / 19.0)) <= 1e-12;
  return {shape_cell && scale_cell && within && closed,
          Fmt("fit (%.4f, %.4f) vs grid (%.4f, %.4f); radii %.12f, %.12f", f.shape, f.scale,
              g.shape, g.scale, m, c)};
}

Outcome OneShotRule() {
  const std::vector<double> one = {0.8125};
  const WeibullFit f = FitWeibullMin(one);
  const double r = MarginRadius(f, 0.05);
  return {f.infinite_shape && std::isinf(f.shape) && f.scale == 0.8125 && r == 0.8125,
          Fmt("kappa = %g, lambda = %g, margin radius = %g", f.shape, f.scale, r)};
}

struct GainRow {
  uint64_t seed = 0;
  double full = 0.0;
  double ablation = 0.0;
};

double ZslTop1(const SynthBenchmark& b, const TrainConfig& cfg) {
  const TrainResult r = Train(b.train, b.vocab, cfg);
  const std::vector<Setting> zsl = {Setting::kZsl};
  const std::vector<int> k1 = {1};
  const EvalReport report = Evaluate(r.w, b.test.features, b.test.rows, b.vocab, zsl, k1);
  return report.settings[0].top_k.at(1);
}

std::vector<GainRow> RunGain() {
  std::vector<GainRow> rows;
  for (uint64_t seed = 0; seed < 10; ++seed) {
    SynthSpec spec;  // 10 source / 3 target, d=20, p=50, 30 per class, sigma 0.05
    spec.seed = seed;
    const SynthBenchmark b = GenerateBenchmark(spec);
    TrainConfig full;
    full.solver.seed = seed;
    full.evt.seed = seed;
    TrainConfig ablation = full;
    ablation.loss.alpha = 1.0;
    rows.push_back({seed, ZslTop1(b, full), ZslTop1(b, ablation)});
  }
  return rows;
}

struct GainFixture {
  std::map<uint64_t, GainRow> pilot;
  double floor = 0.0;
  bool loaded = false;
};

GainFixture LoadFixture(const std::string& path) {
  GainFixture f;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "floor") {
      ls >> f.floor;
    } else if (key == "seed") {
      GainRow r;
      ls >> r.seed >> r.full >> r.ablation;
      f.pilot[r.seed] = r;
    }
  }
  f.loaded = !f.pilot.empty();
  return f;
}

Outcome VocabularyGain(const std::string& fixture_path) {
  const GainFixture fixture = LoadFixture(fixture_path);
  if (!fixture.loaded) return {false, "fixture missing: " + fixture_path};
  const auto rows = RunGain();
  int wins = 0;
  double worst = std::numeric_limits<double>::infinity();
  double mean_full = 0.0;
  int drift = 0;
  for (const auto& r : rows) {
    const double diff = 100.0 * (r.full - r.ablation);
    if (diff > 0) ++wins;
    worst = std::min(worst, diff);
    mean_full += r.full / rows.size();
    const auto it = fixture.pilot.find(r.seed);
    if (it == fixture.pilot.end() || std::abs(it->second.full - r.full) > 1e-9 ||
        std::abs(it->second.ablation - r.ablation) > 1e-9) {
      ++drift;
    }
  }
  const bool pass = wins >= 8 && worst >= -2.0 && mean_full >= fixture.floor;
  return {pass, Fmt("wins %d/10, worst difference %+.2f points, mean ZSL top-1 %.4f "
                    "(floor %.4f), %d seeds differ from the pilot",
                    wins, worst, mean_full, fixture.floor, drift)};
}

int PrintPilot() {
  const auto rows = RunGain();
  double min_full = 1.0;
  std::printf("# Pilot run of the vocabulary-gain comparison: ZSL top-1 of the full\n");
  std::printf("# model and of the alpha = 1 ablation on the default synthetic spec.\n");
  std::printf("# floor is the smallest per-seed full-model accuracy of the pilot; the\n");
  std::printf("# acceptance check requires the mean over seeds to stay at or above it.\n");
  for (const auto& r : rows) {
    std::printf("seed %llu %.17g %.17g\n", static_cast<unsigned long long>(r.seed), r.full,
                r.ablation);
    min_full = std::min(min_full, r.full);
  }
  std::printf("floor %.17g\n", min_full);
  return 0;
}

Outcome SettingReduction() {
  SynthSpec spec;
  spec.seed = 3;
  const SynthBenchmark b = GenerateBenchmark(spec);
  const TrainResult r = Train(b.train, b.vocab, TrainConfig());
  // The class rows come first, so the restriction keeps class indices.
  std::vector<int> keep;
  for (int i = 0; i < spec.n_source + spec.n_target; ++i) keep.push_back(i);
  const SemanticVocabulary closed = b.vocab.Subset(keep);
  const std::vector<Setting> settings = {Setting::kGzsl, Setting::kOpenset};
  const std::vector<int> k = {1, 5};
  const EvalReport rep = Evaluate(r.w, b.test.features, b.test.rows, closed, settings, k);
  const SettingReport& g = rep.settings[0];
  const SettingReport& o = rep.settings[1];
  std::size_t mismatched = 0;
  for (std::size_t i = 0; i < g.predictions.size(); ++i) {
    const auto& a = g.predictions[i];
    const auto& c = o.predictions[i];
    if (a.ids != c.ids || a.distances != c.distances) ++mismatched;
  }
  const bool metrics = g.top_k == o.top_k && g.acc_u_to_t == o.acc_u_to_t &&
                       g.acc_s_to_t == o.acc_s_to_t && g.harmonic_mean == o.harmonic_mean &&
                       g.ausuc == o.ausuc && g.fpr == o.fpr;
  return {mismatched == 0 && metrics && g.predictions.size() == o.predictions.size(),
          Fmt("%zu of %zu rankings differ; metrics %s", mismatched, g.predictions.size(),
              metrics ? "identical" : "differ")};
}

Outcome ScaleTest() {
  constexpr int kRows = 310000;
  constexpr int kDim = 100;
  constexpr int kQueries = 1000;
  constexpr int kTop = 5;
  Rng rng(310);
  const RowMatrix table = Gaussian(rng, kRows, kDim);
  const RowMatrix queries = Gaussian(rng, kQueries, kDim);
  std::vector<int> ids(kRows);
  for (int i = 0; i < kRows; ++i) ids[i] = i;
  const int threads = std::max(4, DefaultThreadCount());

  const auto start = std::chrono::steady_clock::now();
  std::vector<std::vector<Neighbor>> got(kQueries);
  for (int q = 0; q < kQueries; ++q) got[q] = TopKScan(queries.row(q).data(), table, ids, kTop, threads);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  int mismatched = 0;
  for (int q = 0; q < kQueries; ++q) {
    const std::vector<double> query(queries.row(q).data(), queries.row(q).data() + kDim);
    const auto want = oracle::BruteForceKnn(query, table, kTop);
    bool same = want.size() == got[q].size();
    for (std::size_t i = 0; same && i < want.size(); ++i) {
      same = want[i].first == got[q][i].id &&
             std::abs(want[i].second - got[q][i].distance) <= 1e-9 * (1.0 + want[i].second);
    }
    if (!same) ++mismatched;
  }
  return {mismatched == 0 && seconds < 60.0,
          Fmt("%d of %d rankings differ; parallel scan %.1f s with %d threads (d=%d, k=%d)",
              mismatched, kQueries, seconds, threads, kDim, kTop)};
}

struct RunResult {
  int code = -1;
  std::string err;
};

RunResult Shell(const std::string& cmd, const std::string& err_path) {
  const int status = std::system((cmd + " >/dev/null 2>" + err_path).c_str());
  RunResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(err_path);
  r.err.assign(std::istreambuf_iterator<char>(in), {});
  return r;
}

std::string Slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

// Numeric `key = value` pairs per section of a report, config excluded.
std::map<std::string, double> ReportValues(const std::string& text) {
  std::map<std::string, double> out;
  std::istringstream in(text);
  std::string line, section;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] == '[') {
      section = line;
      continue;
    }
    const auto eq = line.find(" = ");
    if (eq == std::string::npos || section.empty() || section == "[config]") continue;
    out[section + line.substr(0, eq)] = std::stod(line.substr(eq + 3));
  }
  return out;
}

Outcome Determinism(const std::string& cli) {
  if (cli.empty()) return {false, "command-line tool path not given"};
  const std::string dir = (std::filesystem::temp_directory_path() /
                           ("wmvoc_accept_" + std::to_string(::getpid())))
                              .string();
  std::filesystem::create_directories(dir);
  const std::string err = dir + "/stderr";
  auto fail = [&](const std::string& what, const RunResult& r) {
    std::filesystem::remove_all(dir);
    return Outcome{false, what + " failed (exit " + std::to_string(r.code) + "): " + r.err};
  };
  RunResult r = Shell(cli + " gen-synth --seed 1 --out " + dir + "/data", err);
  if (r.code != 0) return fail("gen-synth", r);
  const std::string data = dir + "/data/";
  auto train = [&](const std::string& model, int threads) {
    return Shell(cli + " train --seed 1 --threads " + std::to_string(threads) + " --vocab " +
                     data + "vocab.txt --train-features " + data + "train.feat --train-labels " +
                     data + "train.labels --out " + model,
                 err);
  };
  auto eval = [&](const std::string& model, const std::string& report, int threads) {
    return Shell(cli + " eval --seed 1 --threads " + std::to_string(threads) + " --model " +
                     model + " --vocab " + data + "vocab.txt --test-features " + data +
                     "test.feat --test-labels " + data + "test.labels --target-classes " + data +
                     "target.classes --out " + report,
                 err);
  };
  const std::vector<std::pair<std::string, int>> runs = {
      {"a", 1}, {"b", 1}, {"c", 4}, {"d", 4}};
  for (const auto& [name, threads] : runs) {
    r = train(dir + "/" + name + ".bin", threads);
    if (r.code != 0) return fail("train", r);
    r = eval(dir + "/" + name + ".bin", dir + "/" + name + ".txt", threads);
    if (r.code != 0) return fail("eval", r);
  }
  const bool models_equal = Slurp(dir + "/a.bin") == Slurp(dir + "/b.bin") &&
                            !Slurp(dir + "/a.bin").empty();
  const auto base = ReportValues(Slurp(dir + "/a.txt"));
  const bool single_equal = ReportValues(Slurp(dir + "/b.txt")) == base;
  double worst = 0.0;
  bool keys_match = true;
  for (const char* name : {"c", "d"}) {
    const auto other = ReportValues(Slurp(dir + "/" + name + ".txt"));
    keys_match = keys_match && other.size() == base.size();
    for (const auto& [k, v] : base) {
      const auto it = other.find(k);
      if (it == other.end()) {
        keys_match = false;
        continue;
      }
      worst = std::max(worst, std::abs(it->second - v) / std::max(1.0, std::abs(v)));
    }
  }
  std::filesystem::remove_all(dir);
  return {models_equal && single_equal && keys_match && worst <= 1e-10 && !base.empty(),
          Fmt("single-threaded models %s, reports %s; threads=4 max deviation %.3g over %zu "
              "values",
              models_equal ? "bit-identical" : "differ", single_equal ? "equal" : "differ",
              worst, base.size())};
}

Outcome AusucCorrectness() {
  Rng rng(11);
  SemanticVocabulary v(Names("c", 4), Gaussian(rng, 4, 3));
  v.SetClasses({0, 1}, {2, 3});
  const Eigen::MatrixXd w = Gaussian(rng, 5, 3, 0.5);
  const RowMatrix x = Gaussian(rng, 20, 5);
  std::vector<int> truth;
  for (int i = 0; i < 20; ++i) truth.push_back(i % 4);
  std::vector<std::vector<double>> embedded;
  for (int i = 0; i < 20; ++i) embedded.push_back(oracle::Embed(w, x, i));
  const CandidateSet gzsl = MakeCandidates(v, Setting::kGzsl);
  const double exact = Ausuc(w, x, truth, v, gzsl);
  const double grid = oracle::DenseGridAusuc(embedded, truth, v, gzsl.ids, 100000);

  RowMatrix sep(8, 3);
  std::vector<int> sep_truth;
  for (int i = 0; i < 8; ++i) {
    sep_truth.push_back(i % 4);
    sep.row(i) = v.prototype(i % 4);
  }
  const double separable = Ausuc(Eigen::MatrixXd::Identity(3, 3), sep, sep_truth, v, gzsl);
  return {std::abs(exact - grid) <= 1e-3 && separable == 1.0,
          Fmt("exact %.6f vs dense grid %.6f; separable %.6f", exact, grid, separable)};
}

}  // namespace
}  // namespace wmvoc

int main(int argc, char** argv) {
  using namespace wmvoc;
  std::string cli = WMVOC_CLI_DEFAULT;
  std::string fixture = WMVOC_FIXTURE_DEFAULT;
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--pilot") return PrintPilot();
    if (arg == "--cli" && i + 1 < argc) {
      cli = argv[++i];
    } else if (arg == "--fixture" && i + 1 < argc) {
      fixture = argv[++i];
    } else if (arg == "--only" && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: %s [--only N] [--pilot] [--cli PATH] [--fixture PATH]\n",
                   argv[0]);
      return 2;
    }
  }

  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"harmonic mean anchor", HarmonicAnchor},
      {"gradient suite", GradientSuite},
      {"convexity suite", ConvexitySuite},
      {"ridge collapse", RidgeCollapse},
      {"EVT recovery", EvtRecovery},
      {"one-shot Weibull rule", OneShotRule},
      {"vocabulary-informed gain", [&] { return VocabularyGain(fixture); }},
      {"open-set reduction", SettingReduction},
      {"scale test", ScaleTest},
      {"determinism", [&] { return Determinism(cli); }},
      {"AUSUC correctness", AusucCorrectness},
  };
  int passed = 0, run = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (only != 0 && only != id) continue;
    ++run;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %2d %s  %s: %s (%.2f s)\n", id, o.pass ? "PASS" : "FAIL",
                criteria[i].first, o.detail.c_str(), seconds);
    std::fflush(stdout);
    if (o.pass) ++passed;
  }
  std::printf("acceptance: %d of %d criteria passed\n", passed, run);
  return passed == run ? 0 : 1;
}
