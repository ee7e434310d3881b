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

// Command-line front end. Links only the public C interface.

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "wmvoc/wmvoc.h"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;

// Raised inside subcommands; carries the process exit code.
struct Exit {
  int code;
  std::string message;
};

void Check(wmv_status s, const std::string& context) {
  if (s != WMV_OK) throw Exit{wmv_exit_code(s), context + ": " + wmv_last_error()};
}

[[noreturn]] void Usage(const std::string& message) { throw Exit{kExitUsage, message}; }

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

std::vector<std::string> SplitList(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = Trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<std::string> ReadLines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Exit{kExitData, "cannot open '" + path + "'"};
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

std::vector<std::string> Distinct(const std::vector<std::string>& items) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& s : items) {
    if (seen.insert(s).second) out.push_back(s);
  }
  return out;
}

void WriteText(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw Exit{kExitData, "cannot write '" + path + "'"};
}

// A subcommand's settings keyed by config name (underscores). Every key is
// reachable as --key-with-dashes on the command line and as `key = value`
// in the --config file; the command line wins.
class Settings {
 public:
  explicit Settings(CLI::App* app) : app_(app) {}

  void Value(const std::string& key, const std::string& def, const std::string& help) {
    values_[key] = def;
    options_[key] = app_->add_option("--" + Dashed(key), values_[key], help)->default_str(def);
  }

  void Flag(const std::string& key, const std::string& help) {
    values_[key] = "false";
    options_[key] = app_->add_flag_function(
        "--" + Dashed(key), [this, key](std::int64_t) { values_[key] = "true"; }, help);
  }

  void Config() {
    values_["config"] = "";
    options_["config"] =
        app_->add_option("--config", values_["config"], "key = value file; flags take precedence");
  }

  // Fills every setting not given on the command line from --config.
  void ApplyConfigFile() {
    const std::string path = values_["config"];
    if (path.empty()) return;
    std::ifstream in(path);
    if (!in) Usage("cannot open config file '" + path + "'");
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = Trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      const std::string where = path + ":" + std::to_string(line_no) + ": ";
      if (eq == std::string::npos) Usage(where + "expected 'key = value'");
      std::string key = Trim(line.substr(0, eq));
      for (char& c : key) c = c == '-' ? '_' : c;
      const std::string value = Trim(line.substr(eq + 1));
      auto it = options_.find(key);
      if (it == options_.end() || key == "config") {
        Usage(where + "unknown key '" + key + "' for '" + app_->get_name() + "'");
      }
      if (it->second->count() == 0) values_[key] = value;
    }
  }

  const std::string& Get(const std::string& key) const { return values_.at(key); }
  bool On(const std::string& key) const {
    const std::string& v = Get(key);
    return v == "true" || v == "1" || v == "yes" || v == "on";
  }

  const std::string& Required(const std::string& key) const {
    const std::string& v = Get(key);
    if (v.empty()) Usage("missing required --" + Dashed(key) + " for '" + app_->get_name() + "'");
    return v;
  }

  int Int(const std::string& key) const {
    try {
      std::size_t used = 0;
      const int v = std::stoi(Get(key), &used);
      if (used == Get(key).size()) return v;
    } catch (const std::exception&) {
    }
    Usage("--" + Dashed(key) + " expects an integer, got '" + Get(key) + "'");
  }

  double Real(const std::string& key) const {
    try {
      std::size_t used = 0;
      const double v = std::stod(Get(key), &used);
      if (used == Get(key).size()) return v;
    } catch (const std::exception&) {
    }
    Usage("--" + Dashed(key) + " expects a number, got '" + Get(key) + "'");
  }

  // Effective configuration as `key = value` lines, sorted by key.
  std::string Echo() const {
    std::string out = "command = " + app_->get_name() + "\n";
    for (const auto& [k, v] : values_) {
      if (k != "config") out += k + " = " + v + "\n";
    }
    return out;
  }

  static std::string Dashed(std::string key) {
    for (char& c : key) c = c == '_' ? '-' : c;
    return key;
  }

 private:
  CLI::App* app_;
  std::map<std::string, std::string> values_;
  std::map<std::string, CLI::Option*> options_;
};

void AddShared(Settings& s, const char* out_help) {
  s.Config();
  s.Value("seed", "0", "random seed");
  s.Value("threads", "0", "worker threads (0 = hardware concurrency)");
  s.Value("out", "", out_help);
}

void AddVocab(Settings& s) {
  s.Value("vocab", "", "word-vector file");
  s.Value("vocab_format", "text", "text or binary");
  s.Flag("no_header", "vector file has no '<count> <dim>' header (GloVe text)");
  s.Flag("no_normalize", "keep prototype vectors unnormalized");
  s.Value("freq", "", "token frequency table for vocabulary pruning");
  s.Value("min_count", "300", "pruning lower bound");
  s.Value("max_count", "10000000", "pruning upper bound");
  s.Value("synsets", "", "synset file: '<label> <synonym> ...' per line");
  s.Value("source_classes", "", "source class labels, one per line");
  s.Value("target_classes", "", "target class labels, one per line");
}

struct VocabHandle {
  wmv_vocab* v = nullptr;
  ~VocabHandle() { wmv_vocab_free(v); }
};

void LoadVocab(const Settings& s, VocabHandle* out) {
  const std::string& fmt = s.Get("vocab_format");
  if (fmt != "text" && fmt != "binary") Usage("--vocab-format must be text or binary");
  Check(wmv_vocab_load(s.Required("vocab").c_str(),
                       fmt == "binary" ? WMV_VECTORS_BINARY : WMV_VECTORS_TEXT,
                       s.On("no_normalize") ? 0 : 1, s.On("no_header") ? 0 : 1, &out->v),
        "loading " + s.Get("vocab"));
  if (const std::size_t dups = wmv_vocab_duplicate_labels(out->v); dups > 0) {
    std::cerr << "warning: " << dups << " duplicate labels in " << s.Get("vocab")
              << " (last vector kept)\n";
  }
}

void SetClasses(wmv_vocab* v, const std::vector<std::string>& source,
                const std::vector<std::string>& target) {
  std::vector<const char*> src, tgt;
  for (const auto& l : source) src.push_back(l.c_str());
  for (const auto& l : target) tgt.push_back(l.c_str());
  Check(wmv_vocab_set_classes(v, src.data(), src.size(), tgt.data(), tgt.size()),
        "setting class lists");
}

// Pruning and synsets, applied once the class lists are known.
void FinishVocab(const Settings& s, wmv_vocab* v) {
  if (!s.Get("freq").empty()) {
    Check(wmv_vocab_prune(v, s.Get("freq").c_str(), std::stoll(s.Get("min_count")),
                          std::stoll(s.Get("max_count"))),
          "pruning vocabulary");
  }
  if (!s.Get("synsets").empty()) {
    Check(wmv_vocab_load_synsets(v, s.Get("synsets").c_str()), "loading synsets");
  }
}

std::vector<std::string> TargetsFrom(const Settings& s, const std::vector<std::string>& source,
                                     const std::vector<std::string>& labels) {
  if (!s.Get("target_classes").empty()) return ReadLines(s.Get("target_classes"));
  const std::set<std::string> src(source.begin(), source.end());
  std::vector<std::string> out;
  for (const auto& l : Distinct(labels)) {
    if (!src.count(l)) out.push_back(l);
  }
  return out;
}

std::vector<std::string> ModelSources(const wmv_model* m) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < wmv_model_class_count(m); ++i) {
    out.emplace_back(wmv_model_class_label(m, i));
  }
  return out;
}

struct Handles {
  VocabHandle vocab;
  wmv_model* model = nullptr;
  wmv_features* features = nullptr;
  wmv_options* options = nullptr;
  ~Handles() {
    wmv_model_free(model);
    wmv_features_free(features);
    wmv_options_free(options);
  }
};

const char* OptionHelp(const std::string& key) {
  static const std::map<std::string, const char*> help = {
      {"alpha", "data term share in [0, 1]; the rest goes to the triplet terms"},
      {"lambda", "Frobenius regularizer on W"},
      {"epsilon", "insensitive tube width of the data term"},
      {"margin_c", "triplet margin"},
      {"normalize_triplet", "divide each triplet term by its neighbor count"},
      {"av", "open-vocabulary neighbors per class"},
      {"bs", "source-class neighbors per class"},
      {"method", "lbfgs, sgd or hybrid"},
      {"max_iters", "iteration budget per weight round"},
      {"lbfgs_memory", "L-BFGS history length"},
      {"grad_tol", "stop when the gradient norm falls below this share of the initial one"},
      {"sgd_lr", "initial SGD learning rate"},
      {"sgd_lr_halve_every", "epochs between learning-rate halvings"},
      {"batch_size", "initial SGD batch size, doubled every epoch"},
      {"hybrid_switch_frac", "share of the budget spent in SGD before L-BFGS"},
      {"weight_rounds", "alternations of W minimization and class reweighting"},
      {"significance", "tail probability for the margin and coverage radii"},
      {"open_vocab_sample", "vocabulary rows sampled into the margin distances"},
  };
  const auto it = help.find(key);
  return it == help.end() ? "training option" : it->second;
}

std::vector<std::pair<std::string, std::string>> DefaultTrainOptions() {
  wmv_options* o = nullptr;
  Check(wmv_options_create(&o), "creating options");
  std::vector<std::pair<std::string, std::string>> out;
  std::stringstream ss(wmv_options_describe(o));
  wmv_options_free(o);
  std::string line;
  while (std::getline(ss, line)) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) out.emplace_back(Trim(line.substr(0, eq)), Trim(line.substr(eq + 1)));
  }
  return out;
}

int RunTrain(const Settings& s, const std::vector<std::pair<std::string, std::string>>& keys) {
  Handles h;
  const std::string& out = s.Required("out");
  const std::vector<std::string> train_labels = ReadLines(s.Required("train_labels"));
  LoadVocab(s, &h.vocab);
  const std::vector<std::string> source = s.Get("source_classes").empty()
                                              ? Distinct(train_labels)
                                              : ReadLines(s.Get("source_classes"));
  const std::vector<std::string> target =
      s.Get("target_classes").empty() ? std::vector<std::string>() : ReadLines(s.Get("target_classes"));
  SetClasses(h.vocab.v, source, target);
  FinishVocab(s, h.vocab.v);
  Check(wmv_features_load(h.vocab.v, s.Required("train_features").c_str(),
                          s.Get("train_labels").c_str(), &h.features),
        "loading training data");

  Check(wmv_options_create(&h.options), "creating options");
  for (const auto& [key, def] : keys) {
    Check(wmv_options_set(h.options, key.c_str(), s.Get(key).c_str()), "option --" + Settings::Dashed(key));
  }
  Check(wmv_options_validate(h.options), "configuration");
  Check(wmv_train(h.vocab.v, h.features, h.options, &h.model), "training");
  Check(wmv_model_save(h.model, out.c_str()), "saving model");

  std::string trace;
  std::stringstream echo(s.Echo());
  for (std::string line; std::getline(echo, line);) trace += "# " + line + "\n";
  trace += wmv_model_trace(h.model);
  const std::string trace_path = s.Get("trace").empty() ? out + ".trace" : s.Get("trace");
  WriteText(trace_path, trace);
  return 0;
}

std::vector<int> ParseTopK(const std::string& list) {
  std::vector<int> out;
  for (const auto& item : SplitList(list)) {
    try {
      std::size_t used = 0;
      const int k = std::stoi(item, &used);
      if (used == item.size() && k >= 1) {
        out.push_back(k);
        continue;
      }
    } catch (const std::exception&) {
    }
    Usage("--top-k expects positive integers, got '" + item + "'");
  }
  if (out.empty()) Usage("--top-k is empty");
  return out;
}

// Shared by eval and predict: loads model and vocabulary with the source
// classes taken from the model unless a class file overrides them.
void PrepareInference(const Settings& s, const std::vector<std::string>& test_labels, Handles* h) {
  Check(wmv_model_load(s.Required("model").c_str(), &h->model), "loading model");
  LoadVocab(s, &h->vocab);
  const std::vector<std::string> source = s.Get("source_classes").empty()
                                              ? ModelSources(h->model)
                                              : ReadLines(s.Get("source_classes"));
  SetClasses(h->vocab.v, source, TargetsFrom(s, source, test_labels));
  FinishVocab(s, h->vocab.v);
  if (s.On("restrict_vocab")) {
    Check(wmv_vocab_restrict_to_classes(h->vocab.v), "restricting vocabulary");
  }
  int same = 0;
  Check(wmv_model_check(h->model, h->vocab.v, &same), "model/vocabulary check");
  if (!same) std::cerr << "note: vocabulary differs from the training vocabulary\n";
}

int RunEval(const Settings& s) {
  Handles h;
  const std::vector<std::string> test_labels = ReadLines(s.Required("test_labels"));
  PrepareInference(s, test_labels, &h);
  Check(wmv_features_load(h.vocab.v, s.Required("test_features").c_str(),
                          s.Get("test_labels").c_str(), &h.features),
        "loading test data");
  const std::vector<std::string> settings = SplitList(s.Get("settings"));
  if (settings.empty()) Usage("--settings is empty");
  std::vector<const char*> names;
  for (const auto& n : settings) names.push_back(n.c_str());
  const std::vector<int> top_k = ParseTopK(s.Get("top_k"));

  wmv_report* report = nullptr;
  const wmv_status st = wmv_evaluate(h.model, h.vocab.v, h.features, names.data(), names.size(),
                                     top_k.data(), top_k.size(), s.Int("threads"),
                                     s.Echo().c_str(), &report);
  Check(st, "evaluation");
  try {
    WriteText(s.Get("out"), wmv_report_text(report));
    if (!s.Get("dump_predictions").empty()) {
      WriteText(s.Get("dump_predictions"), wmv_report_dump(report));
    }
  } catch (...) {
    wmv_report_free(report);
    throw;
  }
  wmv_report_free(report);
  return 0;
}

int RunPredict(const Settings& s) {
  Handles h;
  PrepareInference(s, {}, &h);
  Check(wmv_features_load(h.vocab.v, s.Required("features").c_str(), nullptr, &h.features),
        "loading features");
  wmv_predictions* preds = nullptr;
  Check(wmv_predict(h.model, h.vocab.v, h.features, s.Get("setting").c_str(), s.Int("k"),
                    s.Int("threads"), &preds),
        "prediction");
  const std::string text = wmv_predictions_text(preds);
  wmv_predictions_free(preds);
  WriteText(s.Get("out"), text);
  return 0;
}

int RunGenSynth(const Settings& s) {
  wmv_synth_spec spec;
  wmv_synth_spec_default(&spec);
  try {
    spec.seed = std::stoull(s.Get("seed"));
  } catch (const std::exception&) {
    Usage("--seed expects a nonnegative integer");
  }
  spec.n_source = s.Int("n_source");
  spec.n_target = s.Int("n_target");
  spec.n_distractors = s.Int("n_distractors");
  spec.d = s.Int("d");
  spec.p = s.Int("p");
  spec.instances_per_class = s.Int("instances_per_class");
  spec.test_instances_per_class = s.Int("test_instances_per_class");
  spec.noise_sigma = s.Real("noise_sigma");
  spec.map_condition = s.Real("map_condition");
  spec.min_angle_deg = s.Real("min_angle_deg");
  const std::string& fmt = s.Get("feature_format");
  if (fmt != "binary" && fmt != "csv") Usage("--feature-format must be binary or csv");
  Check(wmv_synth_generate(&spec, s.Required("out").c_str(), fmt == "binary" ? 1 : 0),
        "generating benchmark");
  return 0;
}

int RunFitEvt(const Settings& s) {
  const std::string& path = s.Required("input");
  std::vector<double> samples;
  int line_no = 0;
  for (const auto& raw : ReadLines(path)) {
    ++line_no;
    const std::string line = Trim(raw);
    if (line.empty() || line[0] == '#') continue;
    try {
      std::size_t used = 0;
      samples.push_back(std::stod(line, &used));
      if (used == line.size()) continue;
    } catch (const std::exception&) {
    }
    throw Exit{kExitData, path + ":" + std::to_string(line_no) + ": not a number"};
  }
  wmv_weibull_result r;
  Check(wmv_fit_weibull(samples.data(), samples.size(), s.Real("significance"), &r),
        "fitting " + path);
  auto num = [](double v) {
    char buf[32];
    return std::string(buf, std::to_chars(buf, buf + sizeof(buf), v).ptr);
  };
  const std::string text = "n = " + std::to_string(samples.size()) + "\nkappa = " + num(r.kappa) +
                           "\nlambda = " + num(r.lambda) + "\nmargin_radius = " +
                           num(r.margin_radius) + "\ncoverage_radius = " +
                           num(r.coverage_radius) + "\nsignificance = " +
                           num(s.Real("significance")) + "\n";
  WriteText(s.Get("out"), text);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vocabulary-informed embedding learning and open-set recognition"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  auto* train = app.add_subcommand("train", "Learn an embedding and class weights");
  auto* eval = app.add_subcommand("eval", "Evaluate a model on labeled test data");
  auto* predict = app.add_subcommand("predict", "Rank labels for unlabeled features");
  auto* gen = app.add_subcommand("gen-synth", "Write a seeded synthetic benchmark");
  auto* fit = app.add_subcommand("fit-evt", "Fit a Weibull distribution to distances");

  Settings st(train), se(eval), sp(predict), sg(gen), sf(fit);

  AddShared(st, "model file to write");
  AddVocab(st);
  st.Value("train_features", "", "training features (VIFM binary or CSV)");
  st.Value("train_labels", "", "training labels, one per line");
  st.Value("trace", "", "trace log path (default: <out>.trace)");
  std::vector<std::pair<std::string, std::string>> train_keys;
  for (const auto& [key, def] : DefaultTrainOptions()) {
    if (key == "seed" || key == "threads") continue;
    st.Value(key, def, OptionHelp(key));
    train_keys.emplace_back(key, def);
  }
  train_keys.emplace_back("seed", "0");
  train_keys.emplace_back("threads", "0");

  AddShared(se, "report path (default: stdout)");
  AddVocab(se);
  se.Value("model", "", "model file");
  se.Value("test_features", "", "test features");
  se.Value("test_labels", "", "test labels, one per line");
  se.Value("settings", "supervised,zsl,gzsl,openset", "comma-separated settings");
  se.Value("top_k", "1,5", "comma-separated k values");
  se.Value("dump_predictions", "", "write per-instance rankings here");
  se.Flag("restrict_vocab", "keep only source and target rows as the open vocabulary");

  AddShared(sp, "prediction path (default: stdout)");
  AddVocab(sp);
  sp.Value("model", "", "model file");
  sp.Value("features", "", "features to classify");
  sp.Value("setting", "openset", "supervised, zsl, gzsl or openset");
  sp.Value("k", "5", "labels per instance");
  sp.Flag("restrict_vocab", "keep only source and target rows as the open vocabulary");

  AddShared(sg, "output directory");
  {
    wmv_synth_spec d;
    wmv_synth_spec_default(&d);
    auto num = [](double v) {
      std::ostringstream o;
      o << v;
      return o.str();
    };
    sg.Value("n_source", std::to_string(d.n_source), "source classes");
    sg.Value("n_target", std::to_string(d.n_target), "target classes");
    sg.Value("n_distractors", std::to_string(d.n_distractors), "extra vocabulary rows");
    sg.Value("d", std::to_string(d.d), "semantic dimension");
    sg.Value("p", std::to_string(d.p), "feature dimension");
    sg.Value("instances_per_class", std::to_string(d.instances_per_class), "training instances per source class");
    sg.Value("test_instances_per_class", std::to_string(d.test_instances_per_class), "test instances per class");
    sg.Value("noise_sigma", num(d.noise_sigma), "feature noise standard deviation");
    sg.Value("map_condition", num(d.map_condition), "condition number of the generating map");
    sg.Value("min_angle_deg", num(d.min_angle_deg), "minimum angle between class prototypes");
    sg.Value("feature_format", "binary", "binary or csv");
  }

  AddShared(sf, "output path (default: stdout)");
  sf.Value("input", "", "file with one positive distance per line");
  sf.Value("significance", "0.05", "significance level for the radii");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (train->parsed()) {
      st.ApplyConfigFile();
      return RunTrain(st, train_keys);
    }
    if (eval->parsed()) {
      se.ApplyConfigFile();
      return RunEval(se);
    }
    if (predict->parsed()) {
      sp.ApplyConfigFile();
      return RunPredict(sp);
    }
    if (gen->parsed()) {
      sg.ApplyConfigFile();
      return RunGenSynth(sg);
    }
    if (fit->parsed()) {
      sf.ApplyConfigFile();
      return RunFitEvt(sf);
    }
  } catch (const Exit& e) {
    std::cerr << "error: " << e.message << "\n";
    return e.code;
  }
  return kExitUsage;
}
