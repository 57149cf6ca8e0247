#include "knock/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "json_util.hpp"
#include "knock/wav.hpp"

namespace knock {

using detail::json;

const char* to_string(Method m) {
  switch (m) {
    case Method::sdae: return "sdae";
    case Method::svm_raw: return "svm-raw";
    case Method::svm_mfcc: return "svm-mfcc";
  }
  return "?";
}

Method method_from_string(const std::string& name) {
  if (name == "sdae") return Method::sdae;
  if (name == "svm-raw") return Method::svm_raw;
  if (name == "svm-mfcc") return Method::svm_mfcc;
  throw InvalidArgument("unknown method '" + name + "' (expected sdae, svm-raw or svm-mfcc)");
}

void ExperimentConfig::validate() const {
  split.validate();
  train.validate();
  if (window_length < 1) throw InvalidArgument("window length must be positive");
  for (int h : hidden)
    if (h < 1) throw InvalidArgument("hidden widths must be positive");
  if (timing_repetitions < 1) throw InvalidArgument("timing repetitions must be at least 1");
  if (dataset.kind == "synthetic") {
    if (dataset.n_classes < 2 || dataset.trials_per_class < 2)
      throw InvalidArgument("synthetic corpus needs >= 2 classes and >= 2 trials per class");
    if (split.train_per_class + split.test_per_class > dataset.trials_per_class)
      throw InvalidArgument("split needs more trials per class than the corpus has");
  } else if (dataset.kind == "manifest") {
    if (dataset.manifest.empty()) throw InvalidArgument("manifest dataset needs a path");
  } else {
    throw InvalidArgument("unknown dataset source '" + dataset.kind + "'");
  }
}

namespace {

json svm_options_to_json(const SvmOptions& o) {
  return json{{"lambda", o.lambda}, {"epochs", o.epochs}, {"lr0", o.lr0}, {"lr_decay", o.lr_decay}, {"seed", o.seed}};
}

void svm_options_from_json(const json& j, SvmOptions& o) {
  o.lambda = j.value("lambda", o.lambda);
  o.epochs = j.value("epochs", o.epochs);
  o.lr0 = j.value("lr0", o.lr0);
  o.lr_decay = j.value("lr_decay", o.lr_decay);
  o.seed = j.value("seed", o.seed);
}

json config_json(const ExperimentConfig& c) {
  json dataset{{"source", c.dataset.kind}};
  if (c.dataset.kind == "manifest") {
    dataset["manifest"] = c.dataset.manifest.string();
  } else {
    dataset["n_classes"] = c.dataset.n_classes;
    dataset["trials_per_class"] = c.dataset.trials_per_class;
    dataset["seed"] = c.dataset.seed;
    dataset["noise_std"] = c.dataset.noise_std;
  }
  return json{{"method", to_string(c.method)},
              {"dataset", std::move(dataset)},
              {"split", {{"train_per_class", c.split.train_per_class}, {"test_per_class", c.split.test_per_class}}},
              {"window_length", c.window_length},
              {"hidden", c.hidden},
              {"train", detail::train_config_to_json(c.train)},
              {"svm", svm_options_to_json(c.svm)},
              {"timing_repetitions", c.timing_repetitions}};
}

ExperimentConfig config_from(const json& j) {
  if (!j.is_object()) throw FormatError("config must be a JSON object");
  ExperimentConfig c;
  try {
    if (j.contains("method")) c.method = method_from_string(j.at("method").get<std::string>());
    if (j.contains("dataset")) {
      const auto& d = j.at("dataset");
      c.dataset.kind = d.value("source", c.dataset.kind);
      c.dataset.n_classes = d.value("n_classes", c.dataset.n_classes);
      c.dataset.trials_per_class = d.value("trials_per_class", c.dataset.trials_per_class);
      c.dataset.seed = d.value("seed", c.dataset.seed);
      c.dataset.noise_std = d.value("noise_std", c.dataset.noise_std);
      if (d.contains("manifest")) c.dataset.manifest = d.at("manifest").get<std::string>();
    }
    if (j.contains("split")) {
      c.split.train_per_class = j.at("split").value("train_per_class", c.split.train_per_class);
      c.split.test_per_class = j.at("split").value("test_per_class", c.split.test_per_class);
    }
    c.window_length = j.value("window_length", c.window_length);
    if (j.contains("hidden")) c.hidden = j.at("hidden").get<std::vector<int>>();
    if (j.contains("train")) detail::train_config_from_json(j.at("train"), c.train);
    if (j.contains("svm")) svm_options_from_json(j.at("svm"), c.svm);
    c.timing_repetitions = j.value("timing_repetitions", c.timing_repetitions);
  } catch (const json::exception& e) {
    throw FormatError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

}  // namespace

std::string config_to_json(const ExperimentConfig& config) { return config_json(config).dump(2) + "\n"; }

ExperimentConfig config_from_json(const std::string& text) {
  return config_from(detail::parse_json(text, "config"));
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  ExperimentConfig c = config_from_json(ss.str());
  // Manifest paths in a config file are relative to that file.
  if (c.dataset.kind == "manifest" && c.dataset.manifest.is_relative())
    c.dataset.manifest = path.parent_path() / c.dataset.manifest;
  return c;
}

ExperimentConfig fast_profile(ExperimentConfig base) {
  base.dataset.kind = "synthetic";
  base.dataset.n_classes = 3;
  base.dataset.trials_per_class = 20;
  base.split = SplitSpec{15, 5};
  base.train.pretrain_epochs = 50;
  base.train.finetune_epochs = 100;
  return base;
}

CorpusDesign corpus_design(const ExperimentConfig& config) {
  CorpusDesign d;
  d.noise_std = config.dataset.noise_std;
  d.window_length = config.window_length;
  return d;
}

LabeledDataset load_dataset(const ExperimentConfig& config) {
  config.validate();
  if (config.dataset.kind == "manifest") return load_manifest_dataset(config.dataset.manifest, config.window_length);
  return synth_corpus(config.dataset.n_classes, config.dataset.trials_per_class, config.dataset.seed,
                      corpus_design(config));
}

TrainedModel train_method(const ExperimentConfig& config, const LabeledDataset& train, TrainingLog* log) {
  config.validate();
  switch (config.method) {
    case Method::sdae: {
      const auto layout = LayerLayout::from_hidden(static_cast<int>(config.window_length), config.hidden,
                                                   train.n_classes);
      return train_sdae(train, layout, config.train, log);
    }
    case Method::svm_raw: return train_shallow(train, FeatureKind::raw, config.svm, config.mfcc);
    case Method::svm_mfcc: return train_shallow(train, FeatureKind::mfcc, config.svm, config.mfcc);
  }
  throw InvalidArgument("unknown method");
}

PredictFn make_predictor(const TrainedModel& model) {
  if (const auto* sdae = std::get_if<SdaeModel>(&model))
    return [sdae](const Vector& x) { return predict(*sdae, x).label; };
  const auto* svm = std::get_if<ShallowClassifier>(&model);
  return [svm](const Vector& x) { return svm->predict(x).label; };
}

std::size_t feature_dim(const TrainedModel& model) {
  if (const auto* sdae = std::get_if<SdaeModel>(&model)) return static_cast<std::size_t>(sdae->layout.input_dim());
  return static_cast<std::size_t>(std::get<ShallowClassifier>(model).svm.dim());
}

void save_trained(const TrainedModel& model, const std::filesystem::path& path) {
  if (const auto* sdae = std::get_if<SdaeModel>(&model))
    save_model(*sdae, path);
  else
    save_svm(std::get<ShallowClassifier>(model), path);
}

TrainedModel load_trained(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  const json j = detail::parse_json(text, "model file");
  const std::string kind = j.is_object() ? j.value("kind", std::string()) : std::string();
  if (kind == "sdae") return model_from_json(text);
  if (kind == "svm") return svm_from_json(text);
  throw FormatError("model file " + path.string() + " has unknown kind '" + kind + "'");
}

ExperimentReport evaluate_model(const ExperimentConfig& config, const TrainedModel& model,
                                const LabeledDataset& test) {
  ExperimentReport r;
  r.config = config;
  r.method = std::holds_alternative<SdaeModel>(model)
                 ? "sdae"
                 : std::string("svm-") + to_string(std::get<ShallowClassifier>(model).feature_kind);
  const PredictFn fn = make_predictor(model);
  const EvalResult ev = evaluate(fn, test);
  r.accuracy = ev.accuracy;
  r.confusion = ev.confusion;
  r.n_test = test.size();
  r.n_classes = test.n_classes;
  r.feature_dim = feature_dim(model);
  r.timing = time_inference(fn, test, config.timing_repetitions);
  r.test_input_hash = test.content_hash();
  return r;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  return run_experiment(config, load_dataset(config));
}

ExperimentReport run_experiment(const ExperimentConfig& config, const LabeledDataset& corpus,
                                TrainedModel* trained) {
  config.validate();
  const DatasetSplit parts = split(corpus, config.split);
  const auto start = std::chrono::steady_clock::now();
  TrainedModel model = train_method(config, parts.train);
  const double train_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  ExperimentReport r = evaluate_model(config, model, parts.test);
  r.n_train = parts.train.size();
  r.train_seconds = train_seconds;
  r.train_input_hash = parts.train.content_hash();
  if (trained) *trained = std::move(model);
  return r;
}

namespace {

std::string hex(std::uint64_t v) {
  std::ostringstream ss;
  ss << std::hex << std::setw(16) << std::setfill('0') << v;
  return ss.str();
}

}  // namespace

std::string report_to_json(const ExperimentReport& r) {
  json confusion = json::array();
  for (int i = 0; i < r.confusion.n_classes(); ++i)
    confusion.push_back(detail::vector_to_json(r.confusion.rates.row(i).transpose()));
  json j{{"format_version", 1},
         {"method", r.method},
         {"accuracy", r.accuracy},
         {"n_train", r.n_train},
         {"n_test", r.n_test},
         {"n_classes", r.n_classes},
         {"feature_dim", r.feature_dim},
         {"timing", {{"min_seconds", r.timing.min_seconds},
                     {"max_seconds", r.timing.max_seconds},
                     {"repetitions", r.timing.repetitions}}},
         {"train_seconds", r.train_seconds},
         {"train_input_hash", hex(r.train_input_hash)},
         {"test_input_hash", hex(r.test_input_hash)},
         {"confusion", std::move(confusion)},
         {"config", config_json(r.config)}};
  return j.dump(2) + "\n";
}

void write_report(const std::filesystem::path& path, const ExperimentReport& report) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << report_to_json(report);
}

const std::vector<std::string>& sweep_parameters() {
  static const std::vector<std::string> params{"hidden_layers", "layout", "hidden_nodes", "pretrain_epochs",
                                               "finetune_epochs", "learning_rate", "denoising"};
  return params;
}

std::vector<std::string> default_sweep_values(const std::string& param) {
  if (param == "hidden_layers") return {"1", "2", "3", "4", "5"};
  if (param == "layout") return {"100-200-300", "100-100-100", "300-200-100"};
  if (param == "hidden_nodes") return {"100", "200", "300", "400"};
  if (param == "pretrain_epochs") return {"50", "100", "200", "500", "1000"};
  if (param == "finetune_epochs") return {"25", "50", "100", "200"};
  if (param == "learning_rate") return {"0.01", "0.1", "1"};
  if (param == "denoising") return {"0", "0.25"};
  throw InvalidArgument("unknown sweep parameter '" + param + "'");
}

namespace {

int parse_int(const std::string& v, const std::string& param) {
  try {
    std::size_t used = 0;
    const int x = std::stoi(v, &used);
    if (used == v.size()) return x;
  } catch (const std::exception&) {
  }
  throw InvalidArgument("sweep value '" + v + "' for " + param + " is not an integer");
}

double parse_double(const std::string& v, const std::string& param) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used == v.size()) return x;
  } catch (const std::exception&) {
  }
  throw InvalidArgument("sweep value '" + v + "' for " + param + " is not a number");
}

}  // namespace

void apply_sweep_value(ExperimentConfig& config, const std::string& param, const std::string& value) {
  if (param == "hidden_layers") {
    const int n = parse_int(value, param);
    if (n < 1) throw InvalidArgument("hidden_layers must be at least 1");
    const int width = config.hidden.empty() ? 200 : config.hidden.front();
    config.hidden.assign(static_cast<std::size_t>(n), width);
  } else if (param == "layout") {
    std::vector<int> dims = LayerLayout::parse(value).dims;
    // Accept either the hidden widths or the full input-...-classes layout.
    if (dims.size() >= 3 && dims.front() == static_cast<int>(config.window_length))
      dims = std::vector<int>(dims.begin() + 1, dims.end() - 1);
    config.hidden = dims;
  } else if (param == "hidden_nodes") {
    const int n = parse_int(value, param);
    if (n < 1) throw InvalidArgument("hidden_nodes must be at least 1");
    if (config.hidden.empty()) config.hidden.assign(3, n);
    for (int& h : config.hidden) h = n;
  } else if (param == "pretrain_epochs") {
    config.train.pretrain_epochs = parse_int(value, param);
  } else if (param == "finetune_epochs") {
    config.train.finetune_epochs = parse_int(value, param);
  } else if (param == "learning_rate") {
    config.train.pretrain_lr = parse_double(value, param);
  } else if (param == "denoising") {
    config.train.corruption_fraction = parse_double(value, param);
  } else {
    throw InvalidArgument("unknown sweep parameter '" + param + "'");
  }
  config.validate();
}

std::vector<SweepResult> sweep(const ExperimentConfig& base, const std::string& param,
                               const std::vector<std::string>& values, int repetitions, int jobs) {
  if (repetitions < 1) throw InvalidArgument("sweep needs at least one repetition");
  if (values.empty()) throw InvalidArgument("sweep needs at least one value");

  // Validate every grid point before spending any compute.
  std::vector<ExperimentConfig> configs;
  for (const auto& v : values) {
    ExperimentConfig c = base;
    apply_sweep_value(c, param, v);
    configs.push_back(std::move(c));
  }

  const LabeledDataset corpus = load_dataset(base);
  const std::size_t reps = static_cast<std::size_t>(repetitions);
  const std::size_t total = values.size() * reps;
  std::vector<double> accuracy(total, 0.0), seconds(total, 0.0);
  std::vector<std::exception_ptr> errors(total);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t job = next++; job < total; job = next++) {
      const std::size_t vi = job / reps;
      const std::size_t rep = job % reps;
      ExperimentConfig c = configs[vi];
      c.train.seed = base.train.seed + rep;
      c.svm.seed = base.svm.seed + rep;
      c.timing_repetitions = 1;
      const auto start = std::chrono::steady_clock::now();
      try {
        accuracy[job] = run_experiment(c, corpus).accuracy;
      } catch (const DivergenceError&) {
        accuracy[job] = std::numeric_limits<double>::quiet_NaN();
      } catch (...) {
        errors[job] = std::current_exception();
      }
      seconds[job] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
  };

  const int n_threads = std::max(1, std::min<int>(jobs, static_cast<int>(total)));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<SweepResult> results;
  for (std::size_t vi = 0; vi < values.size(); ++vi) {
    SweepResult r{param, values[vi], {}, {}, 0.0, 0.0};
    for (std::size_t rep = 0; rep < reps; ++rep) {
      r.accuracies.push_back(accuracy[vi * reps + rep]);
      r.seconds.push_back(seconds[vi * reps + rep]);
    }
    r.mean_accuracy = std::accumulate(r.accuracies.begin(), r.accuracies.end(), 0.0) / static_cast<double>(reps);
    r.mean_seconds = std::accumulate(r.seconds.begin(), r.seconds.end(), 0.0) / static_cast<double>(reps);
    results.push_back(std::move(r));
  }
  return results;
}

void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepResult>& results) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << "param,value,rep,accuracy,seconds\n" << std::setprecision(17);
  for (const auto& r : results) {
    for (std::size_t i = 0; i < r.accuracies.size(); ++i)
      out << r.param << ',' << r.value << ',' << i << ',' << r.accuracies[i] << ',' << r.seconds[i] << '\n';
    out << r.param << ',' << r.value << ",mean," << r.mean_accuracy << ',' << r.mean_seconds << '\n';
  }
}

void write_sweep_summary_csv(const std::filesystem::path& path, const std::vector<SweepResult>& results) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << "param,value,mean_accuracy,delta_vs_first\n" << std::setprecision(17);
  for (const auto& r : results)
    out << r.param << ',' << r.value << ',' << r.mean_accuracy << ','
        << r.mean_accuracy - results.front().mean_accuracy << '\n';
}

}  // namespace knock
