#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "knock/eval.hpp"
#include "knock/features.hpp"
#include "knock/sdae.hpp"
#include "knock/signal.hpp"
#include "knock/svm.hpp"

namespace knock {

enum class Method { sdae, svm_raw, svm_mfcc };

const char* to_string(Method m);
Method method_from_string(const std::string& name);

/// Where the labeled windows come from: an in-memory synthetic corpus or a
/// `path,label` manifest of WAV files.
struct DatasetSource {
  std::string kind = "synthetic";  // "synthetic" | "manifest"
  int n_classes = 30;
  int trials_per_class = 120;
  std::uint64_t seed = 42;
  double noise_std = 0.01;
  std::filesystem::path manifest;
};

struct ExperimentConfig {
  Method method = Method::sdae;
  DatasetSource dataset;
  SplitSpec split;
  std::size_t window_length = kDefaultWindowLength;
  std::vector<int> hidden{200, 200, 200};
  TrainConfig train;
  SvmOptions svm;
  MfccConfig mfcc;
  int timing_repetitions = 5;

  void validate() const;
};

// JSON mirror of ExperimentConfig. Missing keys keep their defaults.
std::string config_to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Smallest protocol that still exercises every stage: 3 classes x 20
/// trials, 15/5 split, 50 pretraining and 100 fine-tuning epochs.
ExperimentConfig fast_profile(ExperimentConfig base);

CorpusDesign corpus_design(const ExperimentConfig& config);
LabeledDataset load_dataset(const ExperimentConfig& config);

using TrainedModel = std::variant<SdaeModel, ShallowClassifier>;

TrainedModel train_method(const ExperimentConfig& config, const LabeledDataset& train,
                          TrainingLog* log = nullptr);
PredictFn make_predictor(const TrainedModel& model);
std::size_t feature_dim(const TrainedModel& model);
void save_trained(const TrainedModel& model, const std::filesystem::path& path);
/// Dispatches on the file's "kind" field.
TrainedModel load_trained(const std::filesystem::path& path);

struct ExperimentReport {
  ExperimentConfig config;
  std::string method;
  double accuracy = 0.0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  int n_classes = 0;
  std::size_t feature_dim = 0;
  ConfusionMatrix confusion;
  TimingResult timing;
  double train_seconds = 0.0;
  // Content hashes of the windows fed to the method (before any feature
  // extraction); identical across methods for the same corpus and split.
  std::uint64_t train_input_hash = 0;
  std::uint64_t test_input_hash = 0;
};

ExperimentReport evaluate_model(const ExperimentConfig& config, const TrainedModel& model,
                                const LabeledDataset& test);

/// corpus -> split -> train -> evaluate + time.
ExperimentReport run_experiment(const ExperimentConfig& config);
/// Same, on an already loaded corpus.
ExperimentReport run_experiment(const ExperimentConfig& config, const LabeledDataset& corpus,
                                TrainedModel* trained = nullptr);

std::string report_to_json(const ExperimentReport& report);
void write_report(const std::filesystem::path& path, const ExperimentReport& report);

// --- parameter sweeps --------------------------------------------------------

struct SweepResult {
  std::string param;
  std::string value;
  std::vector<double> accuracies;  // one per repetition
  std::vector<double> seconds;
  double mean_accuracy = 0.0;
  double mean_seconds = 0.0;
};

const std::vector<std::string>& sweep_parameters();
/// Grid used for each parameter when none is given on the command line.
std::vector<std::string> default_sweep_values(const std::string& param);

/// Sets `param` to `value` in `config`. Throws InvalidArgument for unknown
/// parameters or unparsable values.
void apply_sweep_value(ExperimentConfig& config, const std::string& param, const std::string& value);

/// Runs `repetitions` seeds per value on one fixed corpus. Repetition r uses
/// training seed base + r. Jobs run on up to `jobs` threads; results are keyed
/// by (value, rep) so the output does not depend on scheduling.
std::vector<SweepResult> sweep(const ExperimentConfig& base, const std::string& param,
                               const std::vector<std::string>& values, int repetitions = 5,
                               int jobs = 1);

/// `param,value,rep,accuracy,seconds`; each value's per-rep rows are
/// followed by a row with rep = "mean".
void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepResult>& results);

/// `param,value,mean_accuracy,delta_vs_first`, one row per value.
void write_sweep_summary_csv(const std::filesystem::path& path, const std::vector<SweepResult>& results);

}  // namespace knock
