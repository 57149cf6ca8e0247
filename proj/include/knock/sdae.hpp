#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "knock/common.hpp"
#include "knock/dae.hpp"
#include "knock/nn.hpp"
#include "knock/signal.hpp"

namespace knock {

/// Layer widths from input to classes, e.g. 500-200-200-200-30.
struct LayerLayout {
  std::vector<int> dims;

  LayerLayout() = default;
  explicit LayerLayout(std::vector<int> d);
  static LayerLayout from_hidden(int input_dim, const std::vector<int>& hidden, int n_classes);
  static LayerLayout parse(const std::string& text);

  int input_dim() const { return dims.front(); }
  int n_classes() const { return dims.back(); }
  std::vector<int> hidden() const { return {dims.begin() + 1, dims.end() - 1}; }
  std::string to_string() const;
  void validate() const;

  bool operator==(const LayerLayout&) const = default;
};

struct TrainConfig {
  int pretrain_epochs = 500;
  int finetune_epochs = 100;
  double pretrain_lr = 0.1;
  double finetune_lr = 0.1;
  double corruption_fraction = 0.25;
  int batch_size = 20;
  std::uint64_t seed = 1;

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

struct SdaeModel {
  std::vector<DenseLayer> encoders;  // tanh
  DenseLayer head;                   // softmax
  LayerLayout layout;
  TrainConfig config;
  std::vector<double> finetune_loss;  // per epoch, not persisted

  /// Encoder i output feeds encoder i+1; last encoder feeds the head; the
  /// head emits one score per class. Throws ShapeError otherwise.
  void check_chain() const;
  std::vector<DenseLayer> layers() const;
  std::vector<Activation> activations() const;
};

struct TrainingLogEntry {
  std::string phase;  // "pretrain" or "finetune"
  int layer = 0;      // 1-based for pretraining, 0 for fine-tuning
  int epoch = 0;      // 1-based
  double loss = 0.0;
};

using TrainingLog = std::vector<TrainingLogEntry>;

void write_training_log_csv(const std::filesystem::path& path, const TrainingLog& log);

struct StackPretrainResult {
  std::vector<DenseLayer> encoders;
  std::vector<std::vector<double>> loss_histories;
};

/// Receives the inputs each layer is pretrained on (layer index from 0).
using LayerInputObserver = std::function<void(std::size_t layer, const Matrix& inputs)>;

/// Greedy layer-wise pretraining: each hidden width gets a DAE trained on the
/// previous layer's codes, and its encoder maps the codes forward.
StackPretrainResult pretrain_stack(const std::vector<Vector>& inputs, const LayerLayout& layout,
                                   const TrainConfig& config,
                                   const LayerInputObserver& observer = {});

/// Attaches a fresh softmax head and runs supervised minibatch SGD on
/// cross-entropy through every layer, encoders included.
SdaeModel fine_tune(std::vector<DenseLayer> encoders, const LabeledDataset& dataset,
                    const LayerLayout& layout, const TrainConfig& config);

/// pretrain_stack on the dataset's inputs followed by fine_tune.
SdaeModel train_sdae(const LabeledDataset& dataset, const LayerLayout& layout,
                     const TrainConfig& config, TrainingLog* log = nullptr);

struct Prediction {
  int label = 0;
  Vector probs;
};

/// First index of the maximum.
int argmax(const Vector& v);

Prediction predict(const SdaeModel& model, const Vector& window);

inline constexpr int kModelFormatVersion = 1;

std::string model_to_json(const SdaeModel& model);
SdaeModel model_from_json(const std::string& text);
void save_model(const SdaeModel& model, const std::filesystem::path& path);
SdaeModel load_model(const std::filesystem::path& path);

}  // namespace knock
