#pragma once

#include <filesystem>
#include <functional>
#include <utility>

#include "knock/common.hpp"
#include "knock/signal.hpp"

namespace knock {

/// Per-class chronological split: the first train_per_class trials of each
/// class go to training, the next test_per_class to testing.
struct SplitSpec {
  int train_per_class = 100;
  int test_per_class = 20;

  void validate() const;
};

struct DatasetSplit {
  LabeledDataset train;
  LabeledDataset test;
};

DatasetSplit split(const LabeledDataset& dataset, const SplitSpec& spec);

/// Row = ground truth, column = estimate. Rows are normalized to the
/// empirical distribution of predictions for that class; rows of classes with
/// no test samples stay zero.
struct ConfusionMatrix {
  Matrix rates;
  Eigen::MatrixXi counts;

  int n_classes() const { return static_cast<int>(rates.rows()); }
  /// Sum_c (test samples of c / total) * rates(c, c).
  double weighted_trace() const;
};

struct EvalResult {
  double accuracy = 0.0;
  std::size_t correct = 0;
  std::size_t total = 0;
  ConfusionMatrix confusion;
};

using PredictFn = std::function<int(const Vector&)>;

EvalResult evaluate(const PredictFn& predict, const LabeledDataset& test);

struct TimingResult {
  double min_seconds = 0.0;
  double max_seconds = 0.0;
  int repetitions = 0;
};

/// Wall-clock time of full passes of `predict` over the test set.
TimingResult time_inference(const PredictFn& predict, const LabeledDataset& test, int repetitions);

/// Header `truth,0,1,...,N-1`, one row per ground-truth class.
void write_confusion_csv(const std::filesystem::path& path, const ConfusionMatrix& confusion);

}  // namespace knock
