#include "knock/eval.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <limits>

namespace knock {

void SplitSpec::validate() const {
  if (train_per_class < 1 || test_per_class < 1)
    throw InvalidArgument("split needs at least one train and one test trial per class");
}

DatasetSplit split(const LabeledDataset& dataset, const SplitSpec& spec) {
  spec.validate();
  if (dataset.n_classes < 1) throw InvalidArgument("dataset has no classes");
  std::vector<int> seen(static_cast<std::size_t>(dataset.n_classes), 0);
  DatasetSplit out;
  out.train.n_classes = out.test.n_classes = dataset.n_classes;
  for (const auto& e : dataset.examples) {
    if (e.label < 0 || e.label >= dataset.n_classes) throw InvalidArgument("label outside class range");
    int& k = seen[static_cast<std::size_t>(e.label)];
    if (k < spec.train_per_class)
      out.train.examples.push_back(e);
    else if (k < spec.train_per_class + spec.test_per_class)
      out.test.examples.push_back(e);
    ++k;
  }
  for (int c = 0; c < dataset.n_classes; ++c) {
    if (seen[static_cast<std::size_t>(c)] < spec.train_per_class + spec.test_per_class)
      throw InvalidArgument("class " + std::to_string(c) + " has " + std::to_string(seen[static_cast<std::size_t>(c)]) +
                            " trials, fewer than the " +
                            std::to_string(spec.train_per_class + spec.test_per_class) + " the split needs");
  }
  return out;
}

double ConfusionMatrix::weighted_trace() const {
  const double total = counts.sum();
  if (total == 0) return 0.0;
  double trace = 0.0;
  for (int c = 0; c < n_classes(); ++c) trace += counts.row(c).sum() / total * rates(c, c);
  return trace;
}

EvalResult evaluate(const PredictFn& predict, const LabeledDataset& test) {
  if (test.empty()) throw InvalidArgument("evaluation needs a non-empty test set");
  const int n = test.n_classes;
  EvalResult r;
  r.confusion.counts = Eigen::MatrixXi::Zero(n, n);
  for (const auto& e : test.examples) {
    const int guess = predict(e.x);
    if (guess < 0 || guess >= n) throw InvalidArgument("prediction outside class range");
    ++r.confusion.counts(e.label, guess);
    if (guess == e.label) ++r.correct;
  }
  r.total = test.size();
  r.accuracy = static_cast<double>(r.correct) / static_cast<double>(r.total);
  r.confusion.rates = Matrix::Zero(n, n);
  for (int c = 0; c < n; ++c) {
    const int row_total = r.confusion.counts.row(c).sum();
    if (row_total > 0) r.confusion.rates.row(c) = r.confusion.counts.row(c).cast<double>() / row_total;
  }
  return r;
}

TimingResult time_inference(const PredictFn& predict, const LabeledDataset& test, int repetitions) {
  if (repetitions < 1) throw InvalidArgument("timing needs at least one repetition");
  TimingResult t{std::numeric_limits<double>::infinity(), 0.0, repetitions};
  volatile int sink = 0;
  for (int r = 0; r < repetitions; ++r) {
    const auto start = std::chrono::steady_clock::now();
    for (const auto& e : test.examples) sink = sink + predict(e.x);
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    t.min_seconds = std::min(t.min_seconds, dt);
    t.max_seconds = std::max(t.max_seconds, dt);
  }
  return t;
}

void write_confusion_csv(const std::filesystem::path& path, const ConfusionMatrix& confusion) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << "truth";
  for (int c = 0; c < confusion.n_classes(); ++c) out << ',' << c;
  out << '\n' << std::setprecision(17);
  for (int r = 0; r < confusion.n_classes(); ++r) {
    out << r;
    for (int c = 0; c < confusion.n_classes(); ++c) out << ',' << confusion.rates(r, c);
    out << '\n';
  }
}

}  // namespace knock
