#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "knock/common.hpp"
#include "knock/features.hpp"
#include "knock/signal.hpp"

namespace knock {

enum class FeatureKind { raw, mfcc };

const char* to_string(FeatureKind kind);
FeatureKind feature_kind_from_string(const std::string& name);

/// Per-dimension standardization fitted on training data.
struct FeatureScaler {
  Vector mean;
  Vector stddev;  // floored at kMinStd

  static constexpr double kMinStd = 1e-8;
};

FeatureScaler fit_scaler(const std::vector<Vector>& train_features);
Vector apply_scaler(const FeatureScaler& scaler, const Vector& feature);

/// One-vs-rest linear SVM; row c of `weights` and entry c of `bias` score class c.
struct OvrLinearSvm {
  Matrix weights;  // classes x dim
  Vector bias;
  double lambda = 1e-4;
  FeatureKind feature_kind = FeatureKind::raw;

  int n_classes() const { return static_cast<int>(weights.rows()); }
  Eigen::Index dim() const { return weights.cols(); }
};

struct SvmOptions {
  double lambda = 1e-4;
  int epochs = 200;
  double lr0 = 0.1;
  double lr_decay = 0.01;  // lr(epoch) = lr0 / (1 + lr_decay * epoch)
  std::uint64_t seed = 1;
};

/// Minimizes, independently per class c,
///   (lambda/2)|w_c|^2 + mean_i max(0, 1 - y_i^c (w_c . x_i + b_c))
/// with per-sample SGD over a seeded shuffle each epoch.
OvrLinearSvm train_svm(const std::vector<Vector>& features, const std::vector<int>& labels,
                       const SvmOptions& options, FeatureKind kind = FeatureKind::raw);

/// Sum over classes of the regularized one-vs-rest hinge objective.
double svm_objective(const OvrLinearSvm& model, const std::vector<Vector>& features,
                     const std::vector<int>& labels);

struct SvmPrediction {
  int label = 0;
  Vector scores;
};

SvmPrediction svm_predict(const OvrLinearSvm& model, const Vector& feature);

/// Feature extraction, standardization and the SVM, applied to a window.
struct ShallowClassifier {
  FeatureKind feature_kind = FeatureKind::raw;
  MfccConfig mfcc{};
  FeatureScaler scaler;
  OvrLinearSvm svm;

  Vector features(const Vector& window) const;
  SvmPrediction predict(const Vector& window) const;
};

ShallowClassifier train_shallow(const LabeledDataset& windows, FeatureKind kind, const SvmOptions& options,
                                const MfccConfig& mfcc = {});

inline constexpr int kSvmFormatVersion = 1;

std::string svm_to_json(const ShallowClassifier& model);
ShallowClassifier svm_from_json(const std::string& text);
void save_svm(const ShallowClassifier& model, const std::filesystem::path& path);
ShallowClassifier load_svm(const std::filesystem::path& path);

}  // namespace knock
