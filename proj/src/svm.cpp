#include "knock/svm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "json_util.hpp"

namespace knock {

using detail::json;

const char* to_string(FeatureKind kind) { return kind == FeatureKind::raw ? "raw" : "mfcc"; }

FeatureKind feature_kind_from_string(const std::string& name) {
  if (name == "raw") return FeatureKind::raw;
  if (name == "mfcc") return FeatureKind::mfcc;
  throw InvalidArgument("unknown feature kind '" + name + "'");
}

FeatureScaler fit_scaler(const std::vector<Vector>& train_features) {
  if (train_features.empty()) throw InvalidArgument("scaler needs a non-empty training set");
  const Eigen::Index d = train_features.front().size();
  FeatureScaler s{Vector::Zero(d), Vector::Zero(d)};
  for (const auto& f : train_features) {
    if (f.size() != d) throw ShapeError("features of differing dimension");
    s.mean += f;
  }
  const auto n = static_cast<double>(train_features.size());
  s.mean /= n;
  for (const auto& f : train_features) s.stddev += (f - s.mean).cwiseAbs2();
  s.stddev = (s.stddev / n).cwiseSqrt().cwiseMax(FeatureScaler::kMinStd);
  return s;
}

Vector apply_scaler(const FeatureScaler& scaler, const Vector& feature) {
  if (feature.size() != scaler.mean.size()) throw ShapeError("feature dimension does not match scaler");
  return (feature - scaler.mean).cwiseQuotient(scaler.stddev);
}

OvrLinearSvm train_svm(const std::vector<Vector>& features, const std::vector<int>& labels,
                       const SvmOptions& options, FeatureKind kind) {
  if (features.empty() || features.size() != labels.size())
    throw InvalidArgument("SVM training needs one label per feature vector");
  if (!(options.lambda >= 0.0) || !(options.lr0 > 0.0) || options.epochs < 0)
    throw InvalidArgument("invalid SVM options");
  const std::set<int> distinct(labels.begin(), labels.end());
  if (distinct.size() < 2) throw InvalidArgument("SVM training needs at least two classes");
  if (*distinct.begin() < 0) throw InvalidArgument("labels must be non-negative");

  const int n_classes = *distinct.rbegin() + 1;
  const Eigen::Index dim = features.front().size();
  for (const auto& f : features)
    if (f.size() != dim) throw ShapeError("features of differing dimension");

  OvrLinearSvm model{Matrix::Zero(n_classes, dim), Vector::Zero(n_classes), options.lambda, kind};
  Rng rng(derive_seed(options.seed, 7));
  std::vector<std::size_t> order(features.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Vector scores(n_classes);

  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    const double lr = options.lr0 / (1.0 + options.lr_decay * epoch);
    const double shrink = 1.0 - lr * options.lambda;
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i : order) {
      const Vector& x = features[i];
      scores.noalias() = model.weights * x;
      scores += model.bias;
      model.weights *= shrink;
      for (int c = 0; c < n_classes; ++c) {
        const double y = labels[i] == c ? 1.0 : -1.0;
        if (y * scores[c] < 1.0) {
          model.weights.row(c) += (lr * y) * x.transpose();
          model.bias[c] += lr * y;
        }
      }
    }
  }
  return model;
}

double svm_objective(const OvrLinearSvm& model, const std::vector<Vector>& features,
                     const std::vector<int>& labels) {
  if (features.empty() || features.size() != labels.size()) throw InvalidArgument("objective needs labeled data");
  double total = 0.5 * model.lambda * model.weights.squaredNorm();
  const auto n = static_cast<double>(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) {
    const Vector s = model.weights * features[i] + model.bias;
    for (int c = 0; c < model.n_classes(); ++c) {
      const double y = labels[i] == c ? 1.0 : -1.0;
      total += std::max(0.0, 1.0 - y * s[c]) / n;
    }
  }
  return total;
}

SvmPrediction svm_predict(const OvrLinearSvm& model, const Vector& feature) {
  if (feature.size() != model.dim())
    throw ShapeError("feature of dimension " + std::to_string(feature.size()) + " for an SVM expecting " +
                     std::to_string(model.dim()));
  SvmPrediction p;
  p.scores = model.weights * feature + model.bias;
  p.label = 0;
  for (Eigen::Index c = 1; c < p.scores.size(); ++c)
    if (p.scores[c] > p.scores[p.label]) p.label = static_cast<int>(c);
  return p;
}

Vector ShallowClassifier::features(const Vector& window) const {
  return feature_kind == FeatureKind::mfcc ? mfcc_feature(window, mfcc) : window;
}

SvmPrediction ShallowClassifier::predict(const Vector& window) const {
  return svm_predict(svm, apply_scaler(scaler, features(window)));
}

ShallowClassifier train_shallow(const LabeledDataset& windows, FeatureKind kind, const SvmOptions& options,
                                const MfccConfig& mfcc) {
  ShallowClassifier model;
  model.feature_kind = kind;
  model.mfcc = mfcc;
  std::vector<Vector> feats;
  feats.reserve(windows.size());
  for (const auto& e : windows.examples) feats.push_back(model.features(e.x));
  model.scaler = fit_scaler(feats);
  for (auto& f : feats) f = apply_scaler(model.scaler, f);
  model.svm = train_svm(feats, windows.labels(), options, kind);
  return model;
}

namespace {

json mfcc_to_json(const MfccConfig& c) {
  return json{{"sample_rate_hz", c.sample_rate_hz}, {"frame_len", c.frame_len}, {"hop", c.hop},
              {"n_fft", c.n_fft}, {"n_filters", c.n_filters}, {"n_ceps", c.n_ceps},
              {"log_floor", c.log_floor}};
}

MfccConfig mfcc_from_json(const json& j) {
  MfccConfig c;
  c.sample_rate_hz = j.at("sample_rate_hz").get<int>();
  c.frame_len = j.at("frame_len").get<std::size_t>();
  c.hop = j.at("hop").get<std::size_t>();
  c.n_fft = j.at("n_fft").get<std::size_t>();
  c.n_filters = j.at("n_filters").get<int>();
  c.n_ceps = j.at("n_ceps").get<int>();
  c.log_floor = j.at("log_floor").get<double>();
  return c;
}

}  // namespace

std::string svm_to_json(const ShallowClassifier& model) {
  json classes = json::array();
  for (int c = 0; c < model.svm.n_classes(); ++c)
    classes.push_back(json{{"w", detail::vector_to_json(model.svm.weights.row(c).transpose())},
                           {"b", model.svm.bias[c]}});
  json j{{"format_version", kSvmFormatVersion},
         {"kind", "svm"},
         {"feature_kind", to_string(model.feature_kind)},
         {"lambda", model.svm.lambda},
         {"scaler", json{{"mean", detail::vector_to_json(model.scaler.mean)},
                         {"std", detail::vector_to_json(model.scaler.stddev)}}},
         {"classes", std::move(classes)}};
  if (model.feature_kind == FeatureKind::mfcc) j["mfcc"] = mfcc_to_json(model.mfcc);
  return j.dump() + "\n";
}

ShallowClassifier svm_from_json(const std::string& text) {
  const json j = detail::parse_json(text, "SVM model file");
  try {
    const int version = j.at("format_version").get<int>();
    if (version != kSvmFormatVersion) throw VersionError("SVM format_version " + std::to_string(version));
    if (j.at("kind").get<std::string>() != "svm") throw FormatError("not an SVM model file");
    ShallowClassifier m;
    m.feature_kind = feature_kind_from_string(j.at("feature_kind").get<std::string>());
    m.svm.feature_kind = m.feature_kind;
    m.svm.lambda = j.at("lambda").get<double>();
    if (j.contains("mfcc")) m.mfcc = mfcc_from_json(j.at("mfcc"));
    m.scaler.mean = detail::vector_from_json(j.at("scaler").at("mean"), "scaler.mean");
    m.scaler.stddev = detail::vector_from_json(j.at("scaler").at("std"), "scaler.std");
    const auto& classes = j.at("classes");
    if (classes.size() < 2) throw FormatError("SVM file needs at least two classes");
    const Eigen::Index dim = m.scaler.mean.size();
    if (m.scaler.stddev.size() != dim) throw ShapeError("scaler mean/std length mismatch");
    m.svm.weights.resize(static_cast<Eigen::Index>(classes.size()), dim);
    m.svm.bias.resize(static_cast<Eigen::Index>(classes.size()));
    for (std::size_t c = 0; c < classes.size(); ++c) {
      const Vector w = detail::vector_from_json(classes[c].at("w"), "w");
      if (w.size() != dim) throw ShapeError("class " + std::to_string(c) + " weight length mismatch");
      m.svm.weights.row(static_cast<Eigen::Index>(c)) = w.transpose();
      m.svm.bias[static_cast<Eigen::Index>(c)] = classes[c].at("b").get<double>();
    }
    return m;
  } catch (const json::exception& e) {
    throw FormatError(std::string("SVM model file: ") + e.what());
  }
}

void save_svm(const ShallowClassifier& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << svm_to_json(model);
}

ShallowClassifier load_svm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return svm_from_json(ss.str());
}

}  // namespace knock
