#pragma once

// Internal JSON helpers shared by the model, SVM and experiment codecs.

#include <string>

#include "json.hpp"
#include "knock/common.hpp"
#include "knock/nn.hpp"
#include "knock/sdae.hpp"

namespace knock::detail {

using json = nlohmann::json;

inline json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

inline Vector vector_from_json(const json& j, const char* what) {
  if (!j.is_array()) throw FormatError(std::string(what) + " must be an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw FormatError(std::string(what) + " holds a non-number");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

// W is stored row-major.
inline json layer_to_json(const DenseLayer& layer) {
  json w = json::array();
  for (Eigen::Index r = 0; r < layer.W.rows(); ++r)
    for (Eigen::Index c = 0; c < layer.W.cols(); ++c) w.push_back(layer.W(r, c));
  return json{{"rows", layer.W.rows()}, {"cols", layer.W.cols()}, {"W", std::move(w)},
              {"b", vector_to_json(layer.b)}};
}

inline DenseLayer layer_from_json(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  if (rows < 1 || cols < 1) throw ShapeError("layer declares a non-positive dimension");
  const Vector flat = vector_from_json(j.at("W"), "W");
  const Vector b = vector_from_json(j.at("b"), "b");
  if (flat.size() != rows * cols)
    throw ShapeError("layer declares " + std::to_string(rows) + "x" + std::to_string(cols) + " but stores " +
                     std::to_string(flat.size()) + " weights");
  if (b.size() != rows)
    throw ShapeError("layer declares " + std::to_string(rows) + " rows but stores a bias of length " +
                     std::to_string(b.size()));
  Matrix W(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) W(r, c) = flat[r * cols + c];
  return DenseLayer(std::move(W), b);
}

inline json train_config_to_json(const TrainConfig& c) {
  return json{{"pretrain_epochs", c.pretrain_epochs}, {"finetune_epochs", c.finetune_epochs},
              {"pretrain_lr", c.pretrain_lr},         {"finetune_lr", c.finetune_lr},
              {"corruption_fraction", c.corruption_fraction},
              {"batch_size", c.batch_size},           {"seed", c.seed}};
}

// Missing keys keep the values already in `c`.
inline void train_config_from_json(const json& j, TrainConfig& c) {
  if (!j.is_object()) throw FormatError("train_config must be an object");
  c.pretrain_epochs = j.value("pretrain_epochs", c.pretrain_epochs);
  c.finetune_epochs = j.value("finetune_epochs", c.finetune_epochs);
  c.pretrain_lr = j.value("pretrain_lr", c.pretrain_lr);
  c.finetune_lr = j.value("finetune_lr", c.finetune_lr);
  c.corruption_fraction = j.value("corruption_fraction", c.corruption_fraction);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.seed = j.value("seed", c.seed);
}

inline json parse_json(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string(what) + ": " + e.what());
  }
}

}  // namespace knock::detail
