#include "knock/sdae.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "json_util.hpp"

namespace knock {

using detail::json;

LayerLayout::LayerLayout(std::vector<int> d) : dims(std::move(d)) { validate(); }

LayerLayout LayerLayout::from_hidden(int input_dim, const std::vector<int>& hidden, int n_classes) {
  std::vector<int> d{input_dim};
  d.insert(d.end(), hidden.begin(), hidden.end());
  d.push_back(n_classes);
  return LayerLayout(std::move(d));
}

LayerLayout LayerLayout::parse(const std::string& text) {
  std::vector<int> d;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, '-')) {
    try {
      std::size_t used = 0;
      d.push_back(std::stoi(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw InvalidArgument("bad layout '" + text + "'");
    }
  }
  return LayerLayout(std::move(d));
}

std::string LayerLayout::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < dims.size(); ++i) out += (i ? "-" : "") + std::to_string(dims[i]);
  return out;
}

void LayerLayout::validate() const {
  if (dims.size() < 2) throw InvalidArgument("layout needs at least input and output widths");
  for (int d : dims)
    if (d < 1) throw InvalidArgument("layout widths must be positive");
}

void TrainConfig::validate() const {
  if (pretrain_epochs < 0 || finetune_epochs < 0) throw InvalidArgument("epochs must be non-negative");
  if (!(pretrain_lr > 0.0) || !(finetune_lr > 0.0)) throw InvalidArgument("learning rates must be positive");
  if (!(corruption_fraction >= 0.0 && corruption_fraction < 1.0))
    throw InvalidArgument("corruption fraction must lie in [0, 1)");
  if (batch_size < 1) throw InvalidArgument("batch size must be at least 1");
}

void SdaeModel::check_chain() const {
  layout.validate();
  if (encoders.size() + 2 != layout.dims.size())
    throw ShapeError("model has " + std::to_string(encoders.size()) + " encoders for layout " + layout.to_string());
  for (std::size_t i = 0; i < encoders.size(); ++i) {
    if (encoders[i].in_dim() != layout.dims[i] || encoders[i].out_dim() != layout.dims[i + 1])
      throw ShapeError("encoder " + std::to_string(i) + " does not match layout " + layout.to_string());
  }
  if (head.in_dim() != layout.dims[layout.dims.size() - 2] || head.out_dim() != layout.n_classes())
    throw ShapeError("classifier head does not match layout " + layout.to_string());
}

std::vector<DenseLayer> SdaeModel::layers() const {
  std::vector<DenseLayer> all = encoders;
  all.push_back(head);
  return all;
}

std::vector<Activation> SdaeModel::activations() const {
  std::vector<Activation> acts(encoders.size(), Activation::tanh);
  acts.push_back(Activation::softmax);
  return acts;
}

void write_training_log_csv(const std::filesystem::path& path, const TrainingLog& log) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << "phase,layer,epoch,loss\n" << std::setprecision(17);
  for (const auto& e : log) out << e.phase << ',' << e.layer << ',' << e.epoch << ',' << e.loss << '\n';
}

namespace {

// Stream ids for derive_seed.
constexpr std::uint64_t kFineTuneStream = 1;
constexpr std::uint64_t kPretrainStreamBase = 100;

}  // namespace

StackPretrainResult pretrain_stack(const std::vector<Vector>& inputs, const LayerLayout& layout,
                                   const TrainConfig& config, const LayerInputObserver& observer) {
  layout.validate();
  config.validate();
  if (inputs.empty()) throw InvalidArgument("pretraining needs at least one input");
  Matrix reps = to_columns(inputs);
  if (reps.rows() != layout.input_dim())
    throw ShapeError("windows of dimension " + std::to_string(reps.rows()) + " for layout " + layout.to_string());

  StackPretrainResult result;
  const auto hidden = layout.hidden();
  for (std::size_t i = 0; i < hidden.size(); ++i) {
    if (observer) observer(i, reps);
    Rng rng(derive_seed(config.seed, kPretrainStreamBase + i));
    Dae dae = Dae::init(reps.rows(), hidden[i], config.corruption_fraction, rng);

    std::vector<Vector> layer_inputs(static_cast<std::size_t>(reps.cols()));
    for (Eigen::Index c = 0; c < reps.cols(); ++c) layer_inputs[static_cast<std::size_t>(c)] = reps.col(c);

    PretrainOptions opts{config.pretrain_epochs, config.pretrain_lr, config.batch_size};
    auto trained = pretrain_layer(std::move(dae), layer_inputs, opts, rng);
    reps = activate(Activation::tanh, affine_forward(trained.dae.encoder, reps));
    result.encoders.push_back(std::move(trained.dae.encoder));
    result.loss_histories.push_back(std::move(trained.loss_history));
  }
  return result;
}

SdaeModel fine_tune(std::vector<DenseLayer> encoders, const LabeledDataset& dataset,
                    const LayerLayout& layout, const TrainConfig& config) {
  layout.validate();
  config.validate();
  if (dataset.empty()) throw InvalidArgument("fine-tuning needs a non-empty dataset");

  Rng rng(derive_seed(config.seed, kFineTuneStream));
  SdaeModel model;
  model.layout = layout;
  model.config = config;
  model.encoders = std::move(encoders);
  const int last = layout.dims[layout.dims.size() - 2];
  model.head = DenseLayer::glorot(layout.n_classes(), last, rng);
  model.check_chain();

  for (const auto& e : dataset.examples) {
    if (e.label < 0 || e.label >= layout.n_classes())
      throw InvalidArgument("label " + std::to_string(e.label) + " outside layout's " +
                            std::to_string(layout.n_classes()) + " classes");
    if (e.x.size() != layout.input_dim()) throw ShapeError("window dimension does not match layout");
  }
  if (config.finetune_epochs == 0) return model;

  std::vector<DenseLayer> layers = model.layers();
  const std::vector<Activation> acts = model.activations();
  const Matrix data = to_columns(dataset.inputs());
  const std::vector<int> labels = dataset.labels();
  const std::size_t n = dataset.size();
  const auto batch = static_cast<std::size_t>(config.batch_size);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Matrix x;
  std::vector<int> y;
  for (int epoch = 1; epoch <= config.finetune_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t count = std::min(batch, n - start);
      x.resize(data.rows(), static_cast<Eigen::Index>(count));
      y.resize(count);
      for (std::size_t j = 0; j < count; ++j) {
        x.col(static_cast<Eigen::Index>(j)) = data.col(static_cast<Eigen::Index>(order[start + j]));
        y[j] = labels[order[start + j]];
      }
      auto step = backprop(layers, acts, x, Target{y});
      total += step.loss * static_cast<double>(count);
      sgd_step(layers, step.grads, config.finetune_lr);
    }
    const double mean = total / static_cast<double>(n);
    if (!std::isfinite(mean)) throw DivergenceError("fine-tuning", epoch);
    model.finetune_loss.push_back(mean);
  }

  model.head = std::move(layers.back());
  layers.pop_back();
  model.encoders = std::move(layers);
  return model;
}

SdaeModel train_sdae(const LabeledDataset& dataset, const LayerLayout& layout, const TrainConfig& config,
                     TrainingLog* log) {
  auto stack = pretrain_stack(dataset.inputs(), layout, config);
  SdaeModel model = fine_tune(std::move(stack.encoders), dataset, layout, config);
  if (log) {
    for (std::size_t l = 0; l < stack.loss_histories.size(); ++l)
      for (std::size_t e = 0; e < stack.loss_histories[l].size(); ++e)
        log->push_back({"pretrain", static_cast<int>(l + 1), static_cast<int>(e + 1), stack.loss_histories[l][e]});
    for (std::size_t e = 0; e < model.finetune_loss.size(); ++e)
      log->push_back({"finetune", 0, static_cast<int>(e + 1), model.finetune_loss[e]});
  }
  return model;
}

int argmax(const Vector& v) {
  if (v.size() == 0) throw InvalidArgument("argmax of an empty vector");
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return static_cast<int>(best);
}

Prediction predict(const SdaeModel& model, const Vector& window) {
  if (window.size() != model.layout.input_dim())
    throw ShapeError("window of length " + std::to_string(window.size()) + " for a model expecting " +
                     std::to_string(model.layout.input_dim()));
  Vector a = window;
  for (const auto& enc : model.encoders) a = activate(Activation::tanh, affine_forward(enc, a));
  Prediction p;
  p.probs = activate(Activation::softmax, affine_forward(model.head, a));
  p.label = argmax(p.probs);
  return p;
}

std::string model_to_json(const SdaeModel& model) {
  model.check_chain();
  json encoders = json::array();
  for (const auto& e : model.encoders) encoders.push_back(detail::layer_to_json(e));
  json j{{"format_version", kModelFormatVersion},
         {"kind", "sdae"},
         {"layout", model.layout.dims},
         {"train_config", detail::train_config_to_json(model.config)},
         {"encoders", std::move(encoders)},
         {"head", detail::layer_to_json(model.head)}};
  return j.dump() + "\n";
}

SdaeModel model_from_json(const std::string& text) {
  const json j = detail::parse_json(text, "model file");
  try {
    if (!j.is_object()) throw FormatError("model file must hold a JSON object");
    const int version = j.at("format_version").get<int>();
    if (version != kModelFormatVersion)
      throw VersionError("model format_version " + std::to_string(version) + " (expected " +
                         std::to_string(kModelFormatVersion) + ")");
    if (j.value("kind", std::string("sdae")) != "sdae") throw FormatError("not an SDAE model file");
    SdaeModel m;
    m.layout = LayerLayout(j.at("layout").get<std::vector<int>>());
    detail::train_config_from_json(j.at("train_config"), m.config);
    for (const auto& e : j.at("encoders")) m.encoders.push_back(detail::layer_from_json(e));
    m.head = detail::layer_from_json(j.at("head"));
    m.check_chain();
    return m;
  } catch (const json::exception& e) {
    throw FormatError(std::string("model file: ") + e.what());
  }
}

void save_model(const SdaeModel& model, const std::filesystem::path& path) {
  const std::string text = model_to_json(model);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << text;
}

SdaeModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

}  // namespace knock
