#include "knock/dae.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>

namespace knock {

Dae Dae::init(Eigen::Index visible, Eigen::Index hidden, double corruption_fraction, Rng& rng) {
  Dae dae;
  dae.encoder = DenseLayer::glorot(hidden, visible, rng);
  dae.decoder = DenseLayer::glorot(visible, hidden, rng);
  dae.corruption_fraction = corruption_fraction;
  dae.validate();
  return dae;
}

void Dae::validate() const {
  encoder.validate();
  decoder.validate();
  if (decoder.in_dim() != encoder.out_dim() || decoder.out_dim() != encoder.in_dim())
    throw ShapeError("decoder must map the hidden dimension back to the visible dimension");
  if (!(corruption_fraction >= 0.0 && corruption_fraction < 1.0))
    throw InvalidArgument("corruption fraction must lie in [0, 1)");
  if (decoder_activation == Activation::softmax)
    throw InvalidArgument("decoder activation must be tanh or identity");
}

std::size_t CorruptedInput::masked_count() const {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
}

namespace {

std::size_t masked_positions(Eigen::Index n, double fraction) {
  if (!(fraction >= 0.0 && fraction < 1.0)) throw InvalidArgument("corruption fraction must lie in [0, 1)");
  return static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
}

// Partial Fisher-Yates: the first k entries of `order` become a uniform
// k-subset of positions.
void choose_positions(std::vector<Eigen::Index>& order, std::size_t k, Rng& rng) {
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, order.size() - 1);
    std::swap(order[i], order[pick(rng)]);
  }
}

}  // namespace

CorruptedInput corrupt(const Vector& x, double fraction, Rng& rng) {
  const std::size_t k = masked_positions(x.size(), fraction);
  CorruptedInput out{x, std::vector<bool>(static_cast<std::size_t>(x.size()), false)};
  if (k == 0) return out;
  std::vector<Eigen::Index> order(static_cast<std::size_t>(x.size()));
  choose_positions(order, k, rng);
  for (std::size_t i = 0; i < k; ++i) {
    out.values[order[i]] = 0.0;
    out.mask[static_cast<std::size_t>(order[i])] = true;
  }
  return out;
}

void corrupt_columns(Matrix& batch, double fraction, Rng& rng) {
  const std::size_t k = masked_positions(batch.rows(), fraction);
  if (k == 0) return;
  std::vector<Eigen::Index> order(static_cast<std::size_t>(batch.rows()));
  for (Eigen::Index c = 0; c < batch.cols(); ++c) {
    choose_positions(order, k, rng);
    for (std::size_t i = 0; i < k; ++i) batch(order[i], c) = 0.0;
  }
}

Vector encode(const Dae& dae, const Vector& x) {
  return activate(Activation::tanh, affine_forward(dae.encoder, x));
}

Vector decode(const Dae& dae, const Vector& y) {
  return activate(dae.decoder_activation, affine_forward(dae.decoder, y));
}

PretrainResult pretrain_layer(Dae dae, const std::vector<Vector>& inputs,
                              const PretrainOptions& options, Rng& rng,
                              const BatchObserver& observer) {
  dae.validate();
  if (options.epochs < 0) throw InvalidArgument("epochs must be non-negative");
  if (options.batch_size < 1) throw InvalidArgument("batch size must be at least 1");
  PretrainResult result{std::move(dae), {}};
  if (options.epochs == 0) return result;
  if (inputs.empty()) throw InvalidArgument("pretraining needs at least one input");

  const Matrix data = to_columns(inputs);
  if (data.rows() != result.dae.visible_dim())
    throw ShapeError("inputs of dimension " + std::to_string(data.rows()) + " for a DAE with " +
                     std::to_string(result.dae.visible_dim()) + " visible units");

  std::vector<DenseLayer> layers{std::move(result.dae.encoder), std::move(result.dae.decoder)};
  const std::array<Activation, 2> acts{Activation::tanh, result.dae.decoder_activation};
  const auto n = static_cast<std::size_t>(data.cols());
  const auto batch = static_cast<std::size_t>(options.batch_size);

  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  Matrix clean, noisy;
  result.loss_history.reserve(static_cast<std::size_t>(options.epochs));

  for (int epoch = 1; epoch <= options.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t count = std::min(batch, n - start);
      clean.resize(data.rows(), static_cast<Eigen::Index>(count));
      for (std::size_t j = 0; j < count; ++j) clean.col(static_cast<Eigen::Index>(j)) = data.col(order[start + j]);
      noisy = clean;
      corrupt_columns(noisy, result.dae.corruption_fraction, rng);
      if (observer) observer(noisy, clean);

      auto step = backprop(layers, acts, noisy, Target{clean});
      total += step.loss * static_cast<double>(count);
      sgd_step(layers, step.grads, options.lr);
    }
    const double mean = total / static_cast<double>(n);
    if (!std::isfinite(mean)) throw DivergenceError("DAE pretraining", epoch);
    result.loss_history.push_back(mean);
  }

  result.dae.encoder = std::move(layers[0]);
  result.dae.decoder = std::move(layers[1]);
  return result;
}

void write_loss_history_csv(const std::string& path, const std::vector<double>& history) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << "epoch,mean_loss\n" << std::setprecision(17);
  for (std::size_t i = 0; i < history.size(); ++i) out << i + 1 << ',' << history[i] << '\n';
}

}  // namespace knock
