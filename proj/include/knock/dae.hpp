#pragma once

#include <functional>
#include <vector>

#include "knock/common.hpp"
#include "knock/nn.hpp"

namespace knock {

/// One denoising autoencoder with untied encoder and decoder weights.
struct Dae {
  DenseLayer encoder;  // hidden x visible
  DenseLayer decoder;  // visible x hidden
  double corruption_fraction = 0.25;
  Activation decoder_activation = Activation::tanh;

  static Dae init(Eigen::Index visible, Eigen::Index hidden, double corruption_fraction, Rng& rng);

  Eigen::Index visible_dim() const { return encoder.in_dim(); }
  Eigen::Index hidden_dim() const { return encoder.out_dim(); }
  void validate() const;
};

struct CorruptedInput {
  Vector values;
  std::vector<bool> mask;  // true where the input was zeroed

  std::size_t masked_count() const;
};

/// Zeroes exactly round(fraction * n) positions drawn uniformly without
/// replacement. A zero count draws nothing from the engine.
CorruptedInput corrupt(const Vector& x, double fraction, Rng& rng);

/// Column-wise corruption of a batch, in place.
void corrupt_columns(Matrix& batch, double fraction, Rng& rng);

/// tanh(W x + b)
Vector encode(const Dae& dae, const Vector& x);
/// s(W' y + b'), s = decoder_activation
Vector decode(const Dae& dae, const Vector& y);

struct PretrainOptions {
  int epochs = 500;
  double lr = 0.1;
  int batch_size = 20;
};

struct PretrainResult {
  Dae dae;
  std::vector<double> loss_history;  // mean per-sample reconstruction MSE per epoch
};

/// Sees each minibatch as (corrupted forward input, clean reconstruction target).
using BatchObserver = std::function<void(const Matrix& corrupted, const Matrix& clean)>;

/// Per epoch: shuffle, then per minibatch corrupt each input, reconstruct
/// through encoder and decoder, take squared error against the clean input
/// and apply one SGD step to all four parameter blocks. Corruption is drawn
/// fresh every epoch. Throws DivergenceError on a non-finite epoch loss.
PretrainResult pretrain_layer(Dae dae, const std::vector<Vector>& inputs,
                              const PretrainOptions& options, Rng& rng,
                              const BatchObserver& observer = {});

/// Writes `epoch,mean_loss` rows (epochs numbered from 1).
void write_loss_history_csv(const std::string& path, const std::vector<double>& history);

}  // namespace knock
