#pragma once

#include <span>
#include <variant>
#include <vector>

#include "knock/common.hpp"

namespace knock {

enum class Activation { tanh, identity, softmax };

const char* to_string(Activation a);
Activation activation_from_string(const std::string& name);

/// One affine stage: z = W x + b, W is out_dim x in_dim.
struct DenseLayer {
  Matrix W;
  Vector b;

  DenseLayer() = default;
  DenseLayer(Matrix weights, Vector bias);

  static DenseLayer zeros(Eigen::Index out_dim, Eigen::Index in_dim);
  /// Uniform in +-sqrt(6 / (fan_in + fan_out)), zero bias.
  static DenseLayer glorot(Eigen::Index out_dim, Eigen::Index in_dim, Rng& rng);

  Eigen::Index in_dim() const { return W.cols(); }
  Eigen::Index out_dim() const { return W.rows(); }
  void validate() const;
};

bool operator==(const DenseLayer& a, const DenseLayer& b);

Vector affine_forward(const DenseLayer& layer, const Vector& x);
/// Column-batched variant; each column of `inputs` is one sample.
Matrix affine_forward(const DenseLayer& layer, const Matrix& inputs);

Vector activate(Activation a, const Vector& z);
/// Softmax is applied per column.
Matrix activate(Activation a, const Matrix& z);

/// (1/n) sum (x_hat - x)^2
double mse_loss(const Vector& x_hat, const Vector& x);

inline constexpr double kCrossEntropyEps = 1e-12;
/// -log(probs[label] + 1e-12)
double cross_entropy_loss(const Vector& probs, int label);

struct GradientSet {
  std::vector<Matrix> dW;
  std::vector<Vector> db;

  std::size_t size() const { return dW.size(); }
};

/// Reconstruction targets (one column per sample, squared-error loss) or
/// class labels (softmax + cross-entropy loss).
using Target = std::variant<Matrix, std::vector<int>>;

struct LossAndGradients {
  double loss = 0.0;  // mean per-sample loss over the batch
  GradientSet grads;
};

/// Checks dimension chaining and that softmax only appears last.
void validate_network(std::span<const DenseLayer> layers, std::span<const Activation> activations);

Matrix forward(std::span<const DenseLayer> layers, std::span<const Activation> activations,
               const Matrix& inputs);

double batch_loss(std::span<const DenseLayer> layers, std::span<const Activation> activations,
                  const Matrix& inputs, const Target& target);

/// Reverse-mode gradients of the mean batch loss. Squared error pairs with a
/// tanh or identity output; cross-entropy requires a softmax output, whose
/// output delta is probs - one_hot(label).
LossAndGradients backprop(std::span<const DenseLayer> layers,
                          std::span<const Activation> activations, const Matrix& inputs,
                          const Target& target);

/// theta <- theta - lr * g
void sgd_step(std::span<DenseLayer> layers, const GradientSet& grads, double lr);

/// Max over all parameters of |g_a - g_n| / max(1e-8, |g_a| + |g_n|), with
/// g_n = (L(theta + eps) - L(theta - eps)) / 2 eps. The numeric side is an
/// independent long double forward pass, not a reuse of backprop's.
double grad_check(std::span<const DenseLayer> layers, std::span<const Activation> activations,
                  const Matrix& inputs, const Target& target, double eps = 1e-5);

/// A random network plus one batch of data, for gradient verification.
struct NetworkInstance {
  std::vector<DenseLayer> layers;
  std::vector<Activation> activations;
  Matrix inputs;
  Target target;
};

/// 1..max_layers tanh layers of width 1..max_width (Glorot weights, small
/// random biases). A classifier instance ends in softmax with cross-entropy
/// targets; otherwise the output is tanh with squared-error targets.
NetworkInstance random_instance(Rng& rng, int max_layers = 4, int max_width = 32, bool classifier = true,
                                int batch = 1);

/// Stacks column vectors into a dim x n matrix.
Matrix to_columns(std::span<const Vector> vectors);

}  // namespace knock
