#include "knock/nn.hpp"

#include <algorithm>
#include <cmath>

namespace knock {

const char* to_string(Activation a) {
  switch (a) {
    case Activation::tanh: return "tanh";
    case Activation::identity: return "identity";
    case Activation::softmax: return "softmax";
  }
  return "?";
}

Activation activation_from_string(const std::string& name) {
  if (name == "tanh") return Activation::tanh;
  if (name == "identity") return Activation::identity;
  if (name == "softmax") return Activation::softmax;
  throw InvalidArgument("unknown activation '" + name + "'");
}

DenseLayer::DenseLayer(Matrix weights, Vector bias) : W(std::move(weights)), b(std::move(bias)) {
  validate();
}

DenseLayer DenseLayer::zeros(Eigen::Index out_dim, Eigen::Index in_dim) {
  return DenseLayer(Matrix::Zero(out_dim, in_dim), Vector::Zero(out_dim));
}

DenseLayer DenseLayer::glorot(Eigen::Index out_dim, Eigen::Index in_dim, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(in_dim + out_dim));
  std::uniform_real_distribution<double> dist(-limit, limit);
  DenseLayer layer = zeros(out_dim, in_dim);
  // Row-major fill keeps the draw order independent of Eigen's storage order.
  for (Eigen::Index r = 0; r < out_dim; ++r)
    for (Eigen::Index c = 0; c < in_dim; ++c) layer.W(r, c) = dist(rng);
  return layer;
}

void DenseLayer::validate() const {
  if (W.rows() != b.size())
    throw ShapeError("layer has " + std::to_string(W.rows()) + " weight rows but bias of length " +
                     std::to_string(b.size()));
  if (!W.allFinite() || !b.allFinite()) throw InvalidArgument("layer parameters must be finite");
}

bool operator==(const DenseLayer& a, const DenseLayer& b) {
  return a.W.rows() == b.W.rows() && a.W.cols() == b.W.cols() && a.b.size() == b.b.size() &&
         a.W == b.W && a.b == b.b;
}

Vector affine_forward(const DenseLayer& layer, const Vector& x) {
  if (x.size() != layer.in_dim())
    throw ShapeError("input of length " + std::to_string(x.size()) + " for layer expecting " +
                     std::to_string(layer.in_dim()));
  Vector z = layer.b;
  z.noalias() += layer.W * x;
  return z;
}

Matrix affine_forward(const DenseLayer& layer, const Matrix& inputs) {
  if (inputs.rows() != layer.in_dim())
    throw ShapeError("input of dimension " + std::to_string(inputs.rows()) + " for layer expecting " +
                     std::to_string(layer.in_dim()));
  Matrix z(layer.out_dim(), inputs.cols());
  z.noalias() = layer.W * inputs;
  z.colwise() += layer.b;
  return z;
}

namespace {

void softmax_columns(Matrix& z) {
  for (Eigen::Index c = 0; c < z.cols(); ++c) {
    auto col = z.col(c);
    const double m = col.maxCoeff();
    col = (col.array() - m).exp().matrix();
    col /= col.sum();
  }
}

}  // namespace

Matrix activate(Activation a, const Matrix& z) {
  switch (a) {
    case Activation::tanh: return z.array().tanh().matrix();
    case Activation::identity: return z;
    case Activation::softmax: {
      Matrix out = z;
      softmax_columns(out);
      return out;
    }
  }
  return z;
}

Vector activate(Activation a, const Vector& z) {
  Matrix m = z;
  return activate(a, m).col(0);
}

double mse_loss(const Vector& x_hat, const Vector& x) {
  if (x_hat.size() != x.size()) throw ShapeError("mse_loss: length mismatch");
  if (x.size() == 0) return 0.0;
  return (x_hat - x).squaredNorm() / static_cast<double>(x.size());
}

double cross_entropy_loss(const Vector& probs, int label) {
  if (label < 0 || label >= probs.size())
    throw InvalidArgument("label " + std::to_string(label) + " out of range for " +
                          std::to_string(probs.size()) + " classes");
  return -std::log(probs[label] + kCrossEntropyEps);
}

void validate_network(std::span<const DenseLayer> layers, std::span<const Activation> activations) {
  if (layers.size() != activations.size())
    throw ShapeError("network needs one activation per layer");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    // Shapes only: finiteness is the trainer's concern (divergence detection).
    if (layers[i].W.rows() != layers[i].b.size())
      throw ShapeError("layer " + std::to_string(i) + " weight rows do not match bias length");
    if (i > 0 && layers[i].in_dim() != layers[i - 1].out_dim())
      throw ShapeError("layer " + std::to_string(i) + " expects " + std::to_string(layers[i].in_dim()) +
                       " inputs but previous layer emits " + std::to_string(layers[i - 1].out_dim()));
    if (activations[i] == Activation::softmax && i + 1 != layers.size())
      throw InvalidArgument("softmax is only allowed on the final layer");
  }
}

Matrix forward(std::span<const DenseLayer> layers, std::span<const Activation> activations,
               const Matrix& inputs) {
  validate_network(layers, activations);
  Matrix a = inputs;
  for (std::size_t i = 0; i < layers.size(); ++i) a = activate(activations[i], affine_forward(layers[i], a));
  return a;
}

namespace {

void check_target(std::span<const DenseLayer> layers, std::span<const Activation> activations,
                  const Matrix& inputs, const Target& target) {
  if (layers.empty()) throw ShapeError("network has no layers");
  const Activation out_act = activations.back();
  if (const auto* t = std::get_if<Matrix>(&target)) {
    if (out_act == Activation::softmax)
      throw InvalidArgument("squared-error loss needs a tanh or identity output");
    if (t->rows() != layers.back().out_dim() || t->cols() != inputs.cols())
      throw ShapeError("reconstruction target shape does not match network output");
  } else {
    const auto& labels = std::get<std::vector<int>>(target);
    if (out_act != Activation::softmax) throw InvalidArgument("cross-entropy loss needs a softmax output");
    if (static_cast<Eigen::Index>(labels.size()) != inputs.cols())
      throw ShapeError("one label per input column required");
    for (int l : labels)
      if (l < 0 || l >= layers.back().out_dim())
        throw InvalidArgument("label " + std::to_string(l) + " out of range");
  }
}

double loss_of_output(const Matrix& out, const Target& target) {
  const double batch = static_cast<double>(out.cols());
  if (const auto* t = std::get_if<Matrix>(&target))
    return (out - *t).squaredNorm() / (static_cast<double>(out.rows()) * batch);
  const auto& labels = std::get<std::vector<int>>(target);
  double total = 0.0;
  for (Eigen::Index c = 0; c < out.cols(); ++c)
    total += -std::log(out(labels[static_cast<std::size_t>(c)], c) + kCrossEntropyEps);
  return total / batch;
}

}  // namespace

double batch_loss(std::span<const DenseLayer> layers, std::span<const Activation> activations,
                  const Matrix& inputs, const Target& target) {
  check_target(layers, activations, inputs, target);
  return loss_of_output(forward(layers, activations, inputs), target);
}

LossAndGradients backprop(std::span<const DenseLayer> layers,
                          std::span<const Activation> activations, const Matrix& inputs,
                          const Target& target) {
  validate_network(layers, activations);
  check_target(layers, activations, inputs, target);
  const std::size_t depth = layers.size();

  // outputs[i] is the post-activation output of layer i; outputs[-1] = inputs.
  std::vector<Matrix> outputs(depth);
  for (std::size_t i = 0; i < depth; ++i)
    outputs[i] = activate(activations[i], affine_forward(layers[i], i == 0 ? inputs : outputs[i - 1]));

  LossAndGradients result;
  const Matrix& out = outputs.back();
  result.loss = loss_of_output(out, target);

  const double batch = static_cast<double>(inputs.cols());
  Matrix delta;
  if (const auto* t = std::get_if<Matrix>(&target)) {
    delta = (2.0 / (static_cast<double>(out.rows()) * batch)) * (out - *t);
    if (activations.back() == Activation::tanh) delta.array() *= 1.0 - out.array().square();
  } else {
    delta = out;
    const auto& labels = std::get<std::vector<int>>(target);
    for (Eigen::Index c = 0; c < out.cols(); ++c) delta(labels[static_cast<std::size_t>(c)], c) -= 1.0;
    delta /= batch;
  }

  result.grads.dW.resize(depth);
  result.grads.db.resize(depth);
  for (std::size_t i = depth; i-- > 0;) {
    const Matrix& below = i == 0 ? inputs : outputs[i - 1];
    result.grads.dW[i].noalias() = delta * below.transpose();
    result.grads.db[i] = delta.rowwise().sum();
    if (i == 0) break;
    Matrix next(layers[i].in_dim(), delta.cols());
    next.noalias() = layers[i].W.transpose() * delta;
    if (activations[i - 1] == Activation::tanh) next.array() *= 1.0 - below.array().square();
    delta = std::move(next);
  }
  return result;
}

void sgd_step(std::span<DenseLayer> layers, const GradientSet& grads, double lr) {
  if (!(lr > 0.0)) throw InvalidArgument("learning rate must be positive");
  if (grads.dW.size() != layers.size() || grads.db.size() != layers.size())
    throw ShapeError("gradient set does not match parameter set");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (grads.dW[i].rows() != layers[i].W.rows() || grads.dW[i].cols() != layers[i].W.cols() ||
        grads.db[i].size() != layers[i].b.size())
      throw ShapeError("gradient shape mismatch at layer " + std::to_string(i));
    layers[i].W.noalias() -= lr * grads.dW[i];
    layers[i].b.noalias() -= lr * grads.db[i];
  }
}

namespace {

// The finite-difference side of grad_check runs in extended precision so
// that cancellation in L(theta + eps) - L(theta - eps) stays far below the
// analytic gradient's own rounding error.
using WideMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

struct WideLayer {
  WideMatrix W;
  WideMatrix b;  // column vector
};

long double wide_loss(const std::vector<WideLayer>& layers, std::span<const Activation> activations,
                      const WideMatrix& inputs, const Target& target) {
  WideMatrix a = inputs;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    WideMatrix z = layers[i].W * a;
    z.colwise() += layers[i].b.col(0);
    switch (activations[i]) {
      case Activation::tanh: a = z.array().tanh().matrix(); break;
      case Activation::identity: a = std::move(z); break;
      case Activation::softmax:
        for (Eigen::Index c = 0; c < z.cols(); ++c) {
          auto col = z.col(c);
          const long double m = col.maxCoeff();
          col = (col.array() - m).exp().matrix();
          col /= col.sum();
        }
        a = std::move(z);
        break;
    }
  }
  const auto batch = static_cast<long double>(a.cols());
  if (const auto* t = std::get_if<Matrix>(&target))
    return (a - t->cast<long double>()).squaredNorm() / (static_cast<long double>(a.rows()) * batch);
  const auto& labels = std::get<std::vector<int>>(target);
  long double total = 0.0L;
  for (Eigen::Index c = 0; c < a.cols(); ++c)
    total += -std::log(a(labels[static_cast<std::size_t>(c)], c) + static_cast<long double>(kCrossEntropyEps));
  return total / batch;
}

}  // namespace

double grad_check(std::span<const DenseLayer> layers, std::span<const Activation> activations,
                  const Matrix& inputs, const Target& target, double eps) {
  if (!(eps > 0.0) || eps > 1e-2) throw InvalidArgument("grad_check eps must lie in (0, 1e-2]");
  const auto analytic = backprop(layers, activations, inputs, target).grads;

  std::vector<WideLayer> probe;
  probe.reserve(layers.size());
  for (const auto& l : layers) probe.push_back({l.W.cast<long double>(), l.b.cast<long double>()});
  const WideMatrix wide_inputs = inputs.cast<long double>();
  const long double h = eps;

  double worst = 0.0;
  auto compare = [&](long double& param, double g_a) {
    const long double saved = param;
    param = saved + h;
    const long double up = wide_loss(probe, activations, wide_inputs, target);
    param = saved - h;
    const long double down = wide_loss(probe, activations, wide_inputs, target);
    param = saved;
    const auto g_n = static_cast<double>((up - down) / (2.0L * h));
    const double rel = std::abs(g_a - g_n) / std::max(1e-8, std::abs(g_a) + std::abs(g_n));
    worst = std::max(worst, rel);
  };

  for (std::size_t i = 0; i < probe.size(); ++i) {
    for (Eigen::Index r = 0; r < probe[i].W.rows(); ++r)
      for (Eigen::Index c = 0; c < probe[i].W.cols(); ++c) compare(probe[i].W(r, c), analytic.dW[i](r, c));
    for (Eigen::Index r = 0; r < probe[i].b.rows(); ++r) compare(probe[i].b(r, 0), analytic.db[i][r]);
  }
  return worst;
}

NetworkInstance random_instance(Rng& rng, int max_layers, int max_width, bool classifier, int batch) {
  if (max_layers < 1 || max_width < 1 || batch < 1) throw InvalidArgument("random_instance: bad limits");
  std::uniform_int_distribution<int> depth_dist(1, max_layers);
  std::uniform_int_distribution<int> width_dist(1, max_width);
  std::normal_distribution<double> bias_dist(0.0, 0.1);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  const int depth = depth_dist(rng);
  std::vector<int> dims{width_dist(rng)};
  for (int i = 0; i < depth; ++i) dims.push_back(width_dist(rng));
  if (classifier) dims.back() = std::max(dims.back(), 2);

  NetworkInstance inst;
  for (int i = 0; i < depth; ++i) {
    DenseLayer layer = DenseLayer::glorot(dims[i + 1], dims[i], rng);
    for (Eigen::Index k = 0; k < layer.b.size(); ++k) layer.b[k] = bias_dist(rng);
    inst.layers.push_back(std::move(layer));
    inst.activations.push_back(classifier && i + 1 == depth ? Activation::softmax : Activation::tanh);
  }
  inst.inputs.resize(dims.front(), batch);
  for (Eigen::Index c = 0; c < batch; ++c)
    for (Eigen::Index r = 0; r < inst.inputs.rows(); ++r) inst.inputs(r, c) = unit(rng);
  if (classifier) {
    std::uniform_int_distribution<int> label(0, dims.back() - 1);
    std::vector<int> labels;
    for (int c = 0; c < batch; ++c) labels.push_back(label(rng));
    inst.target = labels;
  } else {
    Matrix t(dims.back(), batch);
    for (Eigen::Index c = 0; c < batch; ++c)
      for (Eigen::Index r = 0; r < t.rows(); ++r) t(r, c) = 0.9 * unit(rng);
    inst.target = t;
  }
  return inst;
}

Matrix to_columns(std::span<const Vector> vectors) {
  if (vectors.empty()) return Matrix();
  Matrix m(vectors.front().size(), static_cast<Eigen::Index>(vectors.size()));
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].size() != m.rows()) throw ShapeError("vectors of differing length");
    m.col(static_cast<Eigen::Index>(i)) = vectors[i];
  }
  return m;
}

}  // namespace knock
