#include "etdann/neural.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "etdann/error.hpp"
#include "etdann/rng.hpp"

namespace etdann {

namespace {

constexpr double kProbabilityClamp = 1e-7;

void apply_activation(Matrix& z, Activation act) {
  switch (act) {
    case Activation::Identity:
      break;
    case Activation::Relu:
      z = z.cwiseMax(0.0);
      break;
    case Activation::Sigmoid:
      z = (1.0 + (-z.array()).exp()).inverse().matrix();
      break;
  }
}

// Multiplies the upstream gradient by the activation derivative, expressed
// through the layer output.
void activation_backward(Matrix& grad, const Matrix& out, Activation act) {
  switch (act) {
    case Activation::Identity:
      break;
    case Activation::Relu:
      grad = (out.array() > 0.0).select(grad, 0.0);
      break;
    case Activation::Sigmoid:
      grad = (grad.array() * out.array() * (1.0 - out.array())).matrix();
      break;
  }
}

}  // namespace

Mlp::Mlp(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw Error(ErrorCode::InvalidShape, "an Mlp needs at least one layer");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& layer = layers_[i];
    if (layer.biases.size() != layer.weights.rows() || layer.weights.size() == 0)
      throw Error(ErrorCode::InvalidShape, "layer " + std::to_string(i) + " has inconsistent shapes");
    if (i > 0 && layer.in_width() != layers_[i - 1].out_width())
      throw Error(ErrorCode::InvalidShape, "layer " + std::to_string(i) + " does not chain");
  }
}

Eigen::Index Mlp::input_width() const { return layers_.empty() ? 0 : layers_.front().in_width(); }
Eigen::Index Mlp::output_width() const { return layers_.empty() ? 0 : layers_.back().out_width(); }

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += static_cast<std::size_t>(l.weights.size() + l.biases.size());
  return n;
}

std::vector<std::span<double>> Mlp::parameters() {
  std::vector<std::span<double>> out;
  for (auto& l : layers_) {
    out.emplace_back(l.weights.data(), static_cast<std::size_t>(l.weights.size()));
    out.emplace_back(l.biases.data(), static_cast<std::size_t>(l.biases.size()));
  }
  return out;
}

std::vector<std::span<const double>> Mlp::parameters() const {
  std::vector<std::span<const double>> out;
  for (const auto& l : layers_) {
    out.emplace_back(l.weights.data(), static_cast<std::size_t>(l.weights.size()));
    out.emplace_back(l.biases.data(), static_cast<std::size_t>(l.biases.size()));
  }
  return out;
}

std::vector<std::span<const double>> MlpGrad::parameters() const {
  std::vector<std::span<const double>> out;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    out.emplace_back(weights[i].data(), static_cast<std::size_t>(weights[i].size()));
    out.emplace_back(biases[i].data(), static_cast<std::size_t>(biases[i].size()));
  }
  return out;
}

MlpGrad& MlpGrad::operator*=(double factor) {
  for (auto& w : weights) w *= factor;
  for (auto& b : biases) b *= factor;
  input *= factor;
  return *this;
}

Mlp init_params(const ShapePlan& plan, std::uint64_t seed) {
  if (plan.input_width == 0 || plan.layers.empty())
    throw Error(ErrorCode::InvalidShape, "plan needs an input width and at least one layer");
  Rng rng(seed);
  std::vector<DenseLayer> layers;
  std::size_t fan_in = plan.input_width;
  for (const auto& lp : plan.layers) {
    if (lp.width == 0) throw Error(ErrorCode::InvalidShape, "zero layer width");
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + lp.width));
    DenseLayer layer;
    layer.weights.resize(static_cast<Eigen::Index>(lp.width), static_cast<Eigen::Index>(fan_in));
    for (Eigen::Index i = 0; i < layer.weights.size(); ++i)
      layer.weights.data()[i] = uniform(rng, -bound, bound);
    layer.biases = Vector::Zero(static_cast<Eigen::Index>(lp.width));
    layer.activation = lp.activation;
    layers.push_back(std::move(layer));
    fan_in = lp.width;
  }
  return Mlp(std::move(layers));
}

Matrix forward(const Mlp& mlp, const Matrix& x, GradTape& tape) {
  if (mlp.layers().empty()) throw Error(ErrorCode::InvalidShape, "empty Mlp");
  if (x.cols() != mlp.input_width())
    throw Error(ErrorCode::DimensionMismatch, "Mlp expects " + std::to_string(mlp.input_width()) +
                                                  " inputs, got " + std::to_string(x.cols()));
  tape.owner_ = &mlp;
  tape.inputs_.clear();
  tape.outputs_.clear();
  Matrix h = x;
  for (const auto& layer : mlp.layers()) {
    tape.inputs_.push_back(h);
    Matrix z = h * layer.weights.transpose();
    z.rowwise() += layer.biases.transpose();
    apply_activation(z, layer.activation);
    if (!z.allFinite()) {
      tape = GradTape{};
      throw Error(ErrorCode::NonFiniteActivation, "non-finite layer output");
    }
    tape.outputs_.push_back(z);
    h = std::move(z);
  }
  return h;
}

Matrix forward(const Mlp& mlp, const Matrix& x) {
  GradTape tape;
  return forward(mlp, x, tape);
}

MlpGrad backward(const Mlp& mlp, GradTape&& tape, const Matrix& upstream) {
  GradTape local = std::move(tape);
  tape = GradTape{};
  if (local.owner_ != &mlp || local.outputs_.size() != mlp.layers().size())
    throw Error(ErrorCode::TapeMismatch, "tape was not recorded by this Mlp (or already consumed)");
  const Matrix& out = local.outputs_.back();
  if (upstream.rows() != out.rows() || upstream.cols() != out.cols())
    throw Error(ErrorCode::TapeMismatch, "upstream gradient shape does not match forward output");

  const std::size_t n_layers = mlp.layers().size();
  MlpGrad grad;
  grad.weights.resize(n_layers);
  grad.biases.resize(n_layers);
  Matrix g = upstream;
  for (std::size_t k = n_layers; k-- > 0;) {
    const auto& layer = mlp.layers()[k];
    activation_backward(g, local.outputs_[k], layer.activation);
    grad.weights[k] = g.transpose() * local.inputs_[k];
    grad.biases[k] = g.colwise().sum().transpose();
    g = g * layer.weights;
  }
  grad.input = std::move(g);
  return grad;
}

Matrix grad_reverse_backward(const Matrix& upstream, double lambda) {
  if (!(lambda >= 0.0)) throw Error(ErrorCode::OutOfRange, "reversal strength must be >= 0");
  return -lambda * upstream;
}

LossAndGrad mse_loss(const Vector& prediction, const Vector& target) {
  if (prediction.size() != target.size())
    throw Error(ErrorCode::LengthMismatch, "prediction and target lengths differ");
  if (prediction.size() == 0) throw Error(ErrorCode::TooFewSamples, "empty batch");
  const double n = static_cast<double>(prediction.size());
  const Vector diff = prediction - target;
  return {diff.squaredNorm() / n, (2.0 / n) * diff};
}

Vector sigmoid(const Vector& logits) {
  return (1.0 + (-logits.array()).exp()).inverse().matrix();
}

LossAndGrad bce_loss(const Vector& probability, const Vector& labels) {
  if (probability.size() != labels.size())
    throw Error(ErrorCode::LengthMismatch, "probability and label lengths differ");
  if (probability.size() == 0) throw Error(ErrorCode::TooFewSamples, "empty batch");
  const double n = static_cast<double>(probability.size());
  LossAndGrad out;
  out.grad.resize(probability.size());
  double acc = 0.0;
  for (Eigen::Index i = 0; i < probability.size(); ++i) {
    const double p = std::clamp(probability(i), kProbabilityClamp, 1.0 - kProbabilityClamp);
    const double d = labels(i);
    acc += d * std::log(p) + (1.0 - d) * std::log(1.0 - p);
    out.grad(i) = (p - d) / n;
  }
  out.loss = -acc / n;
  return out;
}

}  // namespace etdann
