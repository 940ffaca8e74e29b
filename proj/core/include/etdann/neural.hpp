#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "etdann/matrix.hpp"

namespace etdann {

enum class Activation { Identity, Relu, Sigmoid };

// y = act(x W^T + b), W is out x in.
struct DenseLayer {
  Matrix weights;
  Vector biases;
  Activation activation = Activation::Identity;

  Eigen::Index in_width() const noexcept { return weights.cols(); }
  Eigen::Index out_width() const noexcept { return weights.rows(); }
};

class Mlp {
 public:
  Mlp() = default;
  // Throws InvalidShape if consecutive layers do not chain.
  explicit Mlp(std::vector<DenseLayer> layers);

  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }
  std::vector<DenseLayer>& layers() noexcept { return layers_; }
  Eigen::Index input_width() const;
  Eigen::Index output_width() const;
  std::size_t parameter_count() const;

  // Views over every weight and bias array, layer by layer (weights first).
  std::vector<std::span<double>> parameters();
  std::vector<std::span<const double>> parameters() const;

 private:
  std::vector<DenseLayer> layers_;
};

struct LayerPlan {
  std::size_t width = 0;
  Activation activation = Activation::Relu;
};

struct ShapePlan {
  std::size_t input_width = 0;
  std::vector<LayerPlan> layers;
};

// Glorot-uniform weights, zero biases. Throws InvalidShape on zero widths
// or an empty plan.
Mlp init_params(const ShapePlan& plan, std::uint64_t seed);

struct MlpGrad;

// Forward intermediates of one pass through one Mlp.
class GradTape {
 public:
  bool empty() const noexcept { return owner_ == nullptr; }

 private:
  friend Matrix forward(const Mlp&, const Matrix&, GradTape&);
  friend MlpGrad backward(const Mlp&, GradTape&&, const Matrix&);

  const Mlp* owner_ = nullptr;
  std::vector<Matrix> inputs_;   // input to each layer
  std::vector<Matrix> outputs_;  // post-activation output of each layer
};

struct MlpGrad {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
  Matrix input;  // d(loss)/d(x)

  std::vector<std::span<const double>> parameters() const;
  MlpGrad& operator*=(double factor);
};

// Throws DimensionMismatch and NonFiniteActivation.
Matrix forward(const Mlp& mlp, const Matrix& x, GradTape& tape);
Matrix forward(const Mlp& mlp, const Matrix& x);

// Consumes the tape. Throws TapeMismatch if the tape is empty, was recorded
// by another Mlp, or upstream does not match the recorded output shape.
// The ReLU derivative at 0 is 0.
MlpGrad backward(const Mlp& mlp, GradTape&& tape, const Matrix& upstream);

// Gradient reversal: identity forward, upstream * -lambda backward.
inline Matrix grad_reverse(const Matrix& x) { return x; }
Matrix grad_reverse_backward(const Matrix& upstream, double lambda);

struct LossAndGrad {
  double loss = 0.0;
  Vector grad;
};

// Mean squared error; grad is with respect to the predictions.
LossAndGrad mse_loss(const Vector& prediction, const Vector& target);

// Binary cross-entropy of probabilities p against labels in {0, 1}.
// Probabilities are clamped to [1e-7, 1 - 1e-7]; grad is with respect to
// the pre-sigmoid logits, (p - d) / N.
LossAndGrad bce_loss(const Vector& probability, const Vector& labels);

Vector sigmoid(const Vector& logits);

}  // namespace etdann
