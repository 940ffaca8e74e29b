#include "etdann/adam.hpp"

#include <cmath>
#include <string>

#include "etdann/error.hpp"

namespace etdann {

void AdamState::step(std::span<const std::span<double>> params,
                     std::span<const std::span<const double>> grads) {
  if (params.size() != grads.size())
    throw Error(ErrorCode::ShapeMismatch, std::to_string(params.size()) + " parameter arrays vs " +
                                              std::to_string(grads.size()) + " gradient arrays");
  for (std::size_t k = 0; k < params.size(); ++k)
    if (params[k].size() != grads[k].size())
      throw Error(ErrorCode::ShapeMismatch, "array " + std::to_string(k) + " size differs from its gradient");

  if (step_ == 0 && first_.empty()) {
    for (const auto& p : params) {
      first_.emplace_back(p.size(), 0.0);
      second_.emplace_back(p.size(), 0.0);
    }
  }
  if (first_.size() != params.size())
    throw Error(ErrorCode::ShapeMismatch, "parameter list changed between steps");
  for (std::size_t k = 0; k < params.size(); ++k)
    if (first_[k].size() != params[k].size())
      throw Error(ErrorCode::ShapeMismatch, "array " + std::to_string(k) + " changed size between steps");

  ++step_;
  const double t = static_cast<double>(step_);
  const double correction1 = 1.0 - std::pow(config_.beta1, t);
  const double correction2 = 1.0 - std::pow(config_.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& m = first_[k];
    auto& v = second_[k];
    const auto p = params[k];
    const auto g = grads[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g[i];
      v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g[i] * g[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      p[i] -= config_.lr * m_hat / (std::sqrt(v_hat) + config_.eps);
    }
  }
}

}  // namespace etdann
