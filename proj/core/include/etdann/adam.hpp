#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace etdann {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam over an ordered list of parameter arrays. Moment
// buffers are shaped on the first step and checked on every later one.
class AdamState {
 public:
  explicit AdamState(AdamConfig config = {}) : config_(config) {}

  const AdamConfig& config() const noexcept { return config_; }
  std::uint64_t step_count() const noexcept { return step_; }

  // Throws ShapeMismatch when params and grads (or earlier steps) disagree.
  void step(std::span<const std::span<double>> params, std::span<const std::span<const double>> grads);

 private:
  AdamConfig config_;
  std::uint64_t step_ = 0;
  std::vector<std::vector<double>> first_;
  std::vector<std::vector<double>> second_;
};

inline void adam_step(AdamState& state, std::span<const std::span<double>> params,
                      std::span<const std::span<const double>> grads) {
  state.step(params, grads);
}

}  // namespace etdann
