#pragma once

#include <cstddef>
#include <vector>

#include "tenconv/tensor.hpp"

namespace tenconv {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Bias-corrected Adam. Moments are created on the first step and matched
/// to parameters by position.
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  /// params[i] -= lr * m_hat / (sqrt(v_hat) + eps). ShapeMismatch when a
  /// gradient or a stored moment does not fit its parameter.
  void step(const std::vector<Tensor*>& params, const std::vector<const Tensor*>& grads);

  std::size_t steps() const { return t_; }
  const AdamConfig& config() const { return config_; }
  void set_learning_rate(double lr) { config_.learning_rate = lr; }
  const std::vector<Tensor>& first_moments() const { return m_; }
  const std::vector<Tensor>& second_moments() const { return v_; }

 private:
  AdamConfig config_;
  std::size_t t_ = 0;
  std::vector<Tensor> m_, v_;
};

}  // namespace tenconv
