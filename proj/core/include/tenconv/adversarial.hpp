#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tenconv/data.hpp"
#include "tenconv/model.hpp"

namespace tenconv {

struct AttackConfig {
  std::vector<double> epsilons{0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3};
  double clip_low = 0.0;
  double clip_high = 1.0;
  std::size_t batch_size = 256;
  std::size_t threads = 1;

  /// ConfigError unless epsilons are ascending within [0, 1].
  void validate() const;
};

struct RobustnessCurve {
  std::string model;
  std::size_t parameters = 0;
  /// Model that crafted the examples; equals `model` for white-box sweeps.
  std::string source;
  std::vector<double> epsilons;
  std::vector<double> accuracies;
};

/// Gradient of the mean cross-entropy (true labels) with respect to the
/// images, with the model in inference mode.
Tensor input_gradient(Model& model, const Tensor& images, std::span<const int> labels);

/// clip(x + eps * sign(grad), low, high), nudged so that
/// |x_adv - x| <= eps holds exactly in floating point.
Tensor fgsm_step(const Tensor& images, const Tensor& grad, double eps, double low = 0.0, double high = 1.0);

Tensor fgsm(Model& model, const Tensor& images, std::span<const int> labels, double eps);

/// Adversarial accuracy of `target` on examples crafted against `source`,
/// one entry per epsilon. ClassCountMismatch when the models disagree on
/// the class count; DataEmpty on an empty set.
RobustnessCurve transfer_attack(Model& source, Model& target, const LabeledImageSet& set, const AttackConfig& config);

/// White-box curve: transfer_attack(model, model, ...).
RobustnessCurve sweep(Model& model, const LabeledImageSet& set, const AttackConfig& config);

std::string curve_csv(const RobustnessCurve& curve);
std::string curve_json(const RobustnessCurve& curve);

}  // namespace tenconv
