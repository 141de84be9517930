#include "tenconv/adversarial.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "parallel.hpp"
#include "tenconv/error.hpp"
#include "tenconv/ops.hpp"

namespace tenconv {

void AttackConfig::validate() const {
  if (epsilons.empty()) throw ConfigError("at least one epsilon is required");
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    if (!(epsilons[i] >= 0 && epsilons[i] <= 1)) throw ConfigError("epsilon outside [0, 1]");
    if (i > 0 && epsilons[i] < epsilons[i - 1]) throw ConfigError("epsilons must be ascending");
  }
  if (!(clip_low < clip_high)) throw ConfigError("clip range is empty");
  if (batch_size == 0 || threads == 0) throw ConfigError("batch size and threads must be positive");
}

Tensor input_gradient(Model& model, const Tensor& images, std::span<const int> labels) {
  ad::Tape tape;
  ForwardContext ctx(tape, false);
  ad::Var x = tape.input(images, true);
  ad::Var loss = ad::softmax_cross_entropy(model.forward(ctx, x), labels);
  return tape.backward(loss)[x];
}

Tensor fgsm_step(const Tensor& images, const Tensor& grad, double eps, double low, double high) {
  if (!(images.shape() == grad.shape())) {
    throw ShapeMismatch("gradient " + grad.shape().str() + " for images " + images.shape().str());
  }
  Tensor out(images.shape());
  for (std::size_t i = 0; i < images.numel(); ++i) {
    const Real x = images[i];
    const double s = grad[i] > 0 ? 1.0 : (grad[i] < 0 ? -1.0 : 0.0);
    Real a = static_cast<Real>(std::clamp(static_cast<double>(x) + eps * s, low, high));
    while (std::abs(static_cast<double>(a) - static_cast<double>(x)) > eps) a = std::nextafter(a, x);
    out[i] = a;
  }
  return out;
}

Tensor fgsm(Model& model, const Tensor& images, std::span<const int> labels, double eps) {
  return fgsm_step(images, input_gradient(model, images, labels), eps);
}

RobustnessCurve transfer_attack(Model& source, Model& target, const LabeledImageSet& set, const AttackConfig& config) {
  config.validate();
  if (set.size() == 0) throw DataEmpty("cannot attack an empty dataset");
  if (source.spec().classes != target.spec().classes) {
    throw ClassCountMismatch(source.spec().name + " predicts " + std::to_string(source.spec().classes) +
                             " classes, " + target.spec().name + " predicts " + std::to_string(target.spec().classes));
  }
  const std::size_t bs = config.batch_size;
  const std::size_t batches = (set.size() + bs - 1) / bs;
  const std::size_t ne = config.epsilons.size();
  std::vector<std::size_t> hits(batches * ne);

  detail::parallel_for(batches, config.threads, [&](std::size_t b) {
    std::vector<std::size_t> idx;
    for (std::size_t i = b * bs; i < std::min(set.size(), (b + 1) * bs); ++i) idx.push_back(i);
    const Tensor images = set.gather(idx);
    const std::vector<int> labels = set.gather_labels(idx);
    const Tensor grad = input_gradient(source, images, labels);
    for (std::size_t e = 0; e < ne; ++e) {
      const Tensor adv = fgsm_step(images, grad, config.epsilons[e], config.clip_low, config.clip_high);
      const Tensor z = target.predict(adv);
      const std::size_t classes = z.shape()[1];
      for (std::size_t i = 0; i < idx.size(); ++i) {
        const Real* row = z.raw() + i * classes;
        if (std::max_element(row, row + classes) - row == labels[i]) ++hits[b * ne + e];
      }
    }
  });

  RobustnessCurve curve;
  curve.model = target.spec().name;
  curve.parameters = target.parameter_count();
  curve.source = source.spec().name;
  curve.epsilons = config.epsilons;
  for (std::size_t e = 0; e < ne; ++e) {
    std::size_t correct = 0;
    for (std::size_t b = 0; b < batches; ++b) correct += hits[b * ne + e];
    curve.accuracies.push_back(static_cast<double>(correct) / static_cast<double>(set.size()));
  }
  return curve;
}

RobustnessCurve sweep(Model& model, const LabeledImageSet& set, const AttackConfig& config) {
  return transfer_attack(model, model, set, config);
}

std::string curve_csv(const RobustnessCurve& curve) {
  std::string out = "epsilon,accuracy\n";
  char line[64];
  for (std::size_t i = 0; i < curve.epsilons.size(); ++i) {
    std::snprintf(line, sizeof line, "%.6g,%.17g\n", curve.epsilons[i], curve.accuracies[i]);
    out += line;
  }
  return out;
}

std::string curve_json(const RobustnessCurve& curve) {
  nlohmann::json j;
  j["model"] = curve.model;
  j["parameters"] = curve.parameters;
  j["source"] = curve.source;
  j["epsilons"] = curve.epsilons;
  j["accuracies"] = curve.accuracies;
  return j.dump(2);
}

}  // namespace tenconv
