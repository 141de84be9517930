#include "tenconv/optimizer.hpp"

#include <cmath>

#include "tenconv/error.hpp"

namespace tenconv {

void Adam::step(const std::vector<Tensor*>& params, const std::vector<const Tensor*>& grads) {
  if (params.size() != grads.size()) {
    throw ShapeMismatch("Adam got " + std::to_string(params.size()) + " parameters and " +
                        std::to_string(grads.size()) + " gradients");
  }
  if (m_.empty()) {
    for (const Tensor* p : params) {
      m_.emplace_back(p->shape());
      v_.emplace_back(p->shape());
    }
  }
  if (m_.size() != params.size()) throw ShapeMismatch("Adam state was created for a different parameter list");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!(grads[i]->shape() == params[i]->shape()) || !(m_[i].shape() == params[i]->shape())) {
      throw ShapeMismatch("Adam: gradient " + grads[i]->shape().str() + " for parameter " + params[i]->shape().str());
    }
  }

  ++t_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Real* p = params[i]->raw();
    const Real* g = grads[i]->raw();
    Real* m = m_[i].raw();
    Real* v = v_[i].raw();
    for (std::size_t j = 0; j < params[i]->numel(); ++j) {
      const double gj = g[j];
      const double mj = b1 * m[j] + (1.0 - b1) * gj;
      const double vj = b2 * v[j] + (1.0 - b2) * gj * gj;
      m[j] = static_cast<Real>(mj);
      v[j] = static_cast<Real>(vj);
      p[j] -= static_cast<Real>(config_.learning_rate * (mj / c1) / (std::sqrt(vj / c2) + config_.epsilon));
    }
  }
}

}  // namespace tenconv
