#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "tenconv/autodiff.hpp"
#include "tenconv/ops.hpp"

namespace oracle {

/// Builds a scalar loss from tape leaves holding `inputs`.
using TapeFn = std::function<tenconv::ad::Var(tenconv::ad::Tape&, const std::vector<tenconv::ad::Var>&)>;

inline double eval_fn(const TapeFn& f, const std::vector<tenconv::Tensor>& inputs) {
  tenconv::ad::Tape tape;
  std::vector<tenconv::ad::Var> leaves;
  for (const auto& t : inputs) leaves.push_back(tape.parameter(t));
  return static_cast<double>(f(tape, leaves).value().item());
}

/// Largest relative error between reverse-mode and central-difference
/// gradients over every coordinate of every input.
inline double fd_max_error(const TapeFn& f, std::vector<tenconv::Tensor> inputs, double h = 1e-5,
                           double floor = 1e-6) {
  std::vector<tenconv::Tensor> analytic;
  {
    tenconv::ad::Tape tape;
    std::vector<tenconv::ad::Var> leaves;
    for (const auto& t : inputs) leaves.push_back(tape.parameter(t));
    const tenconv::ad::Gradients g = tape.backward(f(tape, leaves));
    for (const auto& v : leaves) analytic.push_back(g[v]);
  }
  double worst = 0;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    for (std::size_t i = 0; i < inputs[k].numel(); ++i) {
      const tenconv::Real x = inputs[k][i];
      inputs[k][i] = x + h;
      const double plus = eval_fn(f, inputs);
      inputs[k][i] = x - h;
      const double minus = eval_fn(f, inputs);
      inputs[k][i] = x;
      const double numeric = (plus - minus) / (2 * h);
      const double a = analytic[k][i];
      worst = std::max(worst, std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), floor}));
    }
  }
  return worst;
}

/// sum(c .* v) for a fixed pseudo-random c, so that every output entry
/// carries a distinct upstream gradient.
inline tenconv::ad::Var weighted_sum(tenconv::ad::Tape& tape, tenconv::ad::Var v) {
  tenconv::Tensor c(v.shape());
  for (std::size_t i = 0; i < c.numel(); ++i) c[i] = std::sin(1.0 + 0.37 * static_cast<double>(i));
  return tenconv::ad::sum(tenconv::ad::mul(v, tape.input(c)));
}

}  // namespace oracle
