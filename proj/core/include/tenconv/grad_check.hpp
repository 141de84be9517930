#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "tenconv/autodiff.hpp"
#include "tenconv/model.hpp"

namespace tenconv {

struct GradCheckOptions {
  double step = 1e-5;
  double tolerance = 1e-4;
  /// Coordinates sampled per tensor (all when the tensor is smaller).
  std::size_t max_coords = 200;
  /// Denominator floor of the relative error.
  double floor = 1e-6;
  /// A coordinate is excluded when the +/- step passes put any (P)ReLU
  /// input on different sides of, or within this distance of, zero.
  double kink_margin = 1e-6;
  std::uint64_t seed = 0;
};

/// Tensor perturbed by the checker, with a name used to group results.
struct GradTarget {
  std::string name;
  Tensor* value;
};

/// A recorded objective: the rank-0 loss and, per target, the tape leaf
/// holding that target's current value.
struct Probe {
  ad::Var loss;
  std::vector<ad::Var> leaves;
};
using Objective = std::function<Probe(ad::Tape&)>;

struct GroupReport {
  std::string name;
  std::size_t checked = 0;
  std::size_t excluded = 0;
  double max_error = 0;
  bool passed = true;
};

struct GradCheckReport {
  std::vector<GroupReport> groups;
  double max_error = 0;
  std::size_t checked = 0;
  std::size_t excluded = 0;
  bool passed = true;
};

/// Central differences against reverse mode. Targets are grouped by the
/// part of their name before the last '.'. `reset` runs before every
/// evaluation (e.g. to restore BatchNorm running statistics).
GradCheckReport check_gradients(std::span<const GradTarget> targets, const Objective& objective,
                                const GradCheckOptions& options, const std::function<void()>& reset = {});

/// Checks every trainable parameter of `model` (training mode, mean
/// cross-entropy on the batch) and, with `include_input`, the images.
GradCheckReport grad_check(Model& model, const Tensor& images, std::span<const int> labels,
                           const GradCheckOptions& options, bool include_input = false);

std::string format_grad_check(const GradCheckReport& report, double tolerance);

}  // namespace tenconv
