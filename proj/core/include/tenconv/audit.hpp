#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "tenconv/model_spec.hpp"

namespace tenconv {

/// Trainable parameter counts of one convolution unit, projection or
/// fully connected layer.
struct AuditRow {
  std::string layer;
  std::size_t weights = 0;
  std::size_t batch_norm = 0;
  std::size_t prelu = 0;

  std::size_t total() const { return weights + batch_norm + prelu; }
};

struct ParamAudit {
  std::string model;
  std::vector<AuditRow> rows;

  std::size_t total() const;
};

/// Closed-form count from the ModelSpec alone; no weights are allocated.
ParamAudit audit_params(const ModelSpec& spec);

/// Human-readable breakdown; with `expect`, appends the signed delta.
std::string format_audit(const ParamAudit& audit, std::optional<double> expect = std::nullopt);

/// Parses counts such as "0.39M", "22.2K" or "116640".
double parse_count(const std::string& text);

/// Weights of `pairs` independent transformations mapping `in` tensors to
/// `out` tensors by contracting r axes (capsule-style pose transforms).
std::size_t transform_parameter_count(std::size_t pairs, const Shape& in, const Shape& out, std::size_t contract);

}  // namespace tenconv
