#include "tenconv/audit.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "tenconv/error.hpp"
#include "tenconv/layers.hpp"

namespace tenconv {

std::size_t ParamAudit::total() const {
  std::size_t n = 0;
  for (const AuditRow& r : rows) n += r.total();
  return n;
}

namespace {

AuditRow conv_row(std::string name, std::size_t in_ch, std::size_t out_ch, std::size_t kernel, const Shape& in_cell,
                  const Shape& out_cell, std::size_t contract, bool normalized) {
  AuditRow row;
  row.layer = std::move(name);
  row.weights = out_ch * in_ch * kernel * kernel * TensorConvLayer::derive_weight_cell(in_cell, out_cell, contract).numel();
  if (normalized) {
    row.batch_norm = 2 * out_ch * out_cell.numel();
    row.prelu = out_ch;
  }
  return row;
}

}  // namespace

ParamAudit audit_params(const ModelSpec& spec) {
  const std::vector<RowShape> rows = trace_shapes(spec);
  ParamAudit audit;
  audit.model = spec.name;
  RowShape cur = input_row(spec);
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const LayerSpec& l = spec.layers[i];
    const RowShape& next = rows[i];
    const std::string name = layer_label(l, i);
    switch (l.kind) {
      case LayerKind::block: {
        const std::size_t first = l.first_contract ? l.first_contract : l.contract;
        const std::size_t units = l.block == BlockKind::triple ? 3 : 4;
        for (std::size_t u = 0; u < units; ++u) {
          const bool head = u == 0;
          audit.rows.push_back(conv_row(name + ".unit" + std::to_string(u), head ? cur.channels : next.channels,
                                        next.channels, 3, head ? cur.cell : next.cell, next.cell,
                                        head ? first : l.contract, true));
        }
        if (cur.channels != next.channels || !(cur.cell == next.cell)) {
          audit.rows.push_back(
              conv_row(name + ".skip", cur.channels, next.channels, 1, cur.cell, next.cell, first, false));
        }
        break;
      }
      case LayerKind::tensor_conv:
      case LayerKind::final_compress:
        audit.rows.push_back(conv_row(name, cur.channels, next.channels, l.kernel, cur.cell, next.cell, l.contract,
                                      l.kind == LayerKind::tensor_conv));
        break;
      case LayerKind::conv2d: {
        AuditRow row;
        row.layer = name;
        row.weights = next.channels * cur.channels * l.kernel * l.kernel + next.channels;
        audit.rows.push_back(row);
        break;
      }
      case LayerKind::linear: {
        AuditRow row;
        row.layer = name;
        const std::size_t in = cur.flat ? cur.channels : cur.channels * cur.height * cur.width;
        row.weights = next.channels * in + next.channels;
        audit.rows.push_back(row);
        break;
      }
      case LayerKind::relu:
        break;
    }
    cur = next;
  }
  return audit;
}

std::string format_audit(const ParamAudit& audit, std::optional<double> expect) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-16s %12s %10s %8s %12s\n", "layer", "weights", "batchnorm", "prelu", "total");
  out << audit.model << "\n" << line;
  for (const AuditRow& r : audit.rows) {
    std::snprintf(line, sizeof line, "%-16s %12zu %10zu %8zu %12zu\n", r.layer.c_str(), r.weights, r.batch_norm,
                  r.prelu, r.total());
    out << line;
  }
  std::snprintf(line, sizeof line, "%-16s %45zu\n", "total", audit.total());
  out << line;
  if (expect) {
    const double delta = static_cast<double>(audit.total()) - *expect;
    std::snprintf(line, sizeof line, "expected %.0f, delta %+.0f (%+.2f%%)\n", *expect, delta, 100.0 * delta / *expect);
    out << line;
  }
  return out.str();
}

double parse_count(const std::string& text) {
  if (text.empty()) throw ConfigError("empty parameter count");
  double scale = 1;
  std::string digits = text;
  const char suffix = digits.back();
  if (suffix == 'K' || suffix == 'k') {
    scale = 1e3;
    digits.pop_back();
  } else if (suffix == 'M' || suffix == 'm') {
    scale = 1e6;
    digits.pop_back();
  }
  std::size_t used = 0;
  double value = 0;
  try {
    value = std::stod(digits, &used);
  } catch (const std::exception&) {
    throw ConfigError("cannot parse parameter count '" + text + "'");
  }
  if (used != digits.size() || !(value >= 0)) throw ConfigError("cannot parse parameter count '" + text + "'");
  return std::round(value * scale);
}

std::size_t transform_parameter_count(std::size_t pairs, const Shape& in, const Shape& out, std::size_t contract) {
  return pairs * TensorConvLayer::derive_weight_cell(in, out, contract).numel();
}

}  // namespace tenconv
