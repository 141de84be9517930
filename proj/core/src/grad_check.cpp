#include "tenconv/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <map>
#include <random>

#include "tenconv/ops.hpp"

namespace tenconv {

namespace {

struct Evaluation {
  double loss = 0;
  std::vector<signed char> kinks;  // side of zero of every (P)ReLU input
};

Evaluation evaluate(const Objective& objective, const std::function<void()>& reset, double margin) {
  if (reset) reset();
  ad::Tape tape;
  Probe probe = objective(tape);
  Evaluation e;
  e.loss = static_cast<double>(probe.loss.value().item());
  for (ad::NodeId id = 0; id < tape.size(); ++id) {
    const char* op = tape.op(id);
    if (!op || (std::strcmp(op, "prelu") != 0 && std::strcmp(op, "relu") != 0)) continue;
    for (Real x : tape.value(tape.inputs(id)[0]).data()) {
      e.kinks.push_back(x > margin ? 1 : (x < -margin ? -1 : 0));
    }
  }
  return e;
}

std::vector<std::size_t> sample(std::size_t n, std::size_t k, std::mt19937_64& rng) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  if (n <= k) return idx;
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::string group_of(const std::string& name) {
  const std::size_t dot = name.rfind('.');
  return dot == std::string::npos ? name : name.substr(0, dot);
}

}  // namespace

GradCheckReport check_gradients(std::span<const GradTarget> targets, const Objective& objective,
                                const GradCheckOptions& options, const std::function<void()>& reset) {
  if (reset) reset();
  std::vector<Tensor> analytic;
  {
    ad::Tape tape;
    Probe probe = objective(tape);
    const ad::Gradients grads = tape.backward(probe.loss);
    for (std::size_t t = 0; t < targets.size(); ++t) {
      const ad::Var leaf = probe.leaves.at(t);
      analytic.push_back(leaf.tape() && grads.contains(leaf) ? grads[leaf] : Tensor(targets[t].value->shape()));
    }
  }

  std::mt19937_64 rng(options.seed);
  std::map<std::string, GroupReport> groups;
  std::vector<std::string> order;
  for (std::size_t t = 0; t < targets.size(); ++t) {
    const std::string g = group_of(targets[t].name);
    if (!groups.count(g)) {
      order.push_back(g);
      groups[g].name = g;
    }
    GroupReport& report = groups[g];
    Tensor& value = *targets[t].value;
    for (std::size_t c : sample(value.numel(), options.max_coords, rng)) {
      const Real original = value[c];
      value[c] = static_cast<Real>(original + options.step);
      const Evaluation plus = evaluate(objective, reset, options.kink_margin);
      value[c] = static_cast<Real>(original - options.step);
      const Evaluation minus = evaluate(objective, reset, options.kink_margin);
      value[c] = original;

      const bool kink = plus.kinks != minus.kinks ||
                        std::find(plus.kinks.begin(), plus.kinks.end(), 0) != plus.kinks.end() ||
                        std::find(minus.kinks.begin(), minus.kinks.end(), 0) != minus.kinks.end();
      if (kink) {
        ++report.excluded;
        continue;
      }
      const double numeric = (plus.loss - minus.loss) / (2 * options.step);
      const double a = analytic[t][c];
      const double err = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), options.floor});
      report.max_error = std::max(report.max_error, err);
      ++report.checked;
    }
  }
  if (reset) reset();

  GradCheckReport out;
  for (const std::string& g : order) {
    GroupReport r = groups[g];
    r.passed = r.checked > 0 && r.max_error < options.tolerance;
    out.max_error = std::max(out.max_error, r.max_error);
    out.checked += r.checked;
    out.excluded += r.excluded;
    out.passed = out.passed && r.passed;
    out.groups.push_back(r);
  }
  return out;
}

GradCheckReport grad_check(Model& model, const Tensor& images, std::span<const int> labels,
                           const GradCheckOptions& options, bool include_input) {
  std::vector<GradTarget> targets;
  std::vector<Parameter*> params = model.trainable();
  for (Parameter* p : params) targets.push_back({p->name, &p->value});
  Tensor input = images;
  if (include_input) targets.push_back({"input", &input});

  std::vector<std::pair<Parameter*, Tensor>> buffers;
  for (Parameter* p : model.parameters()) {
    if (!p->trainable) buffers.emplace_back(p, p->value);
  }
  auto reset = [&buffers] {
    for (auto& [p, v] : buffers) p->value = v;
  };
  Objective objective = [&](ad::Tape& tape) {
    ForwardContext ctx(tape, true);
    ad::Var x = tape.input(input, include_input);
    Probe probe;
    probe.loss = ad::softmax_cross_entropy(model.forward(ctx, x), labels);
    for (Parameter* p : params) {
      ad::Var leaf;
      for (const ForwardContext::Binding& b : ctx.bindings()) {
        if (b.parameter == p) leaf = b.var;
      }
      probe.leaves.push_back(leaf);
    }
    if (include_input) probe.leaves.push_back(x);
    return probe;
  };
  GradCheckReport report = check_gradients(targets, objective, options, reset);
  return report;
}

std::string format_grad_check(const GradCheckReport& report, double tolerance) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%-28s %8s %9s %12s %s\n", "group", "checked", "excluded", "max_rel_err", "");
  out += line;
  for (const GroupReport& g : report.groups) {
    std::snprintf(line, sizeof line, "%-28s %8zu %9zu %12.3e %s\n", g.name.c_str(), g.checked, g.excluded, g.max_error,
                  g.passed ? "ok" : "FAIL");
    out += line;
  }
  std::snprintf(line, sizeof line, "max relative error %.3e (tolerance %.1e): %s\n", report.max_error, tolerance,
                report.passed ? "PASS" : "FAIL");
  out += line;
  return out;
}

}  // namespace tenconv
