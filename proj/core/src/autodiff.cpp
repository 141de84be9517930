#include "tenconv/autodiff.hpp"

#include <optional>

#include "tenconv/error.hpp"

namespace tenconv::ad {

const Tensor& Var::value() const { return tape_->value(id_); }

const Tensor& Gradients::operator[](Var v) const {
  auto it = grads_.find(v.id());
  if (it == grads_.end()) throw OutOfBounds("no gradient recorded for node " + std::to_string(v.id()));
  return it->second;
}

Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Tape::parameter(Tensor value) { return push({"parameter", Kind::parameter, true, std::move(value), {}, {}}); }

Var Tape::input(Tensor value, bool requires_grad) {
  return push({"input", Kind::input, requires_grad, std::move(value), {}, {}});
}

Var Tape::record(const char* op, Tensor value, std::vector<Var> inputs, BackwardFn backward) {
  std::vector<NodeId> ids;
  ids.reserve(inputs.size());
  bool needs = false;
  for (const Var& v : inputs) {
    if (v.tape() != this) throw OutOfBounds(std::string("input of ") + op + " belongs to another tape");
    ids.push_back(v.id());
    needs = needs || nodes_[v.id()].requires_grad;
  }
  if (!needs) backward = nullptr;
  return push({op, Kind::op, needs, std::move(value), std::move(ids), std::move(backward)});
}

Gradients Tape::backward(Var loss, Real seed) const {
  if (loss.tape() != this) throw OutOfBounds("loss belongs to another tape");
  if (value(loss.id()).rank() != 0) {
    throw NotScalarLoss("loss has shape " + value(loss.id()).shape().str() + ", expected rank 0");
  }
  std::vector<std::optional<Tensor>> grads(loss.id() + 1);
  grads[loss.id()] = Tensor::scalar(seed);

  std::vector<Tensor*> input_grads;
  for (NodeId id = loss.id() + 1; id-- > 0;) {
    const Node& node = nodes_[id];
    if (!grads[id] || node.kind != Kind::op || !node.backward) continue;
    input_grads.assign(node.inputs.size(), nullptr);
    for (std::size_t i = 0; i < node.inputs.size(); ++i) {
      const NodeId in = node.inputs[i];
      if (!nodes_[in].requires_grad) continue;
      if (!grads[in]) grads[in] = Tensor(nodes_[in].value.shape());
      input_grads[i] = &*grads[in];
    }
    node.backward(*grads[id], input_grads);
  }

  Gradients out;
  for (NodeId id = 0; id <= loss.id(); ++id) {
    const Node& node = nodes_[id];
    if (node.kind == Kind::op || !node.requires_grad) continue;
    out.set(id, grads[id] ? std::move(*grads[id]) : Tensor(node.value.shape()));
  }
  return out;
}

}  // namespace tenconv::ad
