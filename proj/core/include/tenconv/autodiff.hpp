#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "tenconv/tensor.hpp"

namespace tenconv::ad {

using NodeId = std::size_t;
class Tape;

/// Handle to a node recorded on a tape.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, NodeId id) : tape_(tape), id_(id) {}

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  NodeId id() const { return id_; }
  Tape* tape() const { return tape_; }

 private:
  Tape* tape_ = nullptr;
  NodeId id_ = 0;
};

/// Adds the contribution of `upstream` (gradient of the node's output) into
/// each input's gradient buffer. Entries of `input_grads` are null for inputs
/// that need no gradient.
using BackwardFn = std::function<void(const Tensor& upstream, std::span<Tensor* const> input_grads)>;

/// Leaf gradients produced by Tape::backward, keyed by leaf node id.
class Gradients {
 public:
  bool contains(Var v) const { return grads_.count(v.id()) != 0; }
  const Tensor& operator[](Var v) const;
  std::size_t size() const { return grads_.size(); }

  void set(NodeId id, Tensor grad) { grads_[id] = std::move(grad); }

 private:
  std::map<NodeId, Tensor> grads_;
};

/// Append-only record of executed primitives. Node ids are topologically
/// ordered; backward visits them once, in strict reverse order.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Trainable leaf; always receives a gradient.
  Var parameter(Tensor value);
  /// Data leaf; receives a gradient only when `requires_grad` is set.
  Var input(Tensor value, bool requires_grad = false);

  /// Records an op output. The backward closure is dropped when no input
  /// requires a gradient.
  Var record(const char* op, Tensor value, std::vector<Var> inputs, BackwardFn backward);

  const Tensor& value(NodeId id) const { return nodes_[id].value; }
  bool requires_grad(NodeId id) const { return nodes_[id].requires_grad; }
  const char* op(NodeId id) const { return nodes_[id].op; }
  std::span<const NodeId> inputs(NodeId id) const { return nodes_[id].inputs; }
  std::size_t size() const { return nodes_.size(); }

  /// Reverse sweep from a rank-0 loss (NotScalarLoss otherwise). `seed` is
  /// the upstream gradient of the loss itself.
  Gradients backward(Var loss, Real seed = 1) const;

 private:
  enum class Kind { parameter, input, op };

  struct Node {
    const char* op;
    Kind kind;
    bool requires_grad;
    Tensor value;
    std::vector<NodeId> inputs;
    BackwardFn backward;
  };

  Var push(Node node);

  // deque: references to recorded values stay valid while recording.
  std::deque<Node> nodes_;
};

}  // namespace tenconv::ad
