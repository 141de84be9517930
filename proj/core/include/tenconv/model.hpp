#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include "tenconv/layers.hpp"
#include "tenconv/model_spec.hpp"

namespace tenconv {

/// Instantiated network. Images enter as [N, C, H, W]; in tensor-cell mode
/// each pixel becomes a [C, 1] cell of a single-channel map. Output logits
/// are [N, classes] or a [N, classes, 1, 1] map.
class Model {
 public:
  /// Validates the ModelSpec row by row (IncompatibleSpec) and initialises the
  /// parameters from `seed`.
  explicit Model(ModelSpec spec, std::uint64_t seed = 0);
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;

  const ModelSpec& spec() const { return spec_; }
  const std::vector<RowShape>& rows() const { return rows_; }

  void initialize(std::uint64_t seed);

  ad::Var forward(ForwardContext& ctx, ad::Var images);
  /// Per-layer outputs of one forward pass, for shape inspection.
  std::vector<ad::Var> forward_trace(ForwardContext& ctx, ad::Var images);
  /// Inference-mode logits as [N, classes].
  Tensor predict(const Tensor& images);

  std::size_t layer_count() const { return layers_.size(); }
  Module& layer(std::size_t i) { return *layers_[i]; }

  /// Parameters and buffers in checkpoint order.
  const std::vector<Parameter*>& parameters() const { return params_; }
  std::vector<Parameter*> trainable() const;
  /// Element count of trainable parameters.
  std::size_t parameter_count() const;

  std::vector<Tensor> snapshot() const;
  /// ShapeMismatch when the tensors do not fit the parameters.
  void restore(const std::vector<Tensor>& values);

 private:
  ad::Var adapt_input(ad::Var images) const;

  ModelSpec spec_;
  std::vector<RowShape> rows_;
  std::vector<std::unique_ptr<Module>> layers_;
  std::vector<Parameter*> params_;
};

/// Flattens [N, C, 1, 1] logits to [N, C]; [N, C] passes through.
Tensor flatten_logits(const Tensor& logits);

}  // namespace tenconv
