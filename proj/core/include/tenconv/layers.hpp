#pragma once

#include <cstddef>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "tenconv/autodiff.hpp"
#include "tenconv/conv.hpp"
#include "tenconv/ops.hpp"

namespace tenconv {

/// Named tensor owned by a layer. Buffers (BatchNorm running statistics)
/// are checkpointed but never trained.
struct Parameter {
  std::string name;
  Tensor value;
  bool trainable = true;
};

/// Per-forward-pass state: the tape, the mode, and which tape leaf each
/// parameter was bound to.
class ForwardContext {
 public:
  struct Binding {
    Parameter* parameter;
    ad::Var var;
  };

  ForwardContext(ad::Tape& tape, bool training) : tape_(tape), training_(training) {}

  ad::Tape& tape() { return tape_; }
  bool training() const { return training_; }

  /// Registers the parameter's current value as a trainable tape leaf.
  ad::Var bind(Parameter& p);
  const std::vector<Binding>& bindings() const { return bindings_; }

 private:
  ad::Tape& tape_;
  bool training_;
  std::vector<Binding> bindings_;
};

class Module {
 public:
  virtual ~Module() = default;
  virtual ad::Var forward(ForwardContext& ctx, ad::Var x) = 0;
  /// Appends parameters and buffers in a fixed order.
  virtual void collect(std::vector<Parameter*>& out) = 0;
  virtual void initialize(std::mt19937_64& rng) = 0;
};

/// Order of the two layers that follow every tensor convolution.
enum class NormOrder { bn_then_prelu, prelu_then_bn };

/// Tensor convolution: each output cell sums contract(U_i, W_i, r) over the
/// k x k x m window. The neuron tensor shape is derived from the input and
/// output cells: reversed(trailing r input extents) ++ (output extents past
/// the kept prefix). No bias.
class TensorConvLayer : public Module {
 public:
  struct Config {
    std::size_t in_channels = 1;
    std::size_t out_channels = 1;
    std::size_t kernel = 3;
    std::size_t stride = 1;
    std::size_t pad = 0;
    std::size_t contract = 1;
    Shape in_cell;
    Shape out_cell;
  };

  TensorConvLayer(std::string name, const Config& config);

  ad::Var forward(ForwardContext& ctx, ad::Var x) override;
  void collect(std::vector<Parameter*>& out) override { out.push_back(&weight_); }
  void initialize(std::mt19937_64& rng) override;

  /// Geometry for a given input map extent.
  TensorConvGeometry geometry(std::size_t height, std::size_t width) const;
  const Config& config() const { return config_; }
  const Shape& weight_cell() const { return weight_cell_; }
  Parameter& weight() { return weight_; }
  /// Contracted weight elements per output component times k*k*m.
  std::size_t fan_in() const;

  /// Neuron tensor shape for a cell transformation, or IncompatibleSpec.
  static Shape derive_weight_cell(const Shape& in_cell, const Shape& out_cell, std::size_t contract);

 private:
  Config config_;
  Shape weight_cell_;
  Parameter weight_;
};

/// One learnable slope per channel, initialised to 0.25.
class PReLULayer : public Module {
 public:
  PReLULayer(std::string name, std::size_t channels);
  ad::Var forward(ForwardContext& ctx, ad::Var x) override;
  void collect(std::vector<Parameter*>& out) override { out.push_back(&slope_); }
  void initialize(std::mt19937_64&) override { slope_.value.fill(Real(0.25)); }
  Parameter& slope() { return slope_; }

 private:
  Parameter slope_;
};

/// Scale and shift per (channel, cell component).
class BatchNormLayer : public Module {
 public:
  BatchNormLayer(std::string name, std::size_t channels, const Shape& cell);
  ad::Var forward(ForwardContext& ctx, ad::Var x) override;
  void collect(std::vector<Parameter*>& out) override;
  void initialize(std::mt19937_64&) override;

  Parameter& gamma() { return gamma_; }
  Parameter& beta() { return beta_; }
  Parameter& running_mean() { return running_mean_; }
  Parameter& running_var() { return running_var_; }
  /// Skips normalisation entirely (identity); used by residual-path tests.
  void set_bypass(bool bypass) { bypass_ = bypass; }

 private:
  Parameter gamma_, beta_, running_mean_, running_var_;
  bool bypass_ = false;
};

/// Tensor convolution followed by BatchNorm and PReLU in the chosen order.
/// Either trailing layer may be omitted.
class ConvUnit : public Module {
 public:
  ConvUnit(std::string name, const TensorConvLayer::Config& config, bool with_norm, bool with_activation,
           NormOrder order);
  ad::Var forward(ForwardContext& ctx, ad::Var x) override;
  void collect(std::vector<Parameter*>& out) override;
  void initialize(std::mt19937_64& rng) override;

  TensorConvLayer& conv() { return conv_; }
  BatchNormLayer* norm() { return norm_.get(); }
  PReLULayer* activation() { return act_.get(); }

 private:
  TensorConvLayer conv_;
  std::unique_ptr<BatchNormLayer> norm_;
  std::unique_ptr<PReLULayer> act_;
  NormOrder order_;
};

enum class BlockKind { triple, quadruple };
enum class SkipKind { identity, subsample, projection };

/// Residual tensor block: out = skip(in) + units(in). The first unit may
/// downsample (stride 2, pad 0); the remaining units preserve the map
/// (k = 3, s = 1, p = 1). A downsampling block skips through a strided
/// subsample of the window centres; if channels or cells also change, the
/// subsample feeds a learned 1x1 tensor convolution.
class ResidualBlock : public Module {
 public:
  struct Config {
    BlockKind kind = BlockKind::triple;
    std::size_t in_channels = 1;
    std::size_t out_channels = 1;
    Shape in_cell;
    Shape out_cell;
    /// Contraction count of the first unit (cell change allowed there).
    std::size_t first_contract = 1;
    /// Contraction count of the remaining cell-preserving units.
    std::size_t contract = 1;
    std::size_t stride = 1;
    NormOrder order = NormOrder::bn_then_prelu;
  };

  ResidualBlock(std::string name, const Config& config);
  ad::Var forward(ForwardContext& ctx, ad::Var x) override;
  void collect(std::vector<Parameter*>& out) override;
  void initialize(std::mt19937_64& rng) override;

  SkipKind skip_kind() const { return skip_; }
  std::size_t unit_count() const { return units_.size(); }
  ConvUnit& unit(std::size_t i) { return *units_[i]; }
  TensorConvLayer* projection() { return projection_.get(); }
  const Config& config() const { return config_; }

  /// Output spatial extent for an input extent.
  std::size_t out_extent(std::size_t in) const;

 private:
  Config config_;
  std::vector<std::unique_ptr<ConvUnit>> units_;
  SkipKind skip_;
  std::unique_ptr<TensorConvLayer> projection_;
};

/// Scalar convolution with a per-channel bias over [N, m, H, W] maps.
class Conv2dLayer : public Module {
 public:
  Conv2dLayer(std::string name, std::size_t in_channels, std::size_t out_channels, std::size_t kernel,
              std::size_t stride, std::size_t pad);
  ad::Var forward(ForwardContext& ctx, ad::Var x) override;
  void collect(std::vector<Parameter*>& out) override;
  void initialize(std::mt19937_64& rng) override;
  TensorConvGeometry geometry(std::size_t height, std::size_t width) const;
  Parameter& weight() { return weight_; }
  Parameter& bias() { return bias_; }

 private:
  std::size_t in_, out_, kernel_, stride_, pad_;
  Parameter weight_, bias_;
};

/// Fully connected layer over [N, features] (flattens its input).
class LinearLayer : public Module {
 public:
  LinearLayer(std::string name, std::size_t in_features, std::size_t out_features);
  ad::Var forward(ForwardContext& ctx, ad::Var x) override;
  void collect(std::vector<Parameter*>& out) override;
  void initialize(std::mt19937_64& rng) override;
  Parameter& weight() { return weight_; }
  Parameter& bias() { return bias_; }

 private:
  std::size_t in_, out_;
  Parameter weight_, bias_;
};

class ReLULayer : public Module {
 public:
  ad::Var forward(ForwardContext&, ad::Var x) override { return ad::relu(x); }
  void collect(std::vector<Parameter*>&) override {}
  void initialize(std::mt19937_64&) override {}
};

/// Fills `t` with N(0, std^2) draws.
void fill_normal(Tensor& t, Real stddev, std::mt19937_64& rng);

}  // namespace tenconv
