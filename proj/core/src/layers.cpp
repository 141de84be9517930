#include "tenconv/layers.hpp"

#include <cmath>

#include "tenconv/error.hpp"

namespace tenconv {

void fill_normal(Tensor& t, Real stddev, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, static_cast<double>(stddev));
  for (Real& v : t.data()) v = static_cast<Real>(dist(rng));
}

ad::Var ForwardContext::bind(Parameter& p) {
  ad::Var v = tape_.parameter(p.value);
  bindings_.push_back({&p, v});
  return v;
}

// ---------------------------------------------------------------------------

Shape TensorConvLayer::derive_weight_cell(const Shape& in_cell, const Shape& out_cell, std::size_t contract) {
  if (contract > in_cell.rank()) {
    throw IncompatibleSpec("contract count " + std::to_string(contract) + " exceeds input cell " + in_cell.str());
  }
  const std::size_t kept = in_cell.rank() - contract;
  if (out_cell.rank() < kept || !(out_cell.slice(0, kept) == in_cell.slice(0, kept))) {
    throw IncompatibleSpec("output cell " + out_cell.str() + " does not start with the kept extents of input cell " +
                           in_cell.str() + " (r = " + std::to_string(contract) + ")");
  }
  return in_cell.slice(kept, in_cell.rank()).reversed().concat(out_cell.slice(kept, out_cell.rank()));
}

TensorConvLayer::TensorConvLayer(std::string name, const Config& config)
    : config_(config), weight_cell_(derive_weight_cell(config.in_cell, config.out_cell, config.contract)) {
  if (config.kernel == 0 || config.stride == 0 || config.in_channels == 0 || config.out_channels == 0) {
    throw IncompatibleSpec(name + ": kernel, stride and channels must be positive");
  }
  weight_.name = std::move(name) + ".weight";
  weight_.value = Tensor(Shape{config.out_channels, config.in_channels, config.kernel, config.kernel}.concat(weight_cell_));
}

TensorConvGeometry TensorConvLayer::geometry(std::size_t height, std::size_t width) const {
  TensorConvGeometry g;
  g.in_channels = config_.in_channels;
  g.out_channels = config_.out_channels;
  g.height = height;
  g.width = width;
  g.kernel = config_.kernel;
  g.stride = config_.stride;
  g.pad = config_.pad;
  g.contract = config_.contract;
  g.in_cell = config_.in_cell;
  g.weight_cell = weight_cell_;
  return g;
}

std::size_t TensorConvLayer::fan_in() const {
  return weight_cell_.slice(0, config_.contract).numel() * config_.kernel * config_.kernel * config_.in_channels;
}

void TensorConvLayer::initialize(std::mt19937_64& rng) {
  fill_normal(weight_.value, std::sqrt(Real(2) / static_cast<Real>(fan_in())), rng);
}

ad::Var TensorConvLayer::forward(ForwardContext& ctx, ad::Var x) {
  const Shape& s = x.shape();
  if (s.rank() < 4) throw ShapeMismatch(weight_.name + ": input " + s.str() + " is not a feature map");
  return ad::tensor_conv(x, ctx.bind(weight_), geometry(s[2], s[3]));
}

// ---------------------------------------------------------------------------

PReLULayer::PReLULayer(std::string name, std::size_t channels) {
  slope_.name = std::move(name) + ".slope";
  slope_.value = Tensor::full(Shape{channels}, Real(0.25));
}

ad::Var PReLULayer::forward(ForwardContext& ctx, ad::Var x) { return ad::prelu(x, ctx.bind(slope_)); }

// ---------------------------------------------------------------------------

BatchNormLayer::BatchNormLayer(std::string name, std::size_t channels, const Shape& cell) {
  const Shape shape = Shape{channels}.concat(cell);
  gamma_ = {name + ".gamma", Tensor::full(shape, 1), true};
  beta_ = {name + ".beta", Tensor(shape), true};
  running_mean_ = {name + ".running_mean", Tensor(shape), false};
  running_var_ = {name + ".running_var", Tensor::full(shape, 1), false};
}

void BatchNormLayer::collect(std::vector<Parameter*>& out) {
  out.push_back(&gamma_);
  out.push_back(&beta_);
  out.push_back(&running_mean_);
  out.push_back(&running_var_);
}

void BatchNormLayer::initialize(std::mt19937_64&) {
  gamma_.value.fill(1);
  beta_.value.fill(0);
  running_mean_.value.fill(0);
  running_var_.value.fill(1);
}

ad::Var BatchNormLayer::forward(ForwardContext& ctx, ad::Var x) {
  if (bypass_) return x;
  ad::BatchNormOptions options;
  options.training = ctx.training();
  return ad::batch_norm(x, ctx.bind(gamma_), ctx.bind(beta_), running_mean_.value, running_var_.value, options);
}

// ---------------------------------------------------------------------------

ConvUnit::ConvUnit(std::string name, const TensorConvLayer::Config& config, bool with_norm, bool with_activation,
                   NormOrder order)
    : conv_(name + ".conv", config), order_(order) {
  if (with_norm) norm_ = std::make_unique<BatchNormLayer>(name + ".bn", config.out_channels, config.out_cell);
  if (with_activation) act_ = std::make_unique<PReLULayer>(name + ".prelu", config.out_channels);
}

ad::Var ConvUnit::forward(ForwardContext& ctx, ad::Var x) {
  ad::Var y = conv_.forward(ctx, x);
  if (order_ == NormOrder::bn_then_prelu) {
    if (norm_) y = norm_->forward(ctx, y);
    if (act_) y = act_->forward(ctx, y);
  } else {
    if (act_) y = act_->forward(ctx, y);
    if (norm_) y = norm_->forward(ctx, y);
  }
  return y;
}

void ConvUnit::collect(std::vector<Parameter*>& out) {
  conv_.collect(out);
  if (norm_) norm_->collect(out);
  if (act_) act_->collect(out);
}

void ConvUnit::initialize(std::mt19937_64& rng) {
  conv_.initialize(rng);
  if (norm_) norm_->initialize(rng);
  if (act_) act_->initialize(rng);
}

// ---------------------------------------------------------------------------

ResidualBlock::ResidualBlock(std::string name, const Config& config) : config_(config) {
  if (config.stride == 0) throw IncompatibleSpec(name + ": stride must be positive");
  const std::size_t count = config.kind == BlockKind::triple ? 3 : 4;
  for (std::size_t i = 0; i < count; ++i) {
    TensorConvLayer::Config c;
    c.kernel = 3;
    c.out_channels = config.out_channels;
    c.out_cell = config.out_cell;
    if (i == 0) {
      c.in_channels = config.in_channels;
      c.in_cell = config.in_cell;
      c.stride = config.stride;
      c.pad = config.stride == 1 ? 1 : 0;
      c.contract = config.first_contract;
    } else {
      c.in_channels = config.out_channels;
      c.in_cell = config.out_cell;
      c.stride = 1;
      c.pad = 1;
      c.contract = config.contract;
    }
    units_.push_back(std::make_unique<ConvUnit>(name + ".unit" + std::to_string(i), c, true, true, config.order));
  }

  const bool same_cells = config.in_channels == config.out_channels && config.in_cell == config.out_cell;
  if (same_cells) {
    skip_ = config.stride == 1 ? SkipKind::identity : SkipKind::subsample;
  } else {
    skip_ = SkipKind::projection;
    TensorConvLayer::Config c;
    c.in_channels = config.in_channels;
    c.out_channels = config.out_channels;
    c.kernel = 1;
    c.stride = 1;
    c.pad = 0;
    c.contract = config.first_contract;
    c.in_cell = config.in_cell;
    c.out_cell = config.out_cell;
    projection_ = std::make_unique<TensorConvLayer>(name + ".skip", c);
  }
}

std::size_t ResidualBlock::out_extent(std::size_t in) const {
  return conv_out_extent(in, 3, config_.stride, config_.stride == 1 ? 1 : 0);
}

ad::Var ResidualBlock::forward(ForwardContext& ctx, ad::Var x) {
  ad::Var path = x;
  for (auto& unit : units_) path = unit->forward(ctx, path);

  ad::Var skip = x;
  if (config_.stride > 1) {
    // Centre of each stride-s, pad-0, 3x3 window.
    skip = ad::subsample(skip, config_.stride, 1, path.shape()[2], path.shape()[3]);
  }
  if (projection_) skip = projection_->forward(ctx, skip);
  return ad::add(skip, path);
}

void ResidualBlock::collect(std::vector<Parameter*>& out) {
  for (auto& unit : units_) unit->collect(out);
  if (projection_) projection_->collect(out);
}

void ResidualBlock::initialize(std::mt19937_64& rng) {
  for (auto& unit : units_) unit->initialize(rng);
  if (projection_) projection_->initialize(rng);
}

// ---------------------------------------------------------------------------

Conv2dLayer::Conv2dLayer(std::string name, std::size_t in_channels, std::size_t out_channels, std::size_t kernel,
                         std::size_t stride, std::size_t pad)
    : in_(in_channels), out_(out_channels), kernel_(kernel), stride_(stride), pad_(pad) {
  if (kernel == 0 || stride == 0 || in_channels == 0 || out_channels == 0) {
    throw IncompatibleSpec(name + ": kernel, stride and channels must be positive");
  }
  weight_ = {name + ".weight", Tensor(Shape{out_channels, in_channels, kernel, kernel}), true};
  bias_ = {name + ".bias", Tensor(Shape{out_channels}), true};
}

TensorConvGeometry Conv2dLayer::geometry(std::size_t height, std::size_t width) const {
  TensorConvGeometry g;
  g.in_channels = in_;
  g.out_channels = out_;
  g.height = height;
  g.width = width;
  g.kernel = kernel_;
  g.stride = stride_;
  g.pad = pad_;
  g.contract = 0;
  return g;
}

ad::Var Conv2dLayer::forward(ForwardContext& ctx, ad::Var x) {
  const Shape& s = x.shape();
  if (s.rank() != 4) throw ShapeMismatch(weight_.name + ": expected a [N, m, H, W] map, got " + s.str());
  ad::Var y = ad::tensor_conv(x, ctx.bind(weight_), geometry(s[2], s[3]));
  return ad::add_channel_bias(y, ctx.bind(bias_));
}

void Conv2dLayer::collect(std::vector<Parameter*>& out) {
  out.push_back(&weight_);
  out.push_back(&bias_);
}

void Conv2dLayer::initialize(std::mt19937_64& rng) {
  fill_normal(weight_.value, std::sqrt(Real(2) / static_cast<Real>(in_ * kernel_ * kernel_)), rng);
  bias_.value.fill(0);
}

// ---------------------------------------------------------------------------

LinearLayer::LinearLayer(std::string name, std::size_t in_features, std::size_t out_features)
    : in_(in_features), out_(out_features) {
  weight_ = {name + ".weight", Tensor(Shape{out_features, in_features}), true};
  bias_ = {name + ".bias", Tensor(Shape{out_features}), true};
}

ad::Var LinearLayer::forward(ForwardContext& ctx, ad::Var x) {
  const Shape& s = x.shape();
  if (s.rank() != 2) x = ad::reshape(x, Shape{s[0], x.value().numel() / s[0]});
  return ad::linear(x, ctx.bind(weight_), ctx.bind(bias_));
}

void LinearLayer::collect(std::vector<Parameter*>& out) {
  out.push_back(&weight_);
  out.push_back(&bias_);
}

void LinearLayer::initialize(std::mt19937_64& rng) {
  fill_normal(weight_.value, std::sqrt(Real(2) / static_cast<Real>(in_)), rng);
  bias_.value.fill(0);
}

}  // namespace tenconv
