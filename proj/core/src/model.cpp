#include "tenconv/model.hpp"

#include <random>

#include "tenconv/error.hpp"

namespace tenconv {

// The JSON round trip canonicalises fields a layer kind does not use, so a
// model's spec compares equal to the one read back from its checkpoint.
Model::Model(ModelSpec spec, std::uint64_t seed)
    : spec_(spec_from_json(to_json(spec))), rows_(trace_shapes(spec_)) {
  RowShape cur = input_row(spec_);
  for (std::size_t i = 0; i < spec_.layers.size(); ++i) {
    const LayerSpec& l = spec_.layers[i];
    const RowShape& next = rows_[i];
    const std::string name = layer_label(l, i);
    switch (l.kind) {
      case LayerKind::block: {
        ResidualBlock::Config c;
        c.kind = l.block;
        c.in_channels = cur.channels;
        c.out_channels = next.channels;
        c.in_cell = cur.cell;
        c.out_cell = next.cell;
        c.contract = l.contract;
        c.first_contract = l.first_contract ? l.first_contract : l.contract;
        c.stride = l.stride;
        c.order = spec_.norm_order;
        layers_.push_back(std::make_unique<ResidualBlock>(name, c));
        break;
      }
      case LayerKind::tensor_conv:
      case LayerKind::final_compress: {
        TensorConvLayer::Config c;
        c.in_channels = cur.channels;
        c.out_channels = next.channels;
        c.kernel = l.kernel;
        c.stride = l.stride;
        c.pad = l.pad;
        c.contract = l.contract;
        c.in_cell = cur.cell;
        c.out_cell = next.cell;
        if (l.kind == LayerKind::final_compress) {
          layers_.push_back(std::make_unique<TensorConvLayer>(name, c));
        } else {
          layers_.push_back(std::make_unique<ConvUnit>(name, c, true, true, spec_.norm_order));
        }
        break;
      }
      case LayerKind::conv2d:
        layers_.push_back(std::make_unique<Conv2dLayer>(name, cur.channels, next.channels, l.kernel, l.stride, l.pad));
        break;
      case LayerKind::relu:
        layers_.push_back(std::make_unique<ReLULayer>());
        break;
      case LayerKind::linear: {
        const std::size_t in = cur.flat ? cur.channels : cur.channels * cur.height * cur.width;
        layers_.push_back(std::make_unique<LinearLayer>(name, in, next.channels));
        break;
      }
    }
    cur = next;
  }
  for (auto& layer : layers_) layer->collect(params_);
  initialize(seed);
}

void Model::initialize(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (auto& layer : layers_) layer->initialize(rng);
}

ad::Var Model::adapt_input(ad::Var images) const {
  const Shape& s = images.shape();
  if (s.rank() != 4 || s[1] != spec_.channels || s[2] != spec_.height || s[3] != spec_.width) {
    throw ShapeMismatch(spec_.name + " expects [N, " + std::to_string(spec_.channels) + ", " +
                        std::to_string(spec_.height) + ", " + std::to_string(spec_.width) + "] images, got " + s.str());
  }
  if (spec_.input_mode == InputMode::scalar_maps) return images;
  ad::Var hwc = ad::permute(images, {0, 2, 3, 1});
  return ad::reshape(hwc, Shape{s[0], 1, s[2], s[3], s[1], 1});
}

std::vector<ad::Var> Model::forward_trace(ForwardContext& ctx, ad::Var images) {
  std::vector<ad::Var> outs;
  ad::Var x = adapt_input(images);
  for (auto& layer : layers_) {
    x = layer->forward(ctx, x);
    outs.push_back(x);
  }
  return outs;
}

ad::Var Model::forward(ForwardContext& ctx, ad::Var images) { return forward_trace(ctx, images).back(); }

Tensor Model::predict(const Tensor& images) {
  ad::Tape tape;
  ForwardContext ctx(tape, false);
  return flatten_logits(forward(ctx, tape.input(images)).value());
}

std::vector<Parameter*> Model::trainable() const {
  std::vector<Parameter*> out;
  for (Parameter* p : params_) {
    if (p->trainable) out.push_back(p);
  }
  return out;
}

std::size_t Model::parameter_count() const {
  std::size_t n = 0;
  for (const Parameter* p : params_) {
    if (p->trainable) n += p->value.numel();
  }
  return n;
}

std::vector<Tensor> Model::snapshot() const {
  std::vector<Tensor> out;
  out.reserve(params_.size());
  for (const Parameter* p : params_) out.push_back(p->value);
  return out;
}

void Model::restore(const std::vector<Tensor>& values) {
  if (values.size() != params_.size()) {
    throw ShapeMismatch(spec_.name + " has " + std::to_string(params_.size()) + " parameter tensors, got " +
                        std::to_string(values.size()));
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i].shape() == params_[i]->value.shape())) {
      throw ShapeMismatch(params_[i]->name + " is " + params_[i]->value.shape().str() + ", got " +
                          values[i].shape().str());
    }
  }
  for (std::size_t i = 0; i < values.size(); ++i) params_[i]->value = values[i];
}

Tensor flatten_logits(const Tensor& logits) {
  const Shape& s = logits.shape();
  if (s.rank() == 2) return logits;
  if (s.rank() == 4 && s[2] == 1 && s[3] == 1) return logits.reshaped(Shape{s[0], s[1]});
  throw ShapeMismatch("logits must be [N, C] or [N, C, 1, 1], got " + s.str());
}

}  // namespace tenconv
