#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "tenconv/layers.hpp"

namespace tenconv {

enum class LayerKind {
  block,           // residual tensor block (triple or quadruple)
  tensor_conv,     // tensor convolution + BatchNorm + PReLU
  final_compress,  // tensor convolution down to scalar class logits
  conv2d,          // scalar convolution with bias
  relu,
  linear,          // fully connected, flattens its input
};

/// How image pixels enter the first layer.
enum class InputMode {
  tensor_cells,  // one channel whose cells are [C, 1] pixel vectors
  scalar_maps,   // C channels of scalar cells (plain CNNs)
};

struct LayerSpec {
  LayerKind kind = LayerKind::tensor_conv;
  BlockKind block = BlockKind::triple;
  std::size_t channels = 1;  // output channels / units
  std::size_t kernel = 3;
  std::size_t stride = 1;
  std::size_t pad = 0;
  std::vector<std::size_t> cell;  // output cell extents (tensor layers)
  std::size_t contract = 0;       // r of the cell-preserving transformations
  std::size_t first_contract = 0; // r of a block's first unit; 0 means `contract`

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct ModelSpec {
  std::string name;
  std::size_t height = 1;
  std::size_t width = 1;
  std::size_t channels = 1;
  InputMode input_mode = InputMode::tensor_cells;
  std::size_t classes = 10;
  NormOrder norm_order = NormOrder::bn_then_prelu;
  std::vector<LayerSpec> layers;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

/// Output of one spec row.
struct RowShape {
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  Shape cell;
  bool flat = false;  // [N, channels] after a linear layer

  /// "15x15x[6,6,6,6] (1 ch)" style description.
  std::string str() const;
};

/// Walks the model description row by row, checking that consecutive rows fit. Throws
/// IncompatibleSpec naming the first offending row.
std::vector<RowShape> trace_shapes(const ModelSpec& spec);

/// Cell shape the first layer receives.
RowShape input_row(const ModelSpec& spec);

std::string to_json(const ModelSpec& spec);
/// Parses a JSON model description; unknown keys and malformed documents
/// raise IncompatibleSpec.
ModelSpec spec_from_json(const std::string& text);
ModelSpec load_spec_file(const std::string& path);

/// FNV-1a digest of the canonical JSON form.
std::uint64_t spec_digest(const ModelSpec& spec);

std::string layer_label(const LayerSpec& layer, std::size_t index);

// --- builtin architectures -------------------------------------------------

/// tcnn0 (classes = 10) and tcnn1 (classes = 100): six triple blocks over
/// 32x32 RGB with [6,6,6,6] cells, then a 3x3 compression to class logits.
ModelSpec make_tcnn0(std::size_t classes = 10);
/// tcnn2: eight triple blocks over 64x64 RGB with [3,3,3,3,3,3] cells,
/// 200 classes.
ModelSpec make_tcnn2(std::size_t classes = 200);

/// Plain depth-4 MNIST networks. TCNN: three tensor convolutions
/// (k3, s2; [e,e,e,e] cells) and a compression layer. CNN: two
/// convolutions and two fully connected layers.
struct MnistTcnnKnobs {
  std::size_t c1 = 7, c2 = 8, c3 = 7;
  std::size_t cell_extent = 2;
};
struct MnistCnnKnobs {
  std::size_t conv1 = 8, conv2 = 8;
  std::size_t kernel1 = 3, stride1 = 2;
  std::size_t kernel2 = 3, stride2 = 2;
  std::size_t hidden = 72;
};
ModelSpec make_mnist_tcnn(const MnistTcnnKnobs& knobs, std::string name = "mnist-tcnn");
ModelSpec make_mnist_cnn(const MnistCnnKnobs& knobs, std::string name = "mnist-cnn");

/// Residual model on small inputs used by gradient checks: one triple block
/// over an 8x8 single-channel image with [2,2,2,2] cells, then compression.
ModelSpec make_micro_tcnn(std::size_t image = 8, std::size_t classes = 3);

/// Names accepted by builtin_spec().
std::vector<std::string> builtin_names();
ModelSpec builtin_spec(const std::string& name);

}  // namespace tenconv
