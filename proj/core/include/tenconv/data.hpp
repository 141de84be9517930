#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tenconv/tensor.hpp"

namespace tenconv {

/// Images [N, C, H, W] with pixels divided by 255 (no mean/std
/// normalisation) and labels in [0, classes).
struct LabeledImageSet {
  Tensor images;
  std::vector<int> labels;
  std::size_t classes = 0;

  std::size_t size() const { return labels.size(); }
  std::size_t channels() const { return images.shape()[1]; }
  std::size_t height() const { return images.shape()[2]; }
  std::size_t width() const { return images.shape()[3]; }
  /// Copies the listed samples, in order.
  Tensor gather(std::span<const std::size_t> indices) const;
  std::vector<int> gather_labels(std::span<const std::size_t> indices) const;
};

/// IDX image and label files, optionally gzip-compressed. IoError,
/// FormatError on bad magic, count mismatch or a short payload.
LabeledImageSet load_mnist(const std::string& images_path, const std::string& labels_path);

/// CIFAR binary batches: per record 1 label byte (2 for CIFAR-100, fine
/// label second) followed by 3072 pixel bytes.
LabeledImageSet load_cifar(const std::vector<std::string>& paths, int variant);

enum class Split { train, test };

/// Resolves the standard file layout below `root`:
///   mnist/{train,t10k}-{images-idx3,labels-idx1}-ubyte[.gz]
///   cifar-10-batches-bin/{data_batch_1..5,test_batch}.bin
///   cifar-100-binary/{train,test}.bin
/// Names: "mnist", "cifar10", "cifar100". DataEmpty when files are missing.
LabeledImageSet load_dataset(const std::string& name, const std::string& root, Split split);

/// Dataset root: TENCONV_DATA_DIR if set, otherwise `fallback`.
std::string data_root(const std::string& fallback);

struct SyntheticConfig {
  std::size_t classes = 2;
  std::size_t per_class = 100;
  std::size_t channels = 1;
  std::size_t height = 8;
  std::size_t width = 8;
  /// Distance between neighbouring class centres along the class
  /// direction, in units of sigma.
  double margin = 3.0;
  double sigma = 0.05;
  std::uint64_t seed = 0;
};

/// Gaussian class blobs around grey 0.5, with class centres spaced along
/// one random unit direction. Samples whose clipped projection strays more
/// than margin/2 sigma from their centre are redrawn, so classes are
/// separable by thresholds on that projection whenever margin > 0.
/// Classes are interleaved (sample i has label i % classes).
LabeledImageSet make_synthetic(const SyntheticConfig& config);
/// The class direction used by make_synthetic for the same config.
std::vector<double> synthetic_direction(const SyntheticConfig& config);

/// The first `count` samples (all when count >= size).
LabeledImageSet head(const LabeledImageSet& set, std::size_t count);

/// FNV-1a over pixel and label bytes in stored order.
std::uint64_t dataset_hash(const LabeledImageSet& set);

/// Permutation of [0, n) for (seed, epoch).
std::vector<std::size_t> epoch_permutation(std::size_t n, std::uint64_t seed, std::size_t epoch);

struct Batch {
  Tensor images;
  std::vector<int> labels;
  std::vector<std::size_t> indices;
};

/// Walks a seeded per-epoch permutation in batch_size steps; the final
/// partial batch is included.
class BatchSampler {
 public:
  BatchSampler(const LabeledImageSet& set, std::size_t batch_size, std::uint64_t seed, std::size_t epoch);
  /// Sequential order without shuffling.
  BatchSampler(const LabeledImageSet& set, std::size_t batch_size);

  std::size_t batch_count() const;
  bool next(Batch& batch);

 private:
  const LabeledImageSet& set_;
  std::size_t batch_size_;
  std::vector<std::size_t> order_;
  std::size_t pos_ = 0;
};

}  // namespace tenconv
