#include "tenconv/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <random>

#include <zlib.h>

#include "tenconv/error.hpp"

namespace tenconv {

namespace fs = std::filesystem;

Tensor LabeledImageSet::gather(std::span<const std::size_t> indices) const {
  const Shape& s = images.shape();
  const std::size_t stride = s[1] * s[2] * s[3];
  Tensor out(Shape{indices.size(), s[1], s[2], s[3]});
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= size()) throw OutOfBounds("sample " + std::to_string(indices[i]) + " of " + std::to_string(size()));
    std::copy_n(images.raw() + indices[i] * stride, stride, out.raw() + i * stride);
  }
  return out;
}

std::vector<int> LabeledImageSet::gather_labels(std::span<const std::size_t> indices) const {
  std::vector<int> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(labels.at(i));
  return out;
}

namespace {

std::vector<unsigned char> read_file(const std::string& path) {
  gzFile f = gzopen(path.c_str(), "rb");
  if (!f) throw IoError("cannot open " + path);
  std::vector<unsigned char> bytes;
  unsigned char buf[1 << 16];
  int n = 0;
  while ((n = gzread(f, buf, sizeof buf)) > 0) bytes.insert(bytes.end(), buf, buf + n);
  const bool failed = n < 0;
  gzclose(f);
  if (failed) throw FormatError(path + ": corrupt compressed stream");
  return bytes;
}

std::uint32_t big_endian(const std::vector<unsigned char>& b, std::size_t at) {
  return (std::uint32_t{b[at]} << 24) | (std::uint32_t{b[at + 1]} << 16) | (std::uint32_t{b[at + 2]} << 8) |
         std::uint32_t{b[at + 3]};
}

void expect_bytes(const std::string& path, std::size_t expected, std::size_t actual) {
  if (actual != expected) {
    throw FormatError(path + ": expected " + std::to_string(expected) + " bytes, found " + std::to_string(actual));
  }
}

}  // namespace

LabeledImageSet load_mnist(const std::string& images_path, const std::string& labels_path) {
  const std::vector<unsigned char> img = read_file(images_path);
  const std::vector<unsigned char> lab = read_file(labels_path);
  if (img.size() < 16 || big_endian(img, 0) != 0x00000803) throw FormatError(images_path + ": bad IDX image magic");
  if (lab.size() < 8 || big_endian(lab, 0) != 0x00000801) throw FormatError(labels_path + ": bad IDX label magic");
  const std::size_t n = big_endian(img, 4), rows = big_endian(img, 8), cols = big_endian(img, 12);
  const std::size_t n_labels = big_endian(lab, 4);
  if (n != n_labels) {
    throw FormatError("image count " + std::to_string(n) + " differs from label count " + std::to_string(n_labels));
  }
  if (n == 0 || rows == 0 || cols == 0) throw FormatError(images_path + ": empty image set");
  expect_bytes(images_path, 16 + n * rows * cols, img.size());
  expect_bytes(labels_path, 8 + n, lab.size());

  LabeledImageSet set;
  set.classes = 10;
  set.images = Tensor(Shape{n, 1, rows, cols});
  for (std::size_t i = 0; i < n * rows * cols; ++i) set.images[i] = static_cast<Real>(img[16 + i]) / Real(255);
  set.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (lab[8 + i] > 9) throw FormatError(labels_path + ": label " + std::to_string(lab[8 + i]) + " out of range");
    set.labels[i] = lab[8 + i];
  }
  return set;
}

LabeledImageSet load_cifar(const std::vector<std::string>& paths, int variant) {
  if (variant != 10 && variant != 100) throw FormatError("CIFAR variant must be 10 or 100");
  if (paths.empty()) throw DataEmpty("no CIFAR batch files given");
  const std::size_t label_bytes = variant == 10 ? 1 : 2;
  const std::size_t pixels = 3 * 32 * 32;
  const std::size_t record = label_bytes + pixels;

  std::vector<std::vector<unsigned char>> files;
  std::size_t n = 0;
  for (const std::string& p : paths) {
    files.push_back(read_file(p));
    if (files.back().empty() || files.back().size() % record != 0) {
      throw FormatError(p + ": size " + std::to_string(files.back().size()) + " is not a multiple of the " +
                        std::to_string(record) + "-byte record");
    }
    n += files.back().size() / record;
  }

  LabeledImageSet set;
  set.classes = static_cast<std::size_t>(variant);
  set.images = Tensor(Shape{n, 3, 32, 32});
  set.labels.reserve(n);
  Real* dst = set.images.raw();
  for (std::size_t f = 0; f < files.size(); ++f) {
    const std::vector<unsigned char>& b = files[f];
    for (std::size_t at = 0; at < b.size(); at += record) {
      const int label = b[at + label_bytes - 1];
      if (label >= variant) throw FormatError(paths[f] + ": label " + std::to_string(label) + " out of range");
      set.labels.push_back(label);
      for (std::size_t i = 0; i < pixels; ++i) *dst++ = static_cast<Real>(b[at + label_bytes + i]) / Real(255);
    }
  }
  return set;
}

std::string data_root(const std::string& fallback) {
  if (const char* env = std::getenv("TENCONV_DATA_DIR"); env && *env) return env;
  return fallback;
}

namespace {

std::string existing(const fs::path& base) {
  if (fs::exists(base)) return base.string();
  fs::path gz = base;
  gz += ".gz";
  if (fs::exists(gz)) return gz.string();
  throw DataEmpty("missing dataset file " + base.string() + "[.gz]");
}

}  // namespace

LabeledImageSet load_dataset(const std::string& name, const std::string& root, Split split) {
  const fs::path r(root);
  if (name == "mnist") {
    const std::string prefix = split == Split::train ? "train" : "t10k";
    return load_mnist(existing(r / "mnist" / (prefix + "-images-idx3-ubyte")),
                      existing(r / "mnist" / (prefix + "-labels-idx1-ubyte")));
  }
  if (name == "cifar10") {
    std::vector<std::string> paths;
    if (split == Split::train) {
      for (int i = 1; i <= 5; ++i) paths.push_back(existing(r / "cifar-10-batches-bin" / ("data_batch_" + std::to_string(i) + ".bin")));
    } else {
      paths.push_back(existing(r / "cifar-10-batches-bin" / "test_batch.bin"));
    }
    return load_cifar(paths, 10);
  }
  if (name == "cifar100") {
    return load_cifar({existing(r / "cifar-100-binary" / (split == Split::train ? "train.bin" : "test.bin"))}, 100);
  }
  throw DataEmpty("unknown dataset '" + name + "'");
}

// --- synthetic ------------------------------------------------------------------

std::vector<double> synthetic_direction(const SyntheticConfig& c) {
  std::mt19937_64 rng(c.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> u(c.channels * c.height * c.width);
  double norm = 0;
  for (double& x : u) {
    x = normal(rng);
    norm += x * x;
  }
  norm = std::sqrt(norm);
  for (double& x : u) x /= norm;
  return u;
}

LabeledImageSet make_synthetic(const SyntheticConfig& c) {
  if (c.classes == 0 || c.per_class == 0 || c.channels == 0 || c.height == 0 || c.width == 0 || !(c.sigma > 0) ||
      !(c.margin >= 0)) {
    throw DataEmpty("synthetic dataset parameters must be positive");
  }
  const std::vector<double> u = synthetic_direction(c);
  const std::size_t d = u.size();
  const std::size_t n = c.classes * c.per_class;
  std::mt19937_64 rng(c.seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> normal(0.0, c.sigma);

  LabeledImageSet set;
  set.classes = c.classes;
  set.images = Tensor(Shape{n, c.channels, c.height, c.width});
  set.labels.resize(n);
  std::vector<double> x(d);
  const double half = 0.5 * c.margin * c.sigma;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t label = i % c.classes;
    const double centre = (static_cast<double>(label) - 0.5 * static_cast<double>(c.classes - 1)) * c.margin * c.sigma;
    for (;;) {
      double proj = 0;
      for (std::size_t j = 0; j < d; ++j) {
        x[j] = std::clamp(0.5 + centre * u[j] + normal(rng), 0.0, 1.0);
        proj += (x[j] - 0.5) * u[j];
      }
      if (c.margin == 0 || std::abs(proj - centre) < half) break;
    }
    set.labels[i] = static_cast<int>(label);
    Real* dst = set.images.raw() + i * d;
    for (std::size_t j = 0; j < d; ++j) dst[j] = static_cast<Real>(x[j]);
  }
  return set;
}

LabeledImageSet head(const LabeledImageSet& set, std::size_t count) {
  if (count >= set.size()) return set;
  LabeledImageSet out;
  out.classes = set.classes;
  if (count == 0) return out;
  std::vector<std::size_t> idx(count);
  for (std::size_t i = 0; i < count; ++i) idx[i] = i;
  out.images = set.gather(idx);
  out.labels.assign(set.labels.begin(), set.labels.begin() + static_cast<std::ptrdiff_t>(count));
  return out;
}

std::uint64_t dataset_hash(const LabeledImageSet& set) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* p, std::size_t bytes) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < bytes; ++i) {
      h ^= b[i];
      h *= 1099511628211ULL;
    }
  };
  mix(set.images.raw(), set.images.numel() * sizeof(Real));
  mix(set.labels.data(), set.labels.size() * sizeof(int));
  return h;
}

std::vector<std::size_t> epoch_permutation(std::size_t n, std::uint64_t seed, std::size_t epoch) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(epoch), static_cast<std::uint32_t>(epoch >> 32)};
  std::mt19937_64 rng(seq);
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

BatchSampler::BatchSampler(const LabeledImageSet& set, std::size_t batch_size, std::uint64_t seed, std::size_t epoch)
    : set_(set), batch_size_(batch_size) {
  if (set.size() == 0) throw DataEmpty("cannot batch an empty dataset");
  if (batch_size == 0) throw DataEmpty("batch size must be at least 1");
  order_ = epoch_permutation(set.size(), seed, epoch);
}

BatchSampler::BatchSampler(const LabeledImageSet& set, std::size_t batch_size) : set_(set), batch_size_(batch_size) {
  if (set.size() == 0) throw DataEmpty("cannot batch an empty dataset");
  if (batch_size == 0) throw DataEmpty("batch size must be at least 1");
  order_.resize(set.size());
  for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
}

std::size_t BatchSampler::batch_count() const { return (order_.size() + batch_size_ - 1) / batch_size_; }

bool BatchSampler::next(Batch& batch) {
  if (pos_ >= order_.size()) return false;
  const std::size_t end = std::min(order_.size(), pos_ + batch_size_);
  batch.indices.assign(order_.begin() + static_cast<std::ptrdiff_t>(pos_), order_.begin() + static_cast<std::ptrdiff_t>(end));
  batch.images = set_.gather(batch.indices);
  batch.labels = set_.gather_labels(batch.indices);
  pos_ = end;
  return true;
}

}  // namespace tenconv
