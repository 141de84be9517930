#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "tenconv/audit.hpp"
#include "tenconv/data.hpp"
#include "tenconv/model.hpp"
#include "tenconv/optimizer.hpp"

namespace tenconv {

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t batch_size = 64;
  std::size_t max_epochs = 30;
  /// Epochs without a validation-loss improvement before stopping.
  std::size_t patience = 3;
  std::uint64_t seed = 0;
  /// Workers for validation passes; training itself is sequential.
  std::size_t threads = 1;

  /// ConfigError on a non-positive field.
  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0;
  double val_loss = 0;
  double val_acc = 0;
  /// Hash of the training set as stored, taken before shuffling.
  std::uint64_t data_hash = 0;
  double seconds = 0;
};

struct ExperimentReport {
  std::string model;
  std::size_t parameters = 0;
  TrainConfig config;
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  double best_val_loss = 0;
  double best_val_acc = 0;
  bool stopped_early = false;
  double wall_seconds = 0;
  ParamAudit audit;
};

struct EvalResult {
  double loss = 0;
  double accuracy = 0;
  std::size_t correct = 0;
  std::size_t count = 0;
};

/// Tracks the lowest validation loss; strictly lower counts as improvement.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience) : patience_(patience) {}
  /// Records the epoch's loss; returns true when training should stop.
  bool update(std::size_t epoch, double val_loss);
  /// True when the last update set a new best.
  bool improved() const { return improved_; }
  std::size_t best_epoch() const { return best_epoch_; }
  double best_loss() const { return best_loss_; }

 private:
  std::size_t patience_;
  std::size_t best_epoch_ = 0;
  double best_loss_ = 0;
  bool improved_ = false;
};

/// Inference-mode mean loss and top-1 accuracy. Batches may run on
/// `threads` workers; the reduction order is fixed. DataEmpty on an empty set.
EvalResult evaluate(Model& model, const LabeledImageSet& set, std::size_t batch_size = 256, std::size_t threads = 1);

/// One forward/backward/Adam update on a batch in training mode; returns
/// the batch loss before the update. NumericError on a non-finite loss.
double train_step(Model& model, Adam& optimizer, const Tensor& images, std::span<const int> labels);

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Seeded shuffling, Adam updates and early stopping on validation loss.
/// On return the model holds the parameters of the best epoch. DataEmpty on
/// an empty split; NumericError names the failing epoch and batch.
ExperimentReport train(Model& model, const LabeledImageSet& train_set, const LabeledImageSet& val_set,
                       const TrainConfig& config, const EpochCallback& on_epoch = {});

}  // namespace tenconv
