#include "tenconv/training.hpp"

#include <chrono>
#include <cmath>

#include "parallel.hpp"
#include "tenconv/error.hpp"
#include "tenconv/ops.hpp"

namespace tenconv {

void TrainConfig::validate() const {
  if (!(learning_rate > 0)) throw ConfigError("learning rate must be positive");
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  if (max_epochs == 0) throw ConfigError("max epochs must be positive");
  if (patience == 0) throw ConfigError("patience must be at least 1");
  if (threads == 0) throw ConfigError("threads must be at least 1");
}

bool EarlyStopping::update(std::size_t epoch, double val_loss) {
  improved_ = best_epoch_ == 0 || val_loss < best_loss_;
  if (improved_) {
    best_epoch_ = epoch;
    best_loss_ = val_loss;
  }
  return epoch - best_epoch_ >= patience_;
}

EvalResult evaluate(Model& model, const LabeledImageSet& set, std::size_t batch_size, std::size_t threads) {
  if (set.size() == 0) throw DataEmpty("cannot evaluate on an empty dataset");
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  const std::size_t batches = (set.size() + batch_size - 1) / batch_size;
  std::vector<double> loss_sums(batches);
  std::vector<std::size_t> hits(batches);
  detail::parallel_for(batches, threads, [&](std::size_t b) {
    std::vector<std::size_t> idx;
    for (std::size_t i = b * batch_size; i < std::min(set.size(), (b + 1) * batch_size); ++i) idx.push_back(i);
    const std::vector<int> labels = set.gather_labels(idx);
    ad::Tape tape;
    ForwardContext ctx(tape, false);
    ad::Var logits = model.forward(ctx, tape.input(set.gather(idx)));
    loss_sums[b] = static_cast<double>(ad::softmax_cross_entropy(logits, labels).value().item()) *
                   static_cast<double>(idx.size());
    const Tensor z = flatten_logits(logits.value());
    const std::size_t classes = z.shape()[1];
    for (std::size_t i = 0; i < idx.size(); ++i) {
      const Real* row = z.raw() + i * classes;
      if (std::max_element(row, row + classes) - row == labels[i]) ++hits[b];
    }
  });
  EvalResult r;
  r.count = set.size();
  for (std::size_t b = 0; b < batches; ++b) {
    r.loss += loss_sums[b];
    r.correct += hits[b];
  }
  r.loss /= static_cast<double>(r.count);
  r.accuracy = static_cast<double>(r.correct) / static_cast<double>(r.count);
  return r;
}

double train_step(Model& model, Adam& optimizer, const Tensor& images, std::span<const int> labels) {
  ad::Tape tape;
  ForwardContext ctx(tape, true);
  ad::Var loss = ad::softmax_cross_entropy(model.forward(ctx, tape.input(images)), labels);
  const double value = static_cast<double>(loss.value().item());
  if (!std::isfinite(value)) throw NumericError("non-finite training loss");
  const ad::Gradients grads = tape.backward(loss);

  std::vector<Tensor*> params;
  std::vector<const Tensor*> g;
  for (const ForwardContext::Binding& b : ctx.bindings()) {
    params.push_back(&b.parameter->value);
    g.push_back(&grads[b.var]);
  }
  optimizer.step(params, g);
  return value;
}

ExperimentReport train(Model& model, const LabeledImageSet& train_set, const LabeledImageSet& val_set,
                       const TrainConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  if (train_set.size() == 0) throw DataEmpty("training split is empty");
  if (val_set.size() == 0) throw DataEmpty("validation split is empty");
  const auto start = std::chrono::steady_clock::now();

  ExperimentReport report;
  report.model = model.spec().name;
  report.parameters = model.parameter_count();
  report.config = config;
  report.audit = audit_params(model.spec());

  AdamConfig adam;
  adam.learning_rate = config.learning_rate;
  Adam optimizer(adam);
  EarlyStopping stopper(config.patience);
  std::vector<Tensor> best = model.snapshot();

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto epoch_start = std::chrono::steady_clock::now();
    EpochRecord rec;
    rec.epoch = epoch;
    rec.data_hash = dataset_hash(train_set);

    BatchSampler sampler(train_set, config.batch_size, config.seed, epoch);
    Batch batch;
    double loss_sum = 0;
    std::size_t index = 0;
    while (sampler.next(batch)) {
      try {
        loss_sum += train_step(model, optimizer, batch.images, batch.labels) * static_cast<double>(batch.labels.size());
      } catch (const NumericError& e) {
        throw NumericError("epoch " + std::to_string(epoch) + ", batch " + std::to_string(index) + ": " + e.what());
      } catch (const BatchTooSmall& e) {
        throw BatchTooSmall("epoch " + std::to_string(epoch) + ", batch " + std::to_string(index) + ": " + e.what());
      }
      ++index;
    }
    rec.train_loss = loss_sum / static_cast<double>(train_set.size());

    const EvalResult val = evaluate(model, val_set, 256, config.threads);
    if (!std::isfinite(val.loss)) throw NumericError("epoch " + std::to_string(epoch) + ": non-finite validation loss");
    rec.val_loss = val.loss;
    rec.val_acc = val.accuracy;
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - epoch_start).count();
    report.epochs.push_back(rec);

    const bool stop = stopper.update(epoch, val.loss);
    if (stopper.improved()) {
      best = model.snapshot();
      report.best_epoch = epoch;
      report.best_val_loss = val.loss;
      report.best_val_acc = val.accuracy;
    }
    if (on_epoch) on_epoch(rec);
    if (stop) {
      report.stopped_early = epoch < config.max_epochs;
      break;
    }
  }
  model.restore(best);
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace tenconv
