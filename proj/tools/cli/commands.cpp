#include "commands.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <optional>

#include "tenconv/adversarial.hpp"
#include "tenconv/audit.hpp"
#include "tenconv/checkpoint.hpp"
#include "tenconv/error.hpp"
#include "tenconv/grad_check.hpp"
#include "tenconv/report.hpp"
#include "tenconv/training.hpp"

namespace fs = std::filesystem;

namespace tenconv::cli {

namespace {

LabeledImageSet take(const LabeledImageSet& set, std::size_t begin, std::size_t end) {
  std::vector<std::size_t> idx(end - begin);
  std::iota(idx.begin(), idx.end(), begin);
  return {set.gather(idx), set.gather_labels(idx), set.classes};
}

void check_fit(const ModelSpec& spec, const LabeledImageSet& set) {
  if (set.channels() != spec.channels || set.height() != spec.height || set.width() != spec.width) {
    throw ConfigError(spec.name + " expects " + std::to_string(spec.channels) + "x" + std::to_string(spec.height) +
                      "x" + std::to_string(spec.width) + " images, dataset has " + std::to_string(set.channels()) +
                      "x" + std::to_string(set.height()) + "x" + std::to_string(set.width()));
  }
  if (set.classes != spec.classes) {
    throw ClassCountMismatch(spec.name + " has " + std::to_string(spec.classes) + " classes, dataset has " +
                             std::to_string(set.classes));
  }
}

/// Creates the run directory and writes the resolved config snapshot.
fs::path open_run_dir(const RunConfig& config) {
  const fs::path dir(config.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  nlohmann::json snap = to_json(config);
  snap["build"] = build_id();
  snap["precision"] = kSinglePrecision ? "f32" : "f64";
  write_text((dir / "config.json").string(), snap.dump(2) + "\n");
  return dir;
}

AttackConfig attack_config(const RunConfig& config) {
  AttackConfig a;
  a.epsilons = config.eps;
  a.threads = config.threads;
  a.validate();
  return a;
}

void print_curve(const RobustnessCurve& c) {
  std::printf("%-10s %s\n", "epsilon", "accuracy");
  for (std::size_t i = 0; i < c.epsilons.size(); ++i) std::printf("%-10g %.4f\n", c.epsilons[i], c.accuracies[i]);
}

void write_curve(const RunConfig& config, const RobustnessCurve& c) {
  const fs::path dir = open_run_dir(config);
  write_text((dir / "robustness.csv").string(), curve_csv(c));
  write_text((dir / "robustness.json").string(), curve_json(c));
}

}  // namespace

ModelSpec resolve_spec(const std::string& model) {
  if (model.empty()) throw ConfigError("no model given (--model or --model-ckpt)");
  const std::vector<std::string> names = builtin_names();
  if (std::find(names.begin(), names.end(), model) != names.end()) return builtin_spec(model);
  if (fs::is_regular_file(model)) return load_spec_file(model);
  throw ConfigError("unknown model '" + model + "'");
}

std::pair<LabeledImageSet, LabeledImageSet> load_splits(const RunConfig& config, const ModelSpec& spec) {
  LabeledImageSet train_set, val_set;
  if (config.dataset == "synthetic") {
    SyntheticConfig s;
    s.classes = spec.classes;
    s.channels = spec.channels;
    s.height = spec.height;
    s.width = spec.width;
    s.seed = config.data_seed;
    const std::size_t val_per_class = std::max<std::size_t>(1, config.per_class / 4);
    s.per_class = config.per_class + val_per_class;
    // Classes are interleaved, so a prefix cut keeps both halves balanced.
    const LabeledImageSet all = make_synthetic(s);
    const std::size_t cut = config.per_class * spec.classes;
    train_set = take(all, 0, cut);
    val_set = take(all, cut, all.size());
  } else if (config.dataset == "mnist" || config.dataset == "cifar10" || config.dataset == "cifar100") {
    const std::string root = config.data_dir.empty() ? data_root(TENCONV_DEFAULT_DATA_DIR) : config.data_dir;
    train_set = load_dataset(config.dataset, root, Split::train);
    val_set = load_dataset(config.dataset, root, Split::test);
  } else {
    throw ConfigError("unknown dataset '" + config.dataset + "'");
  }
  if (config.subset > 0) train_set = head(train_set, config.subset);
  if (config.test_subset > 0) val_set = head(val_set, config.test_subset);
  check_fit(spec, train_set);
  return {std::move(train_set), std::move(val_set)};
}

std::unique_ptr<Model> load_target(const RunConfig& config) {
  if (config.model_ckpt.empty()) throw ConfigError("--model-ckpt is required");
  if (config.model.empty()) return load_checkpoint(config.model_ckpt);
  auto model = std::make_unique<Model>(resolve_spec(config.model));
  load_checkpoint_into(*model, config.model_ckpt);
  return model;
}

int cmd_train(const RunConfig& config) {
  Model model(resolve_spec(config.model), config.seed);
  TrainConfig tc;
  tc.learning_rate = config.lr;
  tc.batch_size = config.batch;
  tc.max_epochs = config.epochs;
  tc.patience = config.patience;
  tc.seed = config.seed;
  tc.threads = config.threads;
  tc.validate();
  const auto [train_set, val_set] = load_splits(config, model.spec());

  std::printf("%s: %zu parameters, %zu train / %zu val samples\n", model.spec().name.c_str(),
              model.parameter_count(), train_set.size(), val_set.size());
  std::printf("%-6s %-12s %-12s %-8s %s\n", "epoch", "train_loss", "val_loss", "val_acc", "seconds");
  const ExperimentReport report = train(model, train_set, val_set, tc, [](const EpochRecord& e) {
    std::printf("%-6zu %-12.6f %-12.6f %-8.4f %.1f\n", e.epoch, e.train_loss, e.val_loss, e.val_acc, e.seconds);
    std::fflush(stdout);
  });
  std::printf("best epoch %zu: val_loss %.6f, val_acc %.4f%s\n", report.best_epoch, report.best_val_loss,
              report.best_val_acc, report.stopped_early ? " (stopped early)" : "");

  const fs::path dir = open_run_dir(config);
  write_text((dir / "report.json").string(), report_json(report));
  write_text((dir / "report.csv").string(), report_csv(report));
  save_checkpoint(model, (dir / "best.tcnn").string());
  return 0;
}

int cmd_eval(const RunConfig& config) {
  std::unique_ptr<Model> model = load_target(config);
  const LabeledImageSet val_set = load_splits(config, model->spec()).second;
  const EvalResult r = evaluate(*model, val_set, 256, config.threads);
  std::printf("%s: loss %.6f, accuracy %.4f (%zu/%zu)\n", model->spec().name.c_str(), r.loss, r.accuracy, r.correct,
              r.count);
  const fs::path dir = open_run_dir(config);
  nlohmann::json j = {{"model", model->spec().name}, {"dataset", config.dataset}, {"loss", r.loss},
                      {"accuracy", r.accuracy},      {"correct", r.correct},      {"count", r.count}};
  write_text((dir / "eval.json").string(), j.dump(2) + "\n");
  return 0;
}

int cmd_attack(const RunConfig& config) {
  const AttackConfig a = attack_config(config);
  std::unique_ptr<Model> model = load_target(config);
  const LabeledImageSet val_set = load_splits(config, model->spec()).second;
  const RobustnessCurve c = sweep(*model, val_set, a);
  print_curve(c);
  write_curve(config, c);
  return 0;
}

int cmd_transfer(const RunConfig& config) {
  const AttackConfig a = attack_config(config);
  if (config.source_ckpt.empty()) throw ConfigError("--source-ckpt is required");
  std::unique_ptr<Model> target = load_target(config);
  std::unique_ptr<Model> source = load_checkpoint(config.source_ckpt);
  const LabeledImageSet val_set = load_splits(config, target->spec()).second;
  check_fit(source->spec(), val_set);
  const RobustnessCurve c = transfer_attack(*source, *target, val_set, a);
  std::printf("%s attacked with examples from %s\n", c.model.c_str(), c.source.c_str());
  print_curve(c);
  write_curve(config, c);
  return 0;
}

int cmd_audit(const RunConfig& config) {
  const ModelSpec spec = resolve_spec(config.model);
  trace_shapes(spec);
  std::optional<double> expect;
  if (!config.expect.empty()) expect = parse_count(config.expect);
  const std::string text = format_audit(audit_params(spec), expect);
  std::fputs(text.c_str(), stdout);
  return 0;
}

int cmd_gradcheck(const RunConfig& config) {
  std::unique_ptr<Model> model;
  if (config.model_ckpt.empty()) {
    model = std::make_unique<Model>(resolve_spec(config.model), config.seed);
  } else {
    model = load_target(config);
  }
  const ModelSpec& spec = model->spec();
  if (config.samples < 2) throw ConfigError("--samples must be at least 2 (BatchNorm needs a batch)");
  SyntheticConfig s;
  s.classes = spec.classes;
  s.channels = spec.channels;
  s.height = spec.height;
  s.width = spec.width;
  s.per_class = (config.samples + spec.classes - 1) / spec.classes;
  s.seed = config.data_seed;
  const LabeledImageSet batch = head(make_synthetic(s), config.samples);

  GradCheckOptions o;
  o.tolerance = config.tol;
  o.max_coords = config.coords;
  o.seed = config.seed;
  const GradCheckReport r = grad_check(*model, batch.images, batch.labels, o, true);
  std::fputs(format_grad_check(r, o.tolerance).c_str(), stdout);
  return r.passed ? 0 : 4;
}

int run(const RunConfig& config) {
  try {
    if (config.threads == 0) throw ConfigError("--threads must be positive");
    if (config.command == "train") return cmd_train(config);
    if (config.command == "eval") return cmd_eval(config);
    if (config.command == "attack") return cmd_attack(config);
    if (config.command == "transfer") return cmd_transfer(config);
    if (config.command == "audit") return cmd_audit(config);
    if (config.command == "gradcheck") return cmd_gradcheck(config);
    throw ConfigError("unknown command '" + config.command + "'");
  } catch (const std::exception& e) {
    std::cerr << "tenconv " << config.command << ": " << e.what() << "\n";
    return exit_code_for(e);
  }
}

}  // namespace tenconv::cli
