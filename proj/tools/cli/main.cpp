#include <CLI11.hpp>

#include <algorithm>
#include <iostream>
#include <set>

#include "commands.hpp"

using tenconv::cli::RunConfig;

namespace {

struct Flags {
  RunConfig values;
  std::string config_file;
  std::vector<std::pair<std::string, CLI::Option*>> options;

  template <class T>
  CLI::Option* add(CLI::App& app, const std::string& key, T& target, const std::string& help) {
    std::string flag = key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    CLI::Option* opt = app.add_option("--" + flag, target, help);
    options.emplace_back(key, opt);
    return opt;
  }

  std::set<std::string> given() const {
    std::set<std::string> keys;
    for (const auto& [key, opt] : options) {
      if (opt->count() > 0) keys.insert(key);
    }
    return keys;
  }
};

void add_common(CLI::App& app, Flags& f) {
  RunConfig& v = f.values;
  app.add_option("--config", f.config_file, "JSON run config; flags override its keys");
  f.add(app, "model", v.model, "Builtin model name or JSON spec file");
  f.add(app, "seed", v.seed, "Seed for initialisation and shuffling");
  f.add(app, "threads", v.threads, "Worker threads for evaluation and attacks");
  f.add(app, "out", v.out, "Run directory for artifacts");
}

void add_data(CLI::App& app, Flags& f) {
  RunConfig& v = f.values;
  f.add(app, "dataset", v.dataset, "mnist, cifar10, cifar100 or synthetic");
  f.add(app, "data_dir", v.data_dir, "Dataset root (default: TENCONV_DATA_DIR)");
  f.add(app, "subset", v.subset, "Keep the first N training samples");
  f.add(app, "test_subset", v.test_subset, "Keep the first N test samples");
  f.add(app, "per_class", v.per_class, "Synthetic training samples per class");
  f.add(app, "data_seed", v.data_seed, "Seed of the synthetic data");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tensor contraction networks: train, evaluate, attack and audit"};
  app.require_subcommand(1);
  Flags f;
  RunConfig& v = f.values;

  CLI::App* train = app.add_subcommand("train", "Train a model; writes best.tcnn, report.json and report.csv");
  add_common(*train, f);
  add_data(*train, f);
  f.add(*train, "lr", v.lr, "Adam learning rate");
  f.add(*train, "batch", v.batch, "Batch size");
  f.add(*train, "epochs", v.epochs, "Maximum epochs");
  f.add(*train, "patience", v.patience, "Epochs without val-loss improvement before stopping");

  CLI::App* eval = app.add_subcommand("eval", "Evaluate a checkpoint on the test split");
  add_common(*eval, f);
  add_data(*eval, f);
  f.add(*eval, "model_ckpt", v.model_ckpt, "Checkpoint to evaluate");

  CLI::App* attack = app.add_subcommand("attack", "White-box FGSM sweep; writes robustness.csv");
  add_common(*attack, f);
  add_data(*attack, f);
  f.add(*attack, "model_ckpt", v.model_ckpt, "Checkpoint to attack");
  f.add(*attack, "eps", v.eps, "Ascending epsilons, comma separated")->delimiter(',');

  CLI::App* transfer = app.add_subcommand("transfer", "Black-box FGSM: examples from one model, scored on another");
  add_common(*transfer, f);
  add_data(*transfer, f);
  f.add(*transfer, "model_ckpt", v.model_ckpt, "Checkpoint that is scored");
  f.add(*transfer, "source_ckpt", v.source_ckpt, "Checkpoint that crafts the examples");
  f.add(*transfer, "eps", v.eps, "Ascending epsilons, comma separated")->delimiter(',');

  CLI::App* audit = app.add_subcommand("audit", "Per-layer parameter counts");
  add_common(*audit, f);
  f.add(*audit, "expect", v.expect, "Reference total such as 0.39M");

  CLI::App* gradcheck = app.add_subcommand("gradcheck", "Finite-difference check of every parameter group");
  add_common(*gradcheck, f);
  f.add(*gradcheck, "model_ckpt", v.model_ckpt, "Check a trained checkpoint instead");
  f.add(*gradcheck, "tol", v.tol, "Relative error tolerance");
  f.add(*gradcheck, "coords", v.coords, "Coordinates sampled per tensor");
  f.add(*gradcheck, "samples", v.samples, "Batch size of the checked loss");
  f.add(*gradcheck, "data_seed", v.data_seed, "Seed of the synthetic batch");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  RunConfig config;
  try {
    config = tenconv::cli::resolve(command, f.config_file, v, f.given());
  } catch (const std::exception& e) {
    std::cerr << "tenconv " << command << ": " << e.what() << "\n";
    return tenconv::cli::exit_code_for(e);
  }
  return tenconv::cli::run(config);
}
