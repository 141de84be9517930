#pragma once

#include <memory>
#include <string>
#include <utility>

#include "run_config.hpp"
#include "tenconv/data.hpp"
#include "tenconv/model.hpp"

namespace tenconv::cli {

/// Builtin name, or a JSON spec file. ConfigError when neither.
ModelSpec resolve_spec(const std::string& model);

/// Training and validation splits for `spec`. "synthetic" generates class
/// blobs matching the model's input; other names load from the data root.
std::pair<LabeledImageSet, LabeledImageSet> load_splits(const RunConfig& config, const ModelSpec& spec);

/// Model from --model-ckpt; when --model is also given the checkpoint must
/// fit that spec.
std::unique_ptr<Model> load_target(const RunConfig& config);

int cmd_train(const RunConfig& config);
int cmd_eval(const RunConfig& config);
int cmd_attack(const RunConfig& config);
int cmd_transfer(const RunConfig& config);
int cmd_audit(const RunConfig& config);
int cmd_gradcheck(const RunConfig& config);

/// Dispatches on config.command and maps library errors to exit codes,
/// printing a one-line diagnostic to stderr.
int run(const RunConfig& config);

}  // namespace tenconv::cli
