#include "run_config.hpp"

#include <fstream>

#include "tenconv/error.hpp"

namespace tenconv::cli {

using nlohmann::json;

#define TENCONV_FIELDS(X)                                                                                  \
  X(model) X(model_ckpt) X(source_ckpt) X(dataset) X(data_dir) X(subset) X(test_subset) X(per_class)      \
      X(data_seed) X(lr) X(batch) X(epochs) X(patience) X(seed) X(threads) X(eps) X(out) X(expect) X(tol) \
          X(coords) X(samples)

json to_json(const RunConfig& c) {
  json j;
  j["command"] = c.command;
#define X(f) j[#f] = c.f;
  TENCONV_FIELDS(X)
#undef X
  return j;
}

void apply_json(RunConfig& c, const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "command") {
        value.get_to(c.command);
        continue;
      }
#define X(f)                \
  if (key == #f) {          \
    value.get_to(c.f);      \
    continue;               \
  }
      TENCONV_FIELDS(X)
#undef X
    } catch (const json::exception& e) {
      throw ConfigError("key '" + key + "': " + e.what());
    }
    throw ConfigError("unknown config key '" + key + "'");
  }
}

RunConfig resolve(const std::string& command, const std::string& config_file, const RunConfig& flags,
                  const std::set<std::string>& flag_keys) {
  RunConfig c;
  if (!config_file.empty()) {
    std::ifstream in(config_file);
    if (!in) throw ConfigError("cannot read config file " + config_file);
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw ConfigError(config_file + ": " + e.what());
    }
    apply_json(c, j);
  }
  const json f = to_json(flags);
  json overlay = json::object();
  for (const std::string& key : flag_keys) overlay[key] = f.at(key);
  apply_json(c, overlay);
  if (!c.command.empty() && c.command != command) {
    throw ConfigError("config file is for '" + c.command + "', not '" + command + "'");
  }
  c.command = command;
  return c;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const IncompatibleSpec*>(&e) ||
      dynamic_cast<const ClassCountMismatch*>(&e) || dynamic_cast<const ShapeMismatch*>(&e) ||
      dynamic_cast<const BadGeometry*>(&e)) {
    return 2;
  }
  if (dynamic_cast<const IoError*>(&e) || dynamic_cast<const FormatError*>(&e) ||
      dynamic_cast<const DataEmpty*>(&e) || dynamic_cast<const LabelOutOfRange*>(&e)) {
    return 3;
  }
  if (dynamic_cast<const NumericError*>(&e) || dynamic_cast<const BatchTooSmall*>(&e)) return 4;
  return 1;
}

std::string build_id() { return TENCONV_BUILD_ID; }

}  // namespace tenconv::cli
