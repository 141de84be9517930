#pragma once

#include <cstddef>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

namespace tenconv::cli {

/// Everything a single command needs. JSON keys equal the long flag names
/// with '-' replaced by '_'.
struct RunConfig {
  std::string command;
  std::string model;        // builtin name or spec file
  std::string model_ckpt;   // attack/eval/transfer target
  std::string source_ckpt;  // transfer source
  std::string dataset = "mnist";
  std::string data_dir;     // empty: TENCONV_DATA_DIR, then the build default
  std::size_t subset = 0;       // training samples kept (0 = all)
  std::size_t test_subset = 0;  // validation/test samples kept (0 = all)
  std::size_t per_class = 100;  // synthetic training samples per class
  std::uint64_t data_seed = 1;  // synthetic data only
  double lr = 1e-3;
  std::size_t batch = 64;
  std::size_t epochs = 30;
  std::size_t patience = 3;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::vector<double> eps{0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3};
  std::string out = "tenconv-out";
  std::string expect;       // audit
  double tol = 1e-4;        // gradcheck
  std::size_t coords = 200; // gradcheck
  std::size_t samples = 4;  // gradcheck batch
};

nlohmann::json to_json(const RunConfig& config);

/// Overwrites the fields named in `j`. ConfigError on an unknown key or a
/// value of the wrong type.
void apply_json(RunConfig& config, const nlohmann::json& j);

/// defaults < config file < flags. `flag_keys` names the fields set on the
/// command line; their values are taken from `flags`.
RunConfig resolve(const std::string& command, const std::string& config_file, const RunConfig& flags,
                  const std::set<std::string>& flag_keys);

/// Process exit code for an exception: 2 config, 3 data, 4 numeric, 1 other.
int exit_code_for(const std::exception& e);

/// Short git hash and build type baked in at configure time.
std::string build_id();

}  // namespace tenconv::cli
