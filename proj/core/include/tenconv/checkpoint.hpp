#pragma once

#include <memory>
#include <string>

#include "tenconv/model.hpp"

namespace tenconv {

// Checkpoint layout, little-endian:
//   "TCNN" | u16 version | u64 spec digest | u32 length + spec JSON |
//   u32 tensor count | tensor records in parameter order
// Tensor records always hold f64; a float build rounds on load.

inline constexpr std::uint16_t kCheckpointVersion = 1;

/// Writes the model's parameters and buffers; IoError on failure.
void save_checkpoint(const Model& model, const std::string& path);

/// Rebuilds the model from the embedded spec. IoError, FormatError on bad
/// magic, version, digest or truncation.
std::unique_ptr<Model> load_checkpoint(const std::string& path);

/// Loads into an existing model; ShapeMismatch when the checkpoint was
/// written for a different spec.
void load_checkpoint_into(Model& model, const std::string& path);

}  // namespace tenconv
