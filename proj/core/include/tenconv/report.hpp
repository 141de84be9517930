#pragma once

#include <string>

#include "tenconv/training.hpp"

namespace tenconv {

/// One row per epoch: epoch,train_loss,val_loss,val_acc. Values are printed
/// with 17 significant digits so equal runs give equal bytes.
std::string report_csv(const ExperimentReport& report);
std::string report_json(const ExperimentReport& report);

/// Writes `text` to `path`; IoError on failure.
void write_text(const std::string& path, const std::string& text);

}  // namespace tenconv
