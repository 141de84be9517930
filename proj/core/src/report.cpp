#include "tenconv/report.hpp"

#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "tenconv/error.hpp"

namespace tenconv {

std::string report_csv(const ExperimentReport& report) {
  std::string out = "epoch,train_loss,val_loss,val_acc\n";
  char line[128];
  for (const EpochRecord& e : report.epochs) {
    std::snprintf(line, sizeof line, "%zu,%.17g,%.17g,%.17g\n", e.epoch, e.train_loss, e.val_loss, e.val_acc);
    out += line;
  }
  return out;
}

std::string report_json(const ExperimentReport& report) {
  using nlohmann::json;
  json j;
  j["model"] = report.model;
  j["parameters"] = report.parameters;
  j["config"] = {{"learning_rate", report.config.learning_rate}, {"batch_size", report.config.batch_size},
                 {"max_epochs", report.config.max_epochs},       {"patience", report.config.patience},
                 {"seed", report.config.seed},                   {"threads", report.config.threads}};
  json epochs = json::array();
  for (const EpochRecord& e : report.epochs) {
    epochs.push_back({{"epoch", e.epoch},
                      {"train_loss", e.train_loss},
                      {"val_loss", e.val_loss},
                      {"val_acc", e.val_acc},
                      {"data_hash", e.data_hash},
                      {"seconds", e.seconds}});
  }
  j["epochs"] = epochs;
  j["best_epoch"] = report.best_epoch;
  j["best_val_loss"] = report.best_val_loss;
  j["best_val_acc"] = report.best_val_acc;
  j["stopped_early"] = report.stopped_early;
  j["wall_seconds"] = report.wall_seconds;
  json rows = json::array();
  for (const AuditRow& r : report.audit.rows) {
    rows.push_back({{"layer", r.layer}, {"weights", r.weights}, {"batch_norm", r.batch_norm}, {"prelu", r.prelu}});
  }
  j["audit"] = {{"rows", rows}, {"total", report.audit.total()}};
  return j.dump(2);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  if (!out) throw IoError("failed writing " + path);
}

}  // namespace tenconv
