#pragma once

#include "vidssm/config.hpp"
#include "vidssm/errors.hpp"
#include "vidssm/model_document.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>

namespace vidssm {

enum class LogLevel { error = 0, warn = 1, info = 2, debug = 3 };

/// Parses "error", "warn", "info" or "debug".
LogLevel parse_log_level(const std::string& name);

/// Leveled messages to a stream (stderr in the command line tool).
class Log {
 public:
  Log(std::ostream& out, LogLevel level) : out_(&out), level_(level) {}
  void warn(const std::string& msg) const { write(LogLevel::warn, "warn", msg); }
  void info(const std::string& msg) const { write(LogLevel::info, "info", msg); }
  void debug(const std::string& msg) const { write(LogLevel::debug, "debug", msg); }

 private:
  void write(LogLevel at, const char* tag, const std::string& msg) const;
  std::ostream* out_;
  LogLevel level_;
};

/// A library error re-raised with the pipeline stage it came from. The
/// cause's structured fields (frame index, residual, ...) are kept.
class StageError : public Error {
 public:
  StageError(const std::string& stage, const Error& cause);
  const std::string& stage() const noexcept { return stage_; }
  const nlohmann::json& details() const noexcept { return details_; }

 private:
  std::string stage_;
  nlohmann::json details_;
};

/// Usage mistakes such as an unknown scenario name.
class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error("usage", what) {}
};

// Each command writes its artifacts below config.out and returns a JSON
// summary of what it did.

/// Tracks the template in `input`; writes track.csv.
nlohmann::json cmd_track(const PipelineConfig& config, const Log& log);
/// Fits every model to the `train` CSVs; writes model.json.
nlohmann::json cmd_fit(const PipelineConfig& config, const Log& log);
/// Reconstructs the `test` CSV from its first embedded vector; writes prediction.csv.
nlohmann::json cmd_predict(const PipelineConfig& config, const Log& log);
/// Tabulates damping and backbone curves of `model`; writes backbone.csv.
nlohmann::json cmd_backbone(const PipelineConfig& config, const Log& log);
/// Renders a synthetic scenario ("static", "damped_oscillation" or
/// "double_pendulum"); writes video.raw (+ .hdr) and truth.csv.
nlohmann::json cmd_render_synthetic(const PipelineConfig& config, const Log& log);

/// Error report printed by the command line tool on failure.
nlohmann::json error_json(const Error& e);

}  // namespace vidssm
