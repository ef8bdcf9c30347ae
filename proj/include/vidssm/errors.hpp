#pragma once

#include <stdexcept>
#include <string>

namespace vidssm {

/// Base of every error the library throws. `kind()` is a stable,
/// machine-readable tag used by the command line tool's JSON error report.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class InputError : public Error {
 public:
  explicit InputError(const std::string& what) : Error("input", what) {}
};

class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& what) : Error("shape", what) {}
};

class BoundsError : public Error {
 public:
  explicit BoundsError(const std::string& what) : Error("bounds", what) {}
};

class DecodeError : public Error {
 public:
  DecodeError(long frame_index, const std::string& what)
      : Error("decode", "frame " + std::to_string(frame_index) + ": " + what),
        frame_index_(frame_index) {}
  long frame_index() const noexcept { return frame_index_; }

 private:
  long frame_index_;
};

class MatchError : public Error {
 public:
  explicit MatchError(const std::string& what) : Error("match", what) {}
};

class TrackingLostError : public Error {
 public:
  explicit TrackingLostError(long frame_index)
      : Error("tracking_lost",
              "no candidate below the score threshold in frame " + std::to_string(frame_index)),
        frame_index_(frame_index) {}
  long frame_index() const noexcept { return frame_index_; }

 private:
  long frame_index_;
};

class NormalizationError : public Error {
 public:
  explicit NormalizationError(long channel)
      : Error("normalization", "channel " + std::to_string(channel) + " has zero range"),
        channel_(channel) {}
  NormalizationError(long channel, const std::string& what)
      : Error("normalization", what), channel_(channel) {}
  long channel() const noexcept { return channel_; }

 private:
  long channel_;
};

class DegenerateDataError : public Error {
 public:
  explicit DegenerateDataError(const std::string& what) : Error("degenerate_data", what) {}
};

class ConditioningError : public Error {
 public:
  explicit ConditioningError(const std::string& what) : Error("conditioning", what) {}
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double last_residual)
      : Error("convergence", what), last_residual_(last_residual) {}
  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

class DivergenceError : public Error {
 public:
  explicit DivergenceError(double time)
      : Error("divergence", "state diverged at t = " + std::to_string(time)), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

class ResonanceError : public Error {
 public:
  explicit ResonanceError(const std::string& what) : Error("resonance", what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error("config", what) {}
};

}  // namespace vidssm
