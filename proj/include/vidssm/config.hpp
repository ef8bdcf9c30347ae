#pragma once

#include "vidssm/media_io.hpp"
#include "vidssm/tracker.hpp"

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace vidssm {

/// Flat `key = value` text. `#` starts a comment; blank lines are ignored.
using ConfigMap = std::map<std::string, std::string>;

ConfigMap parse_config(std::istream& in);
ConfigMap read_config_file(const std::string& path);
/// Applies one `key=value` override.
void apply_override(ConfigMap& config, const std::string& assignment);

/// Every setting of every stage; each subcommand reads the fields it needs.
struct PipelineConfig {
  // track
  std::string input;
  std::optional<double> fps;
  std::optional<Region> template_region;
  SearchConfig search;

  // embedding
  std::vector<std::string> train;
  std::string test;
  std::vector<std::string> channels{"x", "y"};
  int p = 5;
  int lag_steps = 1;
  double trim_start = 0.0;
  /// "tail_mean", "none" or a comma-separated offset per channel.
  std::string fixed_point = "tail_mean";
  int tail_window = 50;

  // geometry and dynamics
  int d = 2;
  int m = 3;
  int r = 3;
  int n_nf = 3;
  double resonance_tol = 0.1;

  // predict and backbone
  std::string model;
  double t_span = 0.0;  // 0: the length of the test trajectory
  std::optional<double> rho_max;  // unset: the largest trained amplitude
  int samples = 50;
  std::string observable;  // channel name, default the first channel

  // render-synthetic
  std::string scenario;
  int frames = 200;
  double render_fps = 60.0;
  int canvas_w = 160;
  int canvas_h = 120;
  int marker_size = 15;
  double amplitude_px = 20.0;
  double amplitude_deg = 20.0;
  double omega = 2.0;
  double decay = 0.3;
  double dp_amplitude = 0.3;
  double px_per_m = 250.0;

  std::string out = ".";
  ConfigMap raw;  // the settings this config was built from
};

/// Builds a config from key-value settings. Unknown keys and malformed
/// values raise ConfigError.
PipelineConfig make_pipeline_config(const ConfigMap& values);

}  // namespace vidssm
