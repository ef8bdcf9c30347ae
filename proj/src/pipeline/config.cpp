#include "vidssm/config.hpp"

#include "vidssm/errors.hpp"

#include <fstream>
#include <functional>
#include <sstream>

namespace vidssm {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) throw ConfigError("'" + key + "' expects a number, got '" + v + "'");
  return x;
}

int to_int(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  int x = 0;
  try {
    x = std::stoi(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) throw ConfigError("'" + key + "' expects an integer, got '" + v + "'");
  return x;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("'" + key + "' expects true or false, got '" + v + "'");
}

}  // namespace

ConfigMap parse_config(std::istream& in) {
  ConfigMap out;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

ConfigMap read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in);
}

void apply_override(ConfigMap& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || trim(assignment.substr(0, eq)).empty())
    throw ConfigError("override '" + assignment + "' is not key=value");
  config[trim(assignment.substr(0, eq))] = trim(assignment.substr(eq + 1));
}

PipelineConfig make_pipeline_config(const ConfigMap& values) {
  PipelineConfig c;
  c.raw = values;
  Region region;
  int region_keys = 0;

  using Setter = std::function<void(const std::string&, const std::string&)>;
  auto num = [](double& field) -> Setter {
    return [&field](const std::string& k, const std::string& v) { field = to_double(k, v); };
  };
  auto integer = [](int& field) -> Setter {
    return [&field](const std::string& k, const std::string& v) { field = to_int(k, v); };
  };
  auto text = [](std::string& field) -> Setter {
    return [&field](const std::string&, const std::string& v) { field = v; };
  };
  auto region_field = [&](int& field) -> Setter {
    return [&field, &region_keys](const std::string& k, const std::string& v) {
      field = to_int(k, v);
      ++region_keys;
    };
  };

  const std::map<std::string, Setter> setters = {
      {"input", text(c.input)},
      {"fps", [&](const std::string& k, const std::string& v) { c.fps = to_double(k, v); }},
      {"template_x0", region_field(region.x0)},
      {"template_y0", region_field(region.y0)},
      {"template_w", region_field(region.w)},
      {"template_h", region_field(region.h)},
      {"search_scale", num(c.search.search_scale)},
      {"theta_min", num(c.search.theta_min)},
      {"theta_max", num(c.search.theta_max)},
      {"theta_interval", num(c.search.theta_interval)},
      {"score_thresh", num(c.search.score_thresh)},
      {"iou_thresh", num(c.search.iou_thresh)},
      {"n_match", integer(c.search.n_match)},
      {"background_removal",
       [&](const std::string& k, const std::string& v) { c.search.background_removal = to_bool(k, v); }},
      {"d_thresh", num(c.search.d_thresh)},
      {"train", [&](const std::string&, const std::string& v) { c.train = split_list(v); }},
      {"test", text(c.test)},
      {"channels", [&](const std::string&, const std::string& v) { c.channels = split_list(v); }},
      {"p", integer(c.p)},
      {"lag_steps", integer(c.lag_steps)},
      {"trim_start", num(c.trim_start)},
      {"fixed_point", text(c.fixed_point)},
      {"tail_window", integer(c.tail_window)},
      {"d", integer(c.d)},
      {"m", integer(c.m)},
      {"r", integer(c.r)},
      {"n_nf", integer(c.n_nf)},
      {"resonance_tol", num(c.resonance_tol)},
      {"model", text(c.model)},
      {"t_span", num(c.t_span)},
      {"rho_max", [&](const std::string& k, const std::string& v) { c.rho_max = to_double(k, v); }},
      {"samples", integer(c.samples)},
      {"observable", text(c.observable)},
      {"scenario", text(c.scenario)},
      {"frames", integer(c.frames)},
      {"render_fps", num(c.render_fps)},
      {"canvas_w", integer(c.canvas_w)},
      {"canvas_h", integer(c.canvas_h)},
      {"marker_size", integer(c.marker_size)},
      {"amplitude_px", num(c.amplitude_px)},
      {"amplitude_deg", num(c.amplitude_deg)},
      {"omega", num(c.omega)},
      {"decay", num(c.decay)},
      {"dp_amplitude", num(c.dp_amplitude)},
      {"px_per_m", num(c.px_per_m)},
      {"out", text(c.out)},
  };

  for (const auto& [key, value] : values) {
    const auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError("unknown config key '" + key + "'");
    it->second(key, value);
  }
  if (region_keys == 4) c.template_region = region;
  else if (region_keys != 0)
    throw ConfigError("template region needs all of template_x0, template_y0, template_w, template_h");

  if (c.d < 1) throw ConfigError("d must be at least 1");
  if (c.m < 1 || c.r < 1 || c.n_nf < 1) throw ConfigError("m, r and n_nf must be at least 1");
  if (c.p < 1 || c.lag_steps < 1) throw ConfigError("p and lag_steps must be at least 1");
  if (c.channels.empty()) throw ConfigError("channels must name at least one column");
  if (c.tail_window < 1) throw ConfigError("tail_window must be at least 1");
  if (c.samples < 1) throw ConfigError("samples must be at least 1");
  if (c.trim_start < 0.0) throw ConfigError("trim_start must be non-negative");
  return c;
}

}  // namespace vidssm
