#include "vidssm/commands.hpp"

#include "vidssm/csv.hpp"
#include "vidssm/embedding.hpp"
#include "vidssm/media_io.hpp"
#include "vidssm/metrics.hpp"
#include "vidssm/synthetic.hpp"
#include "vidssm/tracker.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <sstream>

namespace vidssm {

using nlohmann::json;
namespace fs = std::filesystem;

LogLevel parse_log_level(const std::string& name) {
  if (name == "error") return LogLevel::error;
  if (name == "warn") return LogLevel::warn;
  if (name == "info") return LogLevel::info;
  if (name == "debug") return LogLevel::debug;
  throw ConfigError("unknown log level '" + name + "'");
}

void Log::write(LogLevel at, const char* tag, const std::string& msg) const {
  if (static_cast<int>(at) <= static_cast<int>(level_)) *out_ << "[" << tag << "] " << msg << '\n';
}

StageError::StageError(const std::string& stage, const Error& cause)
    : Error(cause.kind(), stage + ": " + cause.what()), stage_(stage) {
  details_ = error_json(cause)["error"];
  details_.erase("kind");
  details_.erase("message");
}

json error_json(const Error& e) {
  json j = {{"kind", e.kind()}, {"message", e.what()}};
  if (const auto* s = dynamic_cast<const StageError*>(&e)) {
    j.update(s->details());
    j["stage"] = s->stage();
  }
  if (const auto* t = dynamic_cast<const TrackingLostError*>(&e)) j["frame"] = t->frame_index();
  if (const auto* d = dynamic_cast<const DecodeError*>(&e)) j["frame"] = d->frame_index();
  if (const auto* c = dynamic_cast<const ConvergenceError*>(&e)) j["last_residual"] = c->last_residual();
  if (const auto* v = dynamic_cast<const DivergenceError*>(&e)) j["time"] = v->time();
  if (const auto* n = dynamic_cast<const NormalizationError*>(&e)) j["channel"] = n->channel();
  return {{"error", j}};
}

namespace {

template <typename F>
auto stage(const std::string& name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(name, e);
  }
}

fs::path output_dir(const PipelineConfig& config) {
  const fs::path dir(config.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + config.out + "'");
  return dir;
}

void require_file(const std::string& key, const std::string& path) {
  if (path.empty()) throw ConfigError("'" + key + "' is required");
  if (!fs::exists(path)) throw ConfigError("'" + key + "' path '" + path + "' does not exist");
}

struct Recording {
  double t0 = 0.0;
  TimeSeries series;  // raw, not yet centered
};

// Selected channels of a CSV with a uniformly sampled `t` column.
Recording load_recording(const std::string& path, const std::vector<std::string>& channels,
                         double trim_start) {
  const CsvTable table = read_csv_file(path);
  const Eigen::VectorXd t = table.column("t");
  Eigen::Index first = 0;
  while (first < t.size() && t(first) - t(0) < trim_start - 1e-12) ++first;
  const Eigen::Index n = t.size() - first;
  if (n < 2) throw InputError("'" + path + "' has fewer than two samples after trimming");
  const double dt = (t(t.size() - 1) - t(first)) / static_cast<double>(n - 1);
  for (Eigen::Index k = first + 1; k < t.size(); ++k)
    // Tracker exports round t to 6 decimals.
    if (std::abs(t(k) - t(k - 1) - dt) > 1e-6 * dt + 2e-6)
      throw InputError("'" + path + "' is not uniformly sampled near t = " + std::to_string(t(k)));
  Eigen::MatrixXd values(static_cast<Eigen::Index>(channels.size()), n);
  for (std::size_t c = 0; c < channels.size(); ++c)
    values.row(static_cast<Eigen::Index>(c)) = table.column(channels[c]).tail(n).transpose();
  return Recording{t(first), TimeSeries(dt, std::move(values))};
}

Eigen::VectorXd fixed_point_offset(const PipelineConfig& config, const std::vector<Recording>& recs) {
  const Eigen::Index q = static_cast<Eigen::Index>(config.channels.size());
  if (config.fixed_point == "none") return Eigen::VectorXd::Zero(q);
  if (config.fixed_point == "tail_mean") {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(q);
    for (const auto& r : recs) sum += tail_mean(r.series, config.tail_window);
    return sum / static_cast<double>(recs.size());
  }
  std::vector<double> v;
  std::stringstream ss(config.fixed_point);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      v.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ConfigError("fixed_point must be tail_mean, none or numbers, got '" + config.fixed_point + "'");
    }
  }
  if (static_cast<Eigen::Index>(v.size()) != q)
    throw ConfigError("fixed_point lists " + std::to_string(v.size()) + " values for " + std::to_string(q) +
                      " channels");
  return Eigen::Map<Eigen::VectorXd>(v.data(), q);
}

// Delay-0 rows of embedded vectors: one row per channel.
Eigen::MatrixXd leading_rows(const Eigen::MatrixXd& y, int p, Eigen::Index q) {
  Eigen::MatrixXd out(q, y.cols());
  for (Eigen::Index c = 0; c < q; ++c) out.row(c) = y.row(c * p);
  return out;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out << text;
}

}  // namespace

json cmd_track(const PipelineConfig& config, const Log& log) {
  require_file("input", config.input);
  if (!config.template_region) throw ConfigError("track needs template_x0, template_y0, template_w, template_h");
  const fs::path dir = output_dir(config);
  const FrameSequence seq = stage("media_io", [&] { return load_frame_sequence(config.input, config.fps); });
  log.info("loaded " + std::to_string(seq.size()) + " frames at " + std::to_string(seq.frame_rate()) + " fps");
  const TrackSeries series = stage("tracker", [&] {
    const Template t = make_template(seq[0], *config.template_region);
    return track(seq, t, *config.template_region, config.search);
  });
  const fs::path out = dir / "track.csv";
  std::ofstream f(out);
  if (!f) throw InputError("cannot write '" + out.string() + "'");
  write_track_csv(f, series);
  return {{"command", "track"}, {"frames", series.size()}, {"output", out.string()}};
}

json cmd_fit(const PipelineConfig& config, const Log& log) {
  if (config.train.empty()) throw ConfigError("fit needs at least one 'train' trajectory");
  for (const auto& p : config.train) require_file("train", p);
  const fs::path dir = output_dir(config);

  ModelDocument doc;
  doc.channels = config.channels;
  doc.p = config.p;
  doc.lag_steps = config.lag_steps;

  std::vector<Recording> recs = stage("embedding", [&] {
    std::vector<Recording> out;
    for (const auto& p : config.train) out.push_back(load_recording(p, config.channels, config.trim_start));
    return out;
  });
  doc.dt = recs.front().series.dt;
  for (const auto& r : recs)
    if (std::abs(r.series.dt - doc.dt) > 1e-9 * doc.dt)
      throw StageError("embedding", InputError("training trajectories have different sampling intervals"));

  std::vector<EmbeddedSeries> embedded = stage("embedding", [&] {
    doc.origin_offset = fixed_point_offset(config, recs);
    std::vector<EmbeddedSeries> out;
    for (const auto& r : recs) {
      out.push_back(delay_embed(center(r.series, doc.origin_offset), config.p, config.lag_steps, config.d));
      for (const auto& w : out.back().warnings) doc.warnings.push_back(w);
    }
    return out;
  });
  log.info("embedded " + std::to_string(embedded.size()) + " trajectories in dimension " +
           std::to_string(embedded.front().dim()));

  doc.manifold = stage("geometry", [&] { return fit_manifold(embedded, config.d, config.m); });
  doc.training_ermse = doc.manifold.training_ermse;
  log.info("manifold fit, training ERMSE " + std::to_string(doc.training_ermse));

  std::vector<Eigen::MatrixXd> xi, xi_dot;
  for (const auto& e : embedded) {
    xi.push_back(project(doc.manifold.V, e.vectors));
    xi_dot.push_back(estimate_derivative(xi.back(), doc.dt));
  }
  doc.dynamics = stage("dynamics", [&] { return fit_reduced_dynamics(xi, xi_dot, config.r); });
  log.info("reduced dynamics residual RMS " + std::to_string(doc.dynamics.residual_rms));

  NormalFormOptions opts;
  opts.resonance_tol = config.resonance_tol;
  doc.normal_form = stage("normal_form", [&] { return normal_form(doc.dynamics, xi, config.n_nf, opts); });
  log.info("normal form converged in " + std::to_string(doc.normal_form.iterations) + " iterations");

  try {
    doc.polar = to_polar(doc.normal_form);
  } catch (const Error& e) {
    doc.warnings.push_back(std::string("no polar form: ") + e.what());
  }

  try {
    std::vector<Eigen::MatrixXd> truth, estimate;
    const Eigen::Index q = static_cast<Eigen::Index>(config.channels.size());
    for (const auto& e : embedded) {
      const double span = static_cast<double>(e.length() - 1) * doc.dt;
      const Prediction pr = predict_observable(doc.manifold, doc.normal_form, e.vectors.col(0), span, doc.dt);
      truth.push_back(leading_rows(e.vectors, config.p, q));
      estimate.push_back(leading_rows(pr.y, config.p, q));
    }
    doc.training_cnmte = mean_cnmte(truth, estimate);
  } catch (const Error& e) {
    doc.warnings.push_back(std::string("training CNMTE unavailable: ") + e.what());
  }
  for (const auto& w : doc.warnings) log.warn(w);

  json inputs = json::array();
  for (const auto& p : config.train) inputs.push_back({{"path", p}, {"fnv1a64", file_hash(p)}});
  json snapshot = json::object();
  for (const auto& [k, v] : config.raw) snapshot[k] = v;
  doc.provenance = {{"timestamp", utc_timestamp()}, {"inputs", inputs}, {"config", snapshot}};

  const json j = to_json(doc);
  const fs::path out = dir / "model.json";
  write_text(out, j.dump(2) + "\n");
  json summary = {{"command", "fit"},
                  {"output", out.string()},
                  {"reproducibility_hash", reproducibility_hash(j)},
                  {"training_ermse", j["metrics"]["training_ermse"]},
                  {"training_cnmte", j["metrics"]["training_cnmte"]}};
  if (doc.polar) summary["polar"] = j["polar"];
  return summary;
}

json cmd_predict(const PipelineConfig& config, const Log& log) {
  require_file("model", config.model);
  require_file("test", config.test);
  const fs::path dir = output_dir(config);
  const ModelDocument doc = stage("model", [&] { return read_model_document(config.model); });
  const Recording rec = stage("embedding", [&] { return load_recording(config.test, doc.channels, config.trim_start); });
  if (std::abs(rec.series.dt - doc.dt) > 1e-6 * doc.dt)
    throw StageError("embedding", InputError("test sampling interval differs from the model's"));
  const EmbeddedSeries e = stage("embedding", [&] {
    return delay_embed(center(rec.series, doc.origin_offset), doc.p, doc.lag_steps);
  });
  const double span = config.t_span > 0.0 ? config.t_span : static_cast<double>(e.length() - 1) * doc.dt;
  const Prediction pr = stage("predict", [&] {
    return predict_observable(doc.manifold, doc.normal_form, e.vectors.col(0), span, doc.dt);
  });
  for (const auto& w : pr.warnings) log.warn(w);

  const Eigen::Index q = static_cast<Eigen::Index>(doc.channels.size());
  const Eigen::MatrixXd est = leading_rows(pr.y, doc.p, q);
  CsvTable table;
  table.header.push_back("t");
  for (const auto& c : doc.channels) table.header.push_back(c);
  table.rows.resize(est.cols(), q + 1);
  for (Eigen::Index k = 0; k < est.cols(); ++k) {
    table.rows(k, 0) = rec.t0 + pr.times(k);
    table.rows.row(k).tail(q) = (est.col(k) + doc.origin_offset).transpose();
  }
  const fs::path out = dir / "prediction.csv";
  write_csv_file(out.string(), table);

  const Eigen::Index overlap = std::min(est.cols(), e.length());
  const double err = stage("metrics", [&] {
    return cnmte(leading_rows(e.vectors, doc.p, q).leftCols(overlap), est.leftCols(overlap));
  });
  return {{"command", "predict"}, {"output", out.string()}, {"cnmte", err}, {"samples", est.cols()},
          {"warnings", pr.warnings}};
}

json cmd_backbone(const PipelineConfig& config, const Log& log) {
  require_file("model", config.model);
  const fs::path dir = output_dir(config);
  const ModelDocument doc = stage("model", [&] { return read_model_document(config.model); });
  if (!doc.polar || doc.polar->pairs.empty())
    throw StageError("backbone", InputError("model has no polar form"));
  const std::string name = config.observable.empty() ? doc.channels.front() : config.observable;
  const auto it = std::find(doc.channels.begin(), doc.channels.end(), name);
  if (it == doc.channels.end()) throw ConfigError("observable '" + name + "' is not a model channel");
  Eigen::VectorXd g = Eigen::VectorXd::Zero(doc.manifold.n);
  g(static_cast<Eigen::Index>(it - doc.channels.begin()) * doc.p) = 1.0;

  const double trained = doc.normal_form.max_training_amplitude;
  const double rho_max = config.rho_max.value_or(trained);
  if (rho_max < 0.0) throw ConfigError("rho_max must be non-negative");
  const BackboneCurve curve = stage("backbone", [&] {
    return backbone_curves(
        doc.polar->pairs.front(), [&](double rho) { return amplitude_map(doc.manifold, doc.normal_form, g, rho); },
        rho_max, config.samples, trained);
  });
  if (curve.extrapolated) log.warn("rho_max exceeds the trained amplitude " + std::to_string(trained));

  CsvTable table;
  table.header = {"rho", "gamma", "omega", "amplitude"};
  table.rows.resize(curve.rho.size(), 4);
  for (Eigen::Index k = 0; k < curve.rho.size(); ++k)
    table.rows.row(k) << curve.rho(k), curve.gamma(k), curve.omega(k), curve.amplitude(k);
  const fs::path out = dir / "backbone.csv";
  write_csv_file(out.string(), table);
  return {{"command", "backbone"}, {"output", out.string()}, {"rows", curve.rho.size()},
          {"extrapolated", curve.extrapolated}, {"trained_rho", trained}};
}

json cmd_render_synthetic(const PipelineConfig& config, const Log& log) {
  if (config.frames < 1) throw ConfigError("frames must be at least 1");
  if (!(config.render_fps > 0.0)) throw ConfigError("render_fps must be positive");
  const Eigen::Vector2d center(config.canvas_w / 2.0, config.canvas_h / 2.0);
  std::vector<Pose> poses;
  Eigen::MatrixXd tip;
  if (config.scenario == "static") {
    poses.assign(config.frames, Pose{center.x(), center.y(), 0.0});
  } else if (config.scenario == "damped_oscillation") {
    poses = damped_cosine_track(config.frames, config.render_fps, center, config.amplitude_px,
                                config.amplitude_deg, config.omega, config.decay);
  } else if (config.scenario == "double_pendulum") {
    const DoublePendulumParams p;
    const Eigen::MatrixXd states = simulate_double_pendulum(
        p, dp_slow_mode_state(p, config.dp_amplitude), 1.0 / config.render_fps, config.frames - 1);
    tip.resize(2, states.cols());
    for (Eigen::Index k = 0; k < states.cols(); ++k) {
      tip.col(k) = dp_tip_position(states.col(k), p);
      poses.push_back(Pose{center.x() + config.px_per_m * tip(0, k),
                           center.y() - config.px_per_m * (tip(1, k) + p.l1 + p.l2),
                           states(1, k) * 180.0 / std::numbers::pi});
    }
  } else {
    throw UsageError("unknown scenario '" + config.scenario +
                      "' (expected static, damped_oscillation or double_pendulum)");
  }
  const fs::path dir = output_dir(config);
  const Frame background(config.canvas_w, config.canvas_h, 1, 0.2);
  const RenderedVideo rv = stage("render", [&] {
    return render_marker_video(poses, make_marker(config.marker_size), background, config.render_fps);
  });
  const fs::path video = dir / "video.raw";
  write_raw_container(video, rv.video);
  std::ofstream truth(dir / "truth.csv");
  if (!truth) throw InputError("cannot write ground truth CSV");
  write_track_csv(truth, rv.truth);
  json summary = {{"command", "render-synthetic"},
                  {"scenario", config.scenario},
                  {"video", video.string()},
                  {"truth", (dir / "truth.csv").string()},
                  {"frames", rv.video.size()},
                  {"template_region",
                   {{"x0", static_cast<int>(std::lround(rv.truth.xs[0] - (config.marker_size - 1) / 2.0))},
                    {"y0", static_cast<int>(std::lround(rv.truth.ys[0] - (config.marker_size - 1) / 2.0))},
                    {"w", config.marker_size},
                    {"h", config.marker_size}}}};
  if (tip.size()) {
    CsvTable t;
    t.header = {"t", "x", "y"};
    t.rows.resize(tip.cols(), 3);
    for (Eigen::Index k = 0; k < tip.cols(); ++k) t.rows.row(k) << rv.truth.times[k], tip(0, k), tip(1, k);
    write_csv_file((dir / "tip.csv").string(), t);
    summary["tip"] = (dir / "tip.csv").string();
  }
  log.info("rendered " + std::to_string(rv.video.size()) + " frames");
  return summary;
}

}  // namespace vidssm
