#include "test_util.hpp"
#include "vidssm/commands.hpp"
#include "vidssm/config.hpp"
#include "vidssm/csv.hpp"
#include "vidssm/errors.hpp"
#include "vidssm/integrate.hpp"
#include "vidssm/model_document.hpp"
#include "vidssm/synthetic.hpp"
#include "vidssm/tracker.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace vidssm;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int exit_code;
  nlohmann::json output;
};

CliResult run_cli(const std::string& args) {
  const std::string cmd = std::string(VIDSSM_CLI) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) throw std::runtime_error("popen failed");
  std::string text;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) text.append(buf, n);
  const int status = pclose(pipe);
  return {WEXITSTATUS(status), nlohmann::json::parse(text)};
}

std::ostringstream sink;
const Log quiet(sink, LogLevel::error);

// Writes t,x,y columns sampled every dt.
std::string write_xy(const fs::path& path, const Eigen::MatrixXd& xy, double dt) {
  CsvTable t;
  t.header = {"t", "x", "y"};
  t.rows.resize(xy.cols(), 3);
  for (Eigen::Index k = 0; k < xy.cols(); ++k) t.rows.row(k) << k * dt, xy(0, k), xy(1, k);
  write_csv_file(path.string(), t);
  return path.string();
}

Eigen::MatrixXd hopf_orbit(const HopfParams& hp, double amp, double phase, double dt, long steps) {
  return stack_columns(rk4([&](const Eigen::Vector2d& x) { return hopf_derivatives(x, hp); },
                           Eigen::Vector2d(amp * std::cos(phase), amp * std::sin(phase)), dt, steps));
}

PipelineConfig config_for(const ConfigMap& values) { return make_pipeline_config(values); }

// A document whose dynamics are a given polar form on a flat manifold.
ModelDocument fixture_document(const PolarPair& pair) {
  ModelDocument doc;
  doc.channels = {"x", "y"};
  doc.p = 1;
  doc.dt = 0.01;
  doc.origin_offset = Eigen::VectorXd::Zero(2);
  doc.manifold.n = 2;
  doc.manifold.d = 2;
  doc.manifold.m = 1;
  doc.manifold.basis = MultiIndexBasis(2, 1, 1);
  doc.manifold.V = Eigen::MatrixXd::Identity(2, 2);
  doc.manifold.M = doc.manifold.V;
  doc.dynamics.d = 2;
  doc.dynamics.r = 1;
  doc.dynamics.basis = MultiIndexBasis(2, 1, 1);
  doc.dynamics.R = Eigen::MatrixXd::Zero(2, 2);
  doc.normal_form = normal_form_from_polar(pair);
  doc.normal_form.max_training_amplitude = 0.6;
  doc.polar = PolarModel{{pair}};
  return doc;
}

}  // namespace

TEST(Config, ParsesCommentsAndWhitespace) {
  std::istringstream in("# header\n\n p = 7 \nchannels = x, y,theta  # trailing\ntrain=a.csv,b.csv\n");
  const ConfigMap m = parse_config(in);
  EXPECT_EQ(m.at("p"), "7");
  const PipelineConfig c = config_for(m);
  EXPECT_EQ(c.p, 7);
  EXPECT_EQ(c.channels, (std::vector<std::string>{"x", "y", "theta"}));
  EXPECT_EQ(c.train, (std::vector<std::string>{"a.csv", "b.csv"}));
}

TEST(Config, OverridesAndDefaults) {
  ConfigMap m;
  apply_override(m, "score_thresh=0.3");
  apply_override(m, "n_nf=5");
  const PipelineConfig c = config_for(m);
  EXPECT_EQ(c.search.score_thresh, 0.3);
  EXPECT_EQ(c.n_nf, 5);
  EXPECT_EQ(c.search.theta_interval, 5.0);
  EXPECT_EQ(c.search.iou_thresh, 0.3);
  EXPECT_FALSE(c.rho_max.has_value());
  EXPECT_THROW(apply_override(m, "no_equals_sign"), ConfigError);
}

TEST(Config, RejectsUnknownAndMalformed) {
  EXPECT_THROW(config_for({{"colour", "red"}}), ConfigError);
  EXPECT_THROW(config_for({{"p", "five"}}), ConfigError);
  EXPECT_THROW(config_for({{"d", "0"}}), ConfigError);
  EXPECT_THROW(config_for({{"template_x0", "3"}, {"template_w", "5"}}), ConfigError);
}

TEST(Config, TemplateRegion) {
  const PipelineConfig c = config_for(
      {{"template_x0", "3"}, {"template_y0", "4"}, {"template_w", "5"}, {"template_h", "6"}});
  ASSERT_TRUE(c.template_region.has_value());
  EXPECT_EQ(*c.template_region, (Region{3, 4, 5, 6}));
}

class FitPipeline : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = testutil::scratch_dir("pipeline_fit");
    const HopfParams hp{-0.05, 3.0, -0.2, 0.5};
    const double dt = 0.01;
    train_a_ = write_xy(dir_ / "a.csv", hopf_orbit(hp, 1.0, 0.0, dt, 3000), dt);
    train_b_ = write_xy(dir_ / "b.csv", hopf_orbit(hp, 0.8, 2.0, dt, 3000), dt);
    test_ = write_xy(dir_ / "test.csv", hopf_orbit(hp, 0.9, 1.0, dt, 1000), dt);
    summary_ = cmd_fit(config_for(base()), quiet);
  }

  static ConfigMap base() {
    return {{"train", train_a_ + "," + train_b_}, {"p", "1"}, {"d", "2"}, {"m", "1"}, {"r", "3"},
            {"n_nf", "3"}, {"fixed_point", "none"}, {"out", dir_.string()}};
  }

  static inline fs::path dir_;
  static inline std::string train_a_, train_b_, test_;
  static inline nlohmann::json summary_;
};

TEST_F(FitPipeline, HopfPolarCoefficientsMatchOracle) {
  const auto& pair = summary_["polar"][0];
  // Direct observation: unit eigenvectors give |z_hopf|^2 = 2 |z|^2.
  EXPECT_NEAR(pair["gamma"][0].get<double>(), -0.05, 0.05 * 0.05);
  EXPECT_NEAR(pair["omega"][0].get<double>(), 3.0, 0.05 * 3.0);
  EXPECT_NEAR(0.5 * pair["gamma"][1].get<double>(), -0.2, 0.05 * 0.2);
  EXPECT_NEAR(0.5 * pair["omega"][1].get<double>(), 0.5, 0.05 * 0.5);
}

TEST_F(FitPipeline, DocumentRoundTripIsBitExact) {
  const ModelDocument doc = read_model_document((dir_ / "model.json").string());
  std::ifstream in(dir_ / "model.json");
  const nlohmann::json original = nlohmann::json::parse(in);
  EXPECT_EQ(to_json(doc).dump(), original.dump());

  const ModelDocument again = model_from_json(to_json(doc));
  const Eigen::VectorXd y0 = Eigen::Vector2d(0.7, -0.2);
  const Prediction a = predict_observable(doc.manifold, doc.normal_form, y0, 2.0, doc.dt);
  const Prediction b = predict_observable(again.manifold, again.normal_form, y0, 2.0, doc.dt);
  EXPECT_EQ(a.y, b.y);
}

TEST_F(FitPipeline, ReproducibilityHashIgnoresTimestamp) {
  std::ifstream in(dir_ / "model.json");
  nlohmann::json j = nlohmann::json::parse(in);
  const std::string h = reproducibility_hash(j);
  EXPECT_EQ(h, summary_["reproducibility_hash"].get<std::string>());
  j["provenance"]["timestamp"] = "1999-01-01T00:00:00Z";
  EXPECT_EQ(reproducibility_hash(j), h);
  j["normal_form"]["resonance_tol"] = 0.2;
  EXPECT_NE(reproducibility_hash(j), h);
}

TEST_F(FitPipeline, PredictHeldOutAndTraining) {
  ConfigMap c = base();
  c["model"] = (dir_ / "model.json").string();
  c["test"] = test_;
  const nlohmann::json held_out = cmd_predict(config_for(c), quiet);
  EXPECT_LT(held_out["cnmte"].get<double>(), 0.03);
  EXPECT_TRUE(fs::exists(dir_ / "prediction.csv"));
  const CsvTable pred = read_csv_file((dir_ / "prediction.csv").string());
  EXPECT_EQ(pred.header, (std::vector<std::string>{"t", "x", "y"}));
  EXPECT_EQ(pred.rows.rows(), 1001);

  c["test"] = train_a_;
  const nlohmann::json in_sample = cmd_predict(config_for(c), quiet);
  EXPECT_LE(in_sample["cnmte"].get<double>(), 2.0 * summary_["training_cnmte"].get<double>() + 1e-12);
}

TEST_F(FitPipeline, ShortTestTrajectoryIsInputError) {
  ConfigMap c = base();
  c["p"] = "1";
  c["model"] = (dir_ / "model.json").string();
  c["test"] = write_xy(dir_ / "short.csv", Eigen::MatrixXd::Ones(2, 1), 0.01);
  try {
    cmd_predict(config_for(c), quiet);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), "input");
  }
}

TEST(FitCommand, AcceptsTrackerExportAtSixtyFps) {
  const auto dir = testutil::scratch_dir("pipeline_track_export");
  const Eigen::MatrixXd xy = hopf_orbit(HopfParams{-0.1, 2.0, -0.2, 0.3}, 1.0, 0.0, 1.0 / 60.0, 600);
  TrackSeries s;
  for (Eigen::Index k = 0; k < xy.cols(); ++k) {
    s.times.push_back(k / 60.0);
    s.xs.push_back(xy(0, k));
    s.ys.push_back(xy(1, k));
    s.thetas.push_back(0.0);
    s.scores.push_back(0.0);
  }
  {
    std::ofstream f(dir / "track.csv");
    write_track_csv(f, s);
  }
  EXPECT_NO_THROW(cmd_fit(config_for({{"train", (dir / "track.csv").string()}, {"channels", "x,y"}, {"p", "1"},
                                      {"m", "1"}, {"r", "3"}, {"n_nf", "3"}, {"fixed_point", "none"},
                                      {"out", dir.string()}}),
                          quiet));
}

TEST(FitCommand, LinearDataHasNoNonlinearCoefficients) {
  const auto dir = testutil::scratch_dir("pipeline_linear");
  const HopfParams hp{-0.1, 2.0, 0.0, 0.0};
  const std::string a = write_xy(dir / "a.csv", hopf_orbit(hp, 1.0, 0.0, 0.01, 2000), 0.01);
  cmd_fit(config_for({{"train", a}, {"p", "1"}, {"m", "1"}, {"r", "3"}, {"n_nf", "3"},
                      {"fixed_point", "none"}, {"out", dir.string()}}),
          quiet);
  const ModelDocument doc = read_model_document((dir / "model.json").string());
  // The second-order edge stencils of the derivative leave O(dt^2) residue.
  EXPECT_LT(doc.dynamics.R.rightCols(doc.dynamics.R.cols() - 2).cwiseAbs().maxCoeff(), 1e-4);
  EXPECT_LT(doc.normal_form.N.rightCols(doc.normal_form.N.cols() - 2).cwiseAbs().maxCoeff(), 1e-4);
}

TEST(FitCommand, TooFewSamplesIsGeometryStageError) {
  const auto dir = testutil::scratch_dir("pipeline_short");
  const std::string a = write_xy(dir / "a.csv", hopf_orbit(HopfParams{-0.1, 2.0, 0, 0}, 1.0, 0.0, 0.01, 30), 0.01);
  try {
    cmd_fit(config_for({{"train", a}, {"p", "3"}, {"m", "3"}, {"fixed_point", "none"}, {"out", dir.string()}}),
            quiet);
    FAIL();
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "geometry");
    EXPECT_EQ(e.kind(), "input");
  }
}

TEST(BackboneCommand, FixtureCurves) {
  const auto dir = testutil::scratch_dir("pipeline_backbone");
  write_model_document((dir / "slosh.json").string(), fixture_document(sloshing_fixture()));
  write_model_document((dir / "shimmy.json").string(), fixture_document(shimmy_fixture()));

  const auto curve = [&](const std::string& model, const std::string& rho_max, int samples) {
    ConfigMap c{{"model", (dir / model).string()}, {"samples", std::to_string(samples)}, {"out", dir.string()}};
    if (!rho_max.empty()) c["rho_max"] = rho_max;
    const nlohmann::json s = cmd_backbone(config_for(c), quiet);
    return std::make_pair(s, read_csv_file((dir / "backbone.csv").string()));
  };

  const auto [slosh_summary, slosh] = curve("slosh.json", "", 40);
  EXPECT_EQ(slosh.header, (std::vector<std::string>{"rho", "gamma", "omega", "amplitude"}));
  const Eigen::VectorXd omega = slosh.column("omega");
  for (Eigen::Index k = 1; k < omega.size(); ++k) EXPECT_LT(omega(k), omega(k - 1));
  EXPECT_FALSE(slosh_summary["extrapolated"].get<bool>());

  const auto [shimmy_summary, shimmy] = curve("shimmy.json", "0.6", 601);
  const Eigen::VectorXd gamma = shimmy.column("gamma");
  int changes = 0;
  for (Eigen::Index k = 2; k < gamma.size(); ++k)
    if ((gamma(k) < 0) != (gamma(k - 1) < 0)) ++changes;
  EXPECT_EQ(changes, 2);

  const auto [origin_summary, origin] = curve("slosh.json", "0", 50);
  ASSERT_EQ(origin.rows.rows(), 1);
  EXPECT_EQ(origin.rows(0, 0), 0.0);
  EXPECT_EQ(origin.rows(0, 3), 0.0);

  const auto [far_summary, far] = curve("slosh.json", "2.0", 10);
  EXPECT_TRUE(far_summary["extrapolated"].get<bool>());
}

TEST(ErrorJson, StageKeepsFrameIndex) {
  const StageError e("tracker", TrackingLostError(17));
  const nlohmann::json j = error_json(e);
  EXPECT_EQ(j["error"]["kind"], "tracking_lost");
  EXPECT_EQ(j["error"]["stage"], "tracker");
  EXPECT_EQ(j["error"]["frame"], 17);
}

TEST(Cli, RenderAndTrackStaticScene) {
  const auto dir = testutil::scratch_dir("cli_static");
  const CliResult r = run_cli("render-synthetic --out " + dir.string() +
                              " --set scenario=static --set frames=8");
  ASSERT_EQ(r.exit_code, 0) << r.output.dump();
  const auto& reg = r.output["template_region"];
  std::ostringstream args;
  args << "track --out " << dir.string() << " --set input=" << r.output["video"].get<std::string>()
       << " --set template_x0=" << reg["x0"] << " --set template_y0=" << reg["y0"]
       << " --set template_w=" << reg["w"] << " --set template_h=" << reg["h"];
  const CliResult t = run_cli(args.str());
  ASSERT_EQ(t.exit_code, 0) << t.output.dump();
  EXPECT_EQ(t.output["frames"], 8);
  std::ifstream in(dir / "track.csv");
  const TrackSeries s = read_track_csv(in);
  ASSERT_EQ(s.size(), 8u);
  for (std::size_t i = 1; i < s.size(); ++i) {
    EXPECT_EQ(s.xs[i], s.xs[0]);
    EXPECT_EQ(s.ys[i], s.ys[0]);
    EXPECT_EQ(s.thetas[i], 0.0);
    EXPECT_EQ(s.scores[i], 0.0);
  }
}

TEST(Cli, RenderDampedOscillationTracksWithinOnePixel) {
  const auto dir = testutil::scratch_dir("cli_damped");
  const CliResult r = run_cli("render-synthetic --out " + dir.string() +
                              " --set scenario=damped_oscillation --set frames=60 --set amplitude_deg=0");
  ASSERT_EQ(r.exit_code, 0) << r.output.dump();
  const auto& reg = r.output["template_region"];
  std::ostringstream args;
  args << "track --out " << dir.string() << " --set input=" << r.output["video"].get<std::string>()
       << " --set template_x0=" << reg["x0"] << " --set template_y0=" << reg["y0"]
       << " --set template_w=" << reg["w"] << " --set template_h=" << reg["h"];
  ASSERT_EQ(run_cli(args.str()).exit_code, 0);
  std::ifstream a(dir / "track.csv"), b(dir / "truth.csv");
  const TrackSeries got = read_track_csv(a), truth = read_track_csv(b);
  ASSERT_EQ(got.size(), truth.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    EXPECT_LE(std::abs(got.xs[i] - truth.xs[i]), 1.0);
    EXPECT_LE(std::abs(got.ys[i] - truth.ys[i]), 1.0);
  }
}

TEST(Cli, DoublePendulumScenarioWritesTip) {
  const auto dir = testutil::scratch_dir("cli_dp");
  const CliResult r = run_cli("render-synthetic --out " + dir.string() +
                              " --set scenario=double_pendulum --set frames=30 --set render_fps=240");
  ASSERT_EQ(r.exit_code, 0) << r.output.dump();
  const CsvTable tip = read_csv_file(r.output["tip"].get<std::string>());
  EXPECT_EQ(tip.rows.rows(), 30);
  EXPECT_TRUE(fs::exists(dir / "video.raw"));
  EXPECT_TRUE(fs::exists(dir / "truth.csv"));
}

TEST(Cli, UnknownScenarioIsUsageError) {
  const auto dir = testutil::scratch_dir("cli_unknown");
  const CliResult r = run_cli("render-synthetic --out " + dir.string() + " --set scenario=tornado");
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_EQ(r.output["error"]["kind"], "usage");
}

TEST(Cli, MissingInputIsConfigError) {
  const auto dir = testutil::scratch_dir("cli_missing");
  const CliResult r = run_cli("track --out " + dir.string() + " --set input=" + (dir / "nope.raw").string() +
                              " --set template_x0=0 --set template_y0=0 --set template_w=5 --set template_h=5");
  EXPECT_NE(r.exit_code, 0);
  EXPECT_EQ(r.output["error"]["kind"], "config");
}

TEST(Cli, MissingSubcommandIsUsageError) {
  EXPECT_EQ(run_cli("").exit_code, 2);
}
