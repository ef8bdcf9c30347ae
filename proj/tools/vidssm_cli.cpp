#include "vidssm/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

struct Options {
  std::string config;
  std::string out;
  std::string log_level = "warn";
  std::vector<std::string> sets;
};

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config, "flat key=value config file");
  sub->add_option("--out", o.out, "output directory");
  sub->add_option("--log-level", o.log_level, "error, warn, info or debug")
      ->check(CLI::IsMember({"error", "warn", "info", "debug"}));
  sub->add_option("--set", o.sets, "override one config key (key=value), repeatable");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Video tracking and data-driven reduced-order models"};
  app.require_subcommand(1);
  Options o;
  using Command = nlohmann::json (*)(const vidssm::PipelineConfig&, const vidssm::Log&);
  const std::vector<std::tuple<std::string, std::string, Command>> commands = {
      {"track", "track a template through a video", vidssm::cmd_track},
      {"fit", "fit manifold, reduced dynamics and normal form to tracks", vidssm::cmd_fit},
      {"predict", "reconstruct a test trajectory from its initial condition", vidssm::cmd_predict},
      {"backbone", "tabulate damping and backbone curves", vidssm::cmd_backbone},
      {"render-synthetic", "render a synthetic marker video with ground truth", vidssm::cmd_render_synthetic},
  };
  for (const auto& [name, help, fn] : commands) add_common(app.add_subcommand(name, help), o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, std::cerr, std::cerr);
    if (code != 0)
      std::cout << nlohmann::json{{"error", {{"kind", "usage"}, {"message", e.what()}}}}.dump() << std::endl;
    return code == 0 ? 0 : 2;
  }

  try {
    vidssm::ConfigMap values;
    if (!o.config.empty()) values = vidssm::read_config_file(o.config);
    for (const auto& s : o.sets) vidssm::apply_override(values, s);
    if (!o.out.empty()) values["out"] = o.out;
    const vidssm::PipelineConfig config = vidssm::make_pipeline_config(values);
    const vidssm::Log log(std::cerr, vidssm::parse_log_level(o.log_level));
    for (const auto& [name, help, fn] : commands)
      if (app.got_subcommand(name)) {
        std::cout << fn(config, log).dump(2) << std::endl;
        return 0;
      }
  } catch (const vidssm::Error& e) {
    std::cout << vidssm::error_json(e).dump() << std::endl;
    return e.kind() == "usage" ? 2 : 1;
  } catch (const std::exception& e) {
    std::cout << nlohmann::json{{"error", {{"kind", "internal"}, {"message", e.what()}}}}.dump() << std::endl;
    return 3;
  }
  return 0;
}
