#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "finsim/config.hpp"
#include "finsim/scenarios.hpp"

namespace {

int run_one(const std::string& scenario, finsim::ScenarioConfig cfg,
            const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  const finsim::ScenarioResult result =
      finsim::run_scenario(scenario, cfg, out_dir);
  for (const std::string& f : result.written_files) {
    std::printf("wrote %s\n", f.c_str());
  }
  for (const auto& [key, value] : result.metrics) {
    std::printf("%s = %.9g\n", key.c_str(), value);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finsim - wire-driven robotic fish simulation toolkit"};
  app.require_subcommand(1);

  auto* list_cmd = app.add_subcommand("list", "enumerate available scenarios");

  std::string scenario, config_path, out_dir = "out";
  double t_end = 0.0, dt = 0.0;
  std::vector<std::string> sweep;
  auto* run_cmd = app.add_subcommand("run", "run a scenario");
  run_cmd->add_option("scenario", scenario, "scenario name")->required();
  run_cmd->add_option("--config", config_path, "config file (key = value)");
  run_cmd->add_option("--out", out_dir, "output directory");
  run_cmd->add_option("--t-end", t_end, "override run.t_end_s");
  run_cmd->add_option("--dt", dt, "override run.dt_s");
  run_cmd->add_option("--sweep", sweep,
                      "key=value parameter variants, one run per entry");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*list_cmd) {
      for (const finsim::ScenarioEntry& e : finsim::scenario_registry()) {
        std::printf("%-14s %s\n", e.name.c_str(), e.description.c_str());
      }
      return 0;
    }

    finsim::ScenarioConfig cfg;
    if (!config_path.empty()) cfg = finsim::load_config(config_path);
    if (t_end > 0.0) cfg.t_end_s = t_end;
    if (dt > 0.0) cfg.dt_s = dt;
    cfg.validate();

    if (sweep.empty()) return run_one(scenario, cfg, out_dir);

    for (const std::string& variant : sweep) {
      const auto eq = variant.find('=');
      if (eq == std::string::npos) {
        throw finsim::ConfigError("--sweep entry must be key=value: " + variant);
      }
      finsim::ScenarioConfig vcfg =
          finsim::parse_config_text(finsim::serialize_config(cfg) + variant + "\n");
      std::string tag = variant;
      for (char& c : tag) {
        if (c == '.' || c == '=' || c == '/') c = '_';
      }
      run_one(scenario, vcfg, out_dir + "/" + tag);
    }
    return 0;
  } catch (const finsim::ConfigError& e) {
    std::fprintf(stderr, "error: config: %s\n", e.what());
    return 1;
  } catch (const finsim::SimulationError& e) {
    std::fprintf(stderr, "error: simulation: %s\n", e.what());
    return 2;
  } catch (const finsim::IoError& e) {
    std::fprintf(stderr, "error: io: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: internal: %s\n", e.what());
    return 2;
  }
}
