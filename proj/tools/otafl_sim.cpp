// Command-line front end for the OTA-FL simulator.
//
//   otafl_sim --preset fig1 --seed 3 --out results/
//   otafl_sim --config run.json --set lyapunov.V=100 --set run.rounds=50

#include <cstdlib>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "otafl/config.hpp"
#include "otafl/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Over-the-air federated learning in a cell-free MIMO uplink"};

  std::string config_path;
  std::string preset_name = "single";
  std::optional<std::uint64_t> seed;
  std::optional<int> rounds;
  std::optional<std::string> out_dir;
  std::vector<std::string> overrides;
  int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  bool print_config = false;

  app.add_option("--config", config_path, "Flat JSON config with dotted keys")
      ->check(CLI::ExistingFile);
  app.add_option("--preset", preset_name, "fig1 | fig2 | fig3 | single")
      ->check(CLI::IsMember({"fig1", "fig2", "fig3", "single"}));
  app.add_option("--seed", seed, "Master seed (run.seed)");
  app.add_option("--rounds", rounds, "Number of FL rounds T (run.rounds)");
  app.add_option("--out", out_dir, "Output directory (output.dir); env OTAFL_OUT_DIR also works");
  app.add_option("--set", overrides, "Override a config key, key=value (repeatable)");
  app.add_option("--jobs", jobs, "Worker threads for multi-run presets")->check(CLI::PositiveNumber);
  app.add_flag("--print-config", print_config, "Print the resolved config and exit");

  CLI11_PARSE(app, argc, argv);

  otafl::ConfigSources sources;
  if (!config_path.empty()) sources.file = config_path;
  if (const char* env = std::getenv("OTAFL_OUT_DIR")) sources.env_out_dir = env;
  if (seed) sources.overrides.push_back("run.seed=" + std::to_string(*seed));
  if (rounds) sources.overrides.push_back("run.rounds=" + std::to_string(*rounds));
  for (const auto& o : overrides) sources.overrides.push_back(o);
  if (out_dir) sources.overrides.push_back("output.dir=" + nlohmann::json(*out_dir).dump());

  otafl::SimulationConfig cfg;
  try {
    cfg = otafl::parse_config(sources);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  if (print_config) {
    std::cout << otafl::to_json(cfg).dump(2) << '\n';
    return 0;
  }

  try {
    return otafl::run_experiment(otafl::parse_preset(preset_name), cfg, cfg.out_dir, std::cerr,
                                 jobs);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
