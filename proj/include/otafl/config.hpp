#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "otafl/channel_env.hpp"
#include "otafl/power_control.hpp"
#include "otafl/ridge_task.hpp"

#include <json.hpp>

namespace otafl {

enum class BeamformerKind { mop, mrc };
enum class PowerKind { lofpc, fixed, ci, lgr };

std::string_view to_string(BeamformerKind kind);
std::string_view to_string(PowerKind kind);
BeamformerKind parse_beamformer(std::string_view name);
PowerKind parse_power(std::string_view name);

/// "MOP-LOFPC" style label.
std::string strategy_label(BeamformerKind bf, PowerKind power);

struct AlternationConfig {
  int max_iters = 20;
  double tol = 1e-6;
};

struct StrategyConfig {
  BeamformerKind beamformer = BeamformerKind::mop;
  PowerKind power = PowerKind::lofpc;
  LyapunovConfig lyapunov;
  AlternationConfig alternation;
  DualConfig dual;
};

/// Everything a run needs. Defaults reproduce the reference setup: 3 UEs,
/// 6 APs with 4 antennas on a 500 m square, 2.4 GHz, -101 dBm noise,
/// P_ave = 0.3 W, P_max = 0.5 W, q = 10, rho = 5e-5, 1000 samples per UE.
struct SimulationConfig {
  int num_ues = 3;
  int num_aps = 6;
  int n_rx = 4;
  double area_side = 500.0;

  PathLossParams path_loss;
  double noise_dbm = -101.0;

  TaskHyperparams task;
  int samples_per_ue = 1000;
  LabelRule label;

  double p_ave = 0.3;
  double p_max = 0.5;

  double gap_G = 0.0;  // 0 selects G from the first round's local models
  double gap_G_safety = 2.0;
  double gap_S = 1.0;
  double gap_mu = 0.0;
  double gap_N = 0.0;
  double gap_W = 0.0;
  std::optional<double> gap_A;
  std::optional<double> gap_B;
  std::optional<double> gap_C;

  StrategyConfig strategy;

  int rounds = 300;
  std::uint64_t seed = 1;
  bool perfect_channel = false;

  std::vector<double> sweep_v = {1.0, 10.0, 100.0};
  std::string out_dir = "out";
};

/// Throws std::invalid_argument describing the first violated constraint.
void validate(const SimulationConfig& cfg);

/// Flat object keyed by dotted names, e.g. "channel.exponent".
nlohmann::json to_json(const SimulationConfig& cfg);

/// Applies the keys of a flat JSON object on top of `cfg`. Unknown keys and
/// type mismatches throw std::invalid_argument.
void apply_json(SimulationConfig& cfg, const nlohmann::json& flat);

/// Applies one "key=value" override. The value is read as JSON when it parses
/// (numbers, booleans, null, lists), otherwise as a bare string.
void apply_override(SimulationConfig& cfg, std::string_view assignment);

std::vector<std::string> config_keys();

struct ConfigSources {
  std::optional<std::string> file;
  std::optional<std::string> env_out_dir;
  std::vector<std::string> overrides;  // applied last, in order
};

/// defaults < file < environment < overrides, then validated.
SimulationConfig parse_config(const ConfigSources& sources);

SimulationConfig load_config_file(const std::string& path);

}  // namespace otafl
