#pragma once

#include <filesystem>
#include <ostream>
#include <string_view>
#include <vector>

#include "otafl/orchestrator.hpp"

namespace otafl {

enum class Preset { fig1, fig2, fig3, single };

Preset parse_preset(std::string_view name);
std::string_view to_string(Preset preset);

/// Strategies plotted against each other in the average-power figure.
std::vector<StrategyConfig> fig1_strategies(const StrategyConfig& base);
/// All beamformer x power combinations.
std::vector<StrategyConfig> fig2_strategies(const StrategyConfig& base);

/// round,strategy,ue,avg_power
void write_avg_power_csv(std::ostream& out, const std::vector<SimulationResult>& runs);
/// round,strategy,loss,gap
void write_loss_csv(std::ostream& out, const std::vector<SimulationResult>& runs);
/// V,final_loss,final_gap,convergence_round,max_avg_power
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);
/// One row per (round, UE) with every RoundRecord field.
void write_rounds_csv(std::ostream& out, const SimulationResult& run);

nlohmann::json run_summary(const SimulationResult& run);

/// Runs configs concurrently on up to `jobs` threads; results keep input order.
std::vector<SimulationResult> run_all(const std::vector<SimulationConfig>& configs, int jobs);

/// Runs a preset and writes its files into `out_dir`. Returns 0 when every run
/// finished and passed check_invariants, 1 when an invariant failed, 2 on I/O errors.
int run_experiment(Preset preset, const SimulationConfig& cfg, const std::filesystem::path& out_dir,
                   std::ostream& log, int jobs = 1);

}  // namespace otafl
