#pragma once

#include <optional>
#include <string>
#include <vector>

#include "otafl/beamforming.hpp"
#include "otafl/config.hpp"
#include "otafl/ota_link.hpp"
#include "otafl/power_control.hpp"

namespace otafl {

/// Round-t inputs that every strategy may read. Nothing here refers to later rounds.
struct RoundContext {
  const ChannelRealization& channels;
  const LargeScaleGains& gains;
  const GapCoefficients& coeffs;
  NoiseModel noise;
  int q = 10;
};

struct AlternationResult {
  PowerAllocation power;
  BeamformingVector bf;
  CVec H;
  int iters = 0;
  /// The alternation's own objective after each step pair (LOFPC: xi + V phi;
  /// Lgr inner: phi + sum lambda p; Fixed/Ci: phi), preceded by its value at
  /// the first beamformer with the initial powers.
  std::vector<double> objective_trace;
  std::vector<double> phi_trace;
};

/// Alternates beamformer and power updates starting from p = P_ave. With
/// `lambda` set, the power step is the Lgr penalized solve and the start is
/// `p_hat_start` when given.
AlternationResult alternate_round(const RoundContext& ctx, const VirtualQueueState& queue,
                                  const StrategyConfig& strategy, const PowerBudget& budget,
                                  const RVec* lambda = nullptr,
                                  const RVec* p_hat_start = nullptr);

struct RoundRecord {
  int t = 0;
  double loss = 0.0;
  double gap = 0.0;
  RVec power;
  RVec avg_power;
  RVec queue;
  double phi = 0.0;
  double bias_bound = 0.0;
  double mse_bound = 0.0;
  double error_sq = 0.0;
  int alt_iters = 0;
  bool objective_monotone = true;
};

struct SimulationResult {
  SimulationConfig config;
  std::vector<RoundRecord> records;
  double initial_loss = 0.0;
  double optimal_loss = 0.0;
  double G = 0.0;
  PowerBudget budget;
  int lgr_dual_iters = 0;
  bool lgr_converged = true;

  double final_loss() const { return records.empty() ? initial_loss : records.back().loss; }
};

/// Full FL training loop under the configured strategy. Deterministic in the
/// master seed; channels, noise and data come from independent streams, so
/// runs that differ only in strategy see identical randomness.
SimulationResult run_simulation(const SimulationConfig& cfg);

/// First round t (1-based) from which every UE's running-average power stays
/// at or below P_ave (1 + slack) until the end; rounds + 1 if it never settles.
int power_convergence_round(const SimulationResult& result, double slack = 0.05);

/// Hard run invariants: box feasibility, queue nonnegativity, the telescoped
/// queue bound, running-average conservation and alternation descent.
/// Returns one message per violation.
std::vector<std::string> check_invariants(const SimulationResult& result);

struct SweepRow {
  double V = 0.0;
  double final_loss = 0.0;
  double final_gap = 0.0;
  int convergence_round = 0;
  double max_avg_power = 0.0;
};

SweepRow sweep_row(const SimulationResult& result);

/// One run per V with every seed shared, so V is the only difference.
std::vector<SweepRow> sweep_v(const SimulationConfig& cfg, const std::vector<double>& v_values);

}  // namespace otafl
