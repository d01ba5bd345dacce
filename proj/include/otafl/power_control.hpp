#pragma once

#include <functional>
#include <vector>

#include "otafl/ota_link.hpp"

namespace otafl {

/// Per-UE energy debt q_k[t] = max(q_k[t-1] + p_k - P_k^ave, 0), q_k[0] = 0.
struct VirtualQueueState {
  RVec q;
  int round = 0;

  static VirtualQueueState zeros(int num_ues) { return {RVec::Zero(num_ues), 0}; }
};

struct LyapunovConfig {
  double V = 10.0;
  int max_sweeps = 100;
  double tol = 1e-8;
};

/// Largest amplitude whose square does not exceed p_max in floating point.
double amplitude_cap(double p_max);

/// Depressed cubic x^3 + a x + b = 0 with D = (b/2)^2 + (a/3)^3. When D <= 0
/// and a < 0 the three real roots are r cos((theta + 2 pi n) / 3) with
/// r = 2 sqrt(-a/3) and cos(theta) = -b / (2 (-a/3)^{3/2}).
struct CubicCoefficients {
  double a = 0.0;
  double b = 0.0;
  double D = 0.0;
  double r = 0.0;
  double theta = 0.0;

  static CubicCoefficients from(double a, double b);
};

/// All real roots (with multiplicity for the trigonometric case), each
/// refined by Newton steps that do not increase the residual.
std::vector<double> real_roots(const CubicCoefficients& c);

/// The per-user drift-plus-penalty objective up to a constant,
/// 0.5 x^4 + a x^2 + 2 b x, whose derivative is 2 (x^3 + a x + b).
double cubic_objective(const CubicCoefficients& c, double x);

VirtualQueueState update_queue(const VirtualQueueState& state, const PowerAllocation& p,
                               const PowerBudget& budget);

CubicCoefficients cubic_coefficients(int k, const RVec& p_hat, const CVec& H,
                                     const GapCoefficients& coeffs, const LyapunovConfig& cfg,
                                     const VirtualQueueState& queue, const PowerBudget& budget);

/// Minimizes the per-user objective over [0, sqrt(p_max)] by comparing the
/// clamped real roots with both endpoints.
double solve_power_cubic(const CubicCoefficients& c, double p_max);

/// xi[t] + V * (power-dependent part of phi[t]).
double drift_plus_penalty(const RVec& p_hat, const CVec& H, const GapCoefficients& coeffs,
                          const LyapunovConfig& cfg, const VirtualQueueState& queue,
                          const PowerBudget& budget);

struct LofpcResult {
  PowerAllocation power;
  int sweeps = 0;
  std::vector<double> objective_trace;  // initial value, then one entry per sweep
};

/// Gauss-Seidel over UEs in ascending order, one cubic solve per UE per sweep.
LofpcResult lofpc_round(const CVec& H, const VirtualQueueState& queue,
                        const GapCoefficients& coeffs, const LyapunovConfig& cfg,
                        const PowerBudget& budget, const RVec& p_hat_init);

PowerAllocation fixed_power(const PowerBudget& budget);

/// p_k = min((Re H_k / (K |H_k|^2))^2, P_max), zero for H_k = 0.
PowerAllocation ci_power(const CVec& H, const PowerBudget& budget);

/// Coordinate minimizer of phi + sum_k lambda_k p_hat_k^2 for fixed H, Gauss-Seidel.
RVec lgr_inner_solve(const CVec& H, const RVec& lambda, const GapCoefficients& coeffs,
                     const PowerBudget& budget, RVec p_hat, int max_sweeps = 100,
                     double tol = 1e-8);

struct DualConfig {
  int max_iters = 500;
  double step = 0.1;       // alpha_i = step / sqrt(i), scaled per UE
  double feas_tol = 1e-3;  // accepted excess of the time-average power
  double slack_tol = 3e-3; // complementary-slackness window for active UEs
};

/// What one round's inner solve produced for a given multiplier vector.
struct LgrRoundDecision {
  PowerAllocation power;
  BeamformingVector bf;
  CVec H;
  double coupling = 0.0;  // A_t + C_t
  double phi = 0.0;
  int iters = 0;
};

/// Solves round `t` (0-based) for multipliers `lambda`, warm-started at `p_hat_warm`.
using LgrRoundSolver =
    std::function<LgrRoundDecision(int t, const RVec& lambda, const RVec& p_hat_warm)>;

struct LgrResult {
  std::vector<LgrRoundDecision> rounds;
  RVec lambda;
  RVec average_power;
  int dual_iters = 0;
  bool converged = false;
  bool feasible = false;
};

/// Offline dual subgradient over the full horizon. Needs every round's channel
/// up front; returns the best feasible iterate seen.
LgrResult lgr_power(int T, const LgrRoundSolver& solve_round, const PowerBudget& budget,
                    const DualConfig& cfg);

}  // namespace otafl
