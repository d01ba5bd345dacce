#include "otafl/power_control.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace otafl {

namespace {

double cubic_value(double a, double b, double x) { return (x * x + a) * x + b; }

double polish(double a, double b, double x) {
  for (int i = 0; i < 3; ++i) {
    const double f = cubic_value(a, b, x);
    const double df = 3.0 * x * x + a;
    if (f == 0.0 || df == 0.0) break;
    const double next = x - f / df;
    if (!(std::abs(cubic_value(a, b, next)) < std::abs(f))) break;
    x = next;
  }
  return x;
}

}  // namespace

double amplitude_cap(double p_max) {
  double x = std::sqrt(p_max);
  while (x > 0.0 && x * x > p_max) x = std::nextafter(x, 0.0);
  return x;
}

CubicCoefficients CubicCoefficients::from(double a, double b) {
  CubicCoefficients c;
  c.a = a;
  c.b = b;
  c.D = (b / 2.0) * (b / 2.0) + (a / 3.0) * (a / 3.0) * (a / 3.0);
  if (a < 0.0) {
    const double m = std::sqrt(-a / 3.0);
    c.r = 2.0 * m;
    c.theta = std::acos(std::clamp(-b / (2.0 * m * m * m), -1.0, 1.0));
  }
  return c;
}

std::vector<double> real_roots(const CubicCoefficients& c) {
  if (c.a < 0.0 && c.D <= 0.0) {
    std::vector<double> roots(3);
    for (int n = 0; n < 3; ++n) {
      const double x = c.r * std::cos((c.theta + 2.0 * std::numbers::pi * n) / 3.0);
      roots[static_cast<std::size_t>(n)] = polish(c.a, c.b, x);
    }
    return roots;
  }
  // Cardano with the larger-magnitude cube root taken first so the two terms
  // never cancel; the second follows from u v = -a/3.
  const double s = std::sqrt(std::max(c.D, 0.0));
  const double u3 = -c.b / 2.0 - std::copysign(s, c.b);
  const double u = std::cbrt(u3);
  const double x = (u == 0.0) ? 0.0 : u - c.a / (3.0 * u);
  return {polish(c.a, c.b, x)};
}

double cubic_objective(const CubicCoefficients& c, double x) {
  const double x2 = x * x;
  return 0.5 * x2 * x2 + c.a * x2 + 2.0 * c.b * x;
}

VirtualQueueState update_queue(const VirtualQueueState& state, const PowerAllocation& p,
                               const PowerBudget& budget) {
  if (p.size() != state.q.size() || budget.p_ave.size() != state.q.size()) {
    throw std::invalid_argument("update_queue: size mismatch");
  }
  VirtualQueueState next{state.q, state.round + 1};
  for (Eigen::Index k = 0; k < state.q.size(); ++k) {
    next.q(k) = std::max(state.q(k) + p.power()(k) - budget.p_ave(k), 0.0);
  }
  return next;
}

CubicCoefficients cubic_coefficients(int k, const RVec& p_hat, const CVec& H,
                                     const GapCoefficients& coeffs, const LyapunovConfig& cfg,
                                     const VirtualQueueState& queue, const PowerBudget& budget) {
  const int K = static_cast<int>(H.size());
  cplx others = 0.0;
  for (int i = 0; i < K; ++i) {
    if (i != k) others += p_hat(i) * std::conj(H(i));
  }
  const cplx Hk = H(k);
  const double a = queue.q(k) - budget.p_ave(k) + cfg.V * (coeffs.A + coeffs.C) * std::norm(Hk);
  const double b = cfg.V * (coeffs.A * (Hk * others).real() -
                            (coeffs.C / static_cast<double>(K) + coeffs.A) * Hk.real());
  return CubicCoefficients::from(a, b);
}

double solve_power_cubic(const CubicCoefficients& c, double p_max) {
  const double hi = amplitude_cap(p_max);
  double best_x = 0.0;
  double best_f = cubic_objective(c, 0.0);
  auto consider = [&](double x) {
    x = std::clamp(x, 0.0, hi);
    const double f = cubic_objective(c, x);
    if (f < best_f) {
      best_f = f;
      best_x = x;
    }
  };
  consider(hi);
  for (double root : real_roots(c)) consider(root);
  return best_x;
}

double drift_plus_penalty(const RVec& p_hat, const CVec& H, const GapCoefficients& coeffs,
                          const LyapunovConfig& cfg, const VirtualQueueState& queue,
                          const PowerBudget& budget) {
  double xi = 0.0;
  for (Eigen::Index k = 0; k < p_hat.size(); ++k) {
    const double excess = p_hat(k) * p_hat(k) - budget.p_ave(k);
    xi += 0.5 * excess * excess + queue.q(k) * excess;
  }
  return xi + cfg.V * phi_power_part(H, p_hat, coeffs);
}

LofpcResult lofpc_round(const CVec& H, const VirtualQueueState& queue,
                        const GapCoefficients& coeffs, const LyapunovConfig& cfg,
                        const PowerBudget& budget, const RVec& p_hat_init) {
  const int K = static_cast<int>(H.size());
  if (p_hat_init.size() != K || queue.q.size() != K) {
    throw std::invalid_argument("lofpc_round: size mismatch");
  }
  RVec p_hat = p_hat_init;
  for (int k = 0; k < K; ++k) {
    if (p_hat(k) < 0.0 || p_hat(k) * p_hat(k) > budget.p_max(k) * (1.0 + 1e-12)) {
      throw std::invalid_argument("lofpc_round: initial amplitudes are infeasible");
    }
  }
  LofpcResult out;
  out.objective_trace.push_back(drift_plus_penalty(p_hat, H, coeffs, cfg, queue, budget));
  for (int sweep = 1; sweep <= cfg.max_sweeps; ++sweep) {
    double change = 0.0;
    for (int k = 0; k < K; ++k) {
      const auto c = cubic_coefficients(k, p_hat, H, coeffs, cfg, queue, budget);
      const double next = solve_power_cubic(c, budget.p_max(k));
      change = std::max(change, std::abs(next - p_hat(k)));
      p_hat(k) = next;
    }
    out.sweeps = sweep;
    out.objective_trace.push_back(drift_plus_penalty(p_hat, H, coeffs, cfg, queue, budget));
    if (change < cfg.tol || K == 1) break;
  }
  out.power = PowerAllocation::from_amplitude(std::move(p_hat));
  return out;
}

PowerAllocation fixed_power(const PowerBudget& budget) {
  return PowerAllocation::from_power(budget.p_ave);
}

PowerAllocation ci_power(const CVec& H, const PowerBudget& budget) {
  const Eigen::Index K = H.size();
  RVec p = RVec::Zero(K);  // amplitudes
  for (Eigen::Index k = 0; k < K; ++k) {
    const double g = std::norm(H(k));
    if (g == 0.0) continue;
    const double amp = std::abs(H(k).real()) / (static_cast<double>(K) * g);
    p(k) = std::min(amp, amplitude_cap(budget.p_max(k)));
  }
  return PowerAllocation::from_amplitude(std::move(p));
}

RVec lgr_inner_solve(const CVec& H, const RVec& lambda, const GapCoefficients& coeffs,
                     const PowerBudget& budget, RVec p_hat, int max_sweeps, double tol) {
  const int K = static_cast<int>(H.size());
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double change = 0.0;
    for (int k = 0; k < K; ++k) {
      cplx others = 0.0;
      for (int i = 0; i < K; ++i) {
        if (i != k) others += p_hat(i) * std::conj(H(i));
      }
      const double num = (coeffs.A + coeffs.C / K) * H(k).real() -
                         coeffs.A * (H(k) * others).real();
      const double den = lambda(k) + (coeffs.A + coeffs.C) * std::norm(H(k));
      double next = 0.0;
      if (den > 0.0) next = std::clamp(num / den, 0.0, amplitude_cap(budget.p_max(k)));
      change = std::max(change, std::abs(next - p_hat(k)));
      p_hat(k) = next;
    }
    if (change < tol) break;
  }
  return p_hat;
}

LgrResult lgr_power(int T, const LgrRoundSolver& solve_round, const PowerBudget& budget,
                    const DualConfig& cfg) {
  if (T < 1) throw std::invalid_argument("lgr_power: need at least one round");
  const Eigen::Index K = budget.p_ave.size();
  RVec lambda = RVec::Zero(K);
  RVec scale = RVec::Ones(K);
  std::vector<RVec> warm(static_cast<std::size_t>(T), budget.p_ave.array().sqrt().matrix());

  LgrResult best;
  double best_phi = std::numeric_limits<double>::infinity();
  LgrResult last;

  for (int iter = 1; iter <= cfg.max_iters; ++iter) {
    std::vector<LgrRoundDecision> rounds;
    rounds.reserve(static_cast<std::size_t>(T));
    RVec avg = RVec::Zero(K);
    double total_phi = 0.0;
    for (int t = 0; t < T; ++t) {
      rounds.push_back(solve_round(t, lambda, warm[static_cast<std::size_t>(t)]));
      const auto& d = rounds.back();
      warm[static_cast<std::size_t>(t)] = d.power.amplitude();
      avg += d.power.power();
      total_phi += d.phi;
    }
    avg /= static_cast<double>(T);

    if (iter == 1) {
      // Multipliers compete with (A + C) |H_k|^2 in the coordinate update, so
      // the unconstrained first pass sets a per-UE step scale.
      for (Eigen::Index k = 0; k < K; ++k) {
        double s = 0.0;
        for (const auto& d : rounds) s += d.coupling * std::norm(d.H(k));
        s /= static_cast<double>(T);
        scale(k) = s > 0.0 ? s : 1.0;
      }
    }

    const bool feasible = ((avg - budget.p_ave).array() <= cfg.feas_tol).all();
    bool slack_ok = true;
    for (Eigen::Index k = 0; k < K; ++k) {
      if (lambda(k) > 0.0 && avg(k) < budget.p_ave(k) - cfg.slack_tol) slack_ok = false;
    }

    last.rounds = rounds;
    last.lambda = lambda;
    last.average_power = avg;
    last.dual_iters = iter;
    last.feasible = feasible;

    if (feasible && total_phi < best_phi) {
      best_phi = total_phi;
      best = last;
    }
    if (feasible && slack_ok) {
      best.converged = true;
      best.dual_iters = iter;
      return best;
    }

    const double alpha = cfg.step / std::sqrt(static_cast<double>(iter));
    for (Eigen::Index k = 0; k < K; ++k) {
      const double violation = (avg(k) - budget.p_ave(k)) / budget.p_ave(k);
      lambda(k) = std::max(0.0, lambda(k) + alpha * scale(k) * violation);
    }
  }

  if (std::isfinite(best_phi)) {
    std::cerr << "warning: lgr_power: dual iteration did not converge, returning best feasible iterate\n";
    best.dual_iters = cfg.max_iters;
    return best;
  }
  std::cerr << "warning: lgr_power: no feasible iterate found, returning last iterate\n";
  return last;
}

}  // namespace otafl
