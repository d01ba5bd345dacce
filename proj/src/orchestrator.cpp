#include "otafl/orchestrator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "otafl/rng.hpp"

namespace otafl {

namespace {

BeamformingVector beamform(const RoundContext& ctx, const StrategyConfig& strategy,
                           const RVec& p_hat) {
  if (strategy.beamformer == BeamformerKind::mop) {
    return mop_beamformer(build_inputs(ctx.channels, p_hat), ctx.coeffs, ctx.noise.sigma2, ctx.q);
  }
  return mrc_beamformer(ctx.channels, ctx.gains, p_hat, ctx.coeffs, ctx.noise.sigma2, ctx.q);
}

double penalized(const RVec& p_hat, const RVec& lambda) {
  return (lambda.array() * p_hat.array().square()).sum();
}

}  // namespace

AlternationResult alternate_round(const RoundContext& ctx, const VirtualQueueState& queue,
                                  const StrategyConfig& strategy, const PowerBudget& budget,
                                  const RVec* lambda, const RVec* p_hat_start) {
  const auto& lyap = strategy.lyapunov;
  PowerAllocation current = p_hat_start ? PowerAllocation::from_amplitude(*p_hat_start)
                                        : PowerAllocation::from_power(budget.p_ave);
  RVec p_hat = current.amplitude();

  auto objective = [&](const RVec& amp, const BeamformingVector& bf, const CVec& H) {
    const double gamma = noise_penalty(bf, ctx.noise.sigma2, ctx.q);
    const double phi_full = phi_power_part(H, amp, ctx.coeffs) + ctx.coeffs.B * gamma;
    if (lambda) return phi_full + penalized(amp, *lambda);
    if (strategy.power == PowerKind::lofpc) {
      return drift_plus_penalty(amp, H, ctx.coeffs, lyap, queue, budget) +
             lyap.V * ctx.coeffs.B * gamma;
    }
    return phi_full;
  };

  AlternationResult out;
  BeamformingVector prev_bf;
  for (int i = 1; i <= strategy.alternation.max_iters; ++i) {
    // Step 1: beamformer for the current powers.
    BeamformingVector bf = beamform(ctx, strategy, p_hat);
    CVec H = effective_channels(ctx.channels, bf);
    if (i == 1) out.objective_trace.push_back(objective(p_hat, bf, H));

    // Step 2: powers for that beamformer.
    PowerAllocation next;
    if (lambda) {
      next = PowerAllocation::from_amplitude(
          lgr_inner_solve(H, *lambda, ctx.coeffs, budget, p_hat, lyap.max_sweeps, lyap.tol));
    } else {
      switch (strategy.power) {
        case PowerKind::lofpc:
          next = lofpc_round(H, queue, ctx.coeffs, lyap, budget, p_hat).power;
          break;
        case PowerKind::fixed: next = fixed_power(budget); break;
        case PowerKind::ci: next = ci_power(H, budget); break;
        case PowerKind::lgr:
          throw std::invalid_argument("alternate_round: Lgr needs dual multipliers");
      }
    }

    const double dp = (next.amplitude() - p_hat).cwiseAbs().maxCoeff();
    double dv = 0.0;
    if (i > 1) {
      const double scale = std::max(bf.v.norm(), std::numeric_limits<double>::min());
      dv = (bf.v - prev_bf.v).norm() / scale;
    }
    p_hat = next.amplitude();
    current = std::move(next);
    out.objective_trace.push_back(objective(p_hat, bf, H));
    out.phi_trace.push_back(phi(ctx.channels, bf, p_hat, ctx.coeffs, ctx.noise, ctx.q));
    out.iters = i;
    out.H = H;
    prev_bf = bf;
    out.bf = std::move(bf);

    // The next beamformer is a function of p_hat alone, so identical powers
    // mean the pair has stopped moving.
    const bool converged = dp < strategy.alternation.tol && (i > 1 ? dv < strategy.alternation.tol : dp == 0.0);
    if (converged) break;
  }
  // Ci and Fixed do not optimize against the beamformer, so the combiner is
  // refreshed once for the powers they settled on.
  if (!lambda && (strategy.power == PowerKind::ci || strategy.power == PowerKind::fixed)) {
    out.bf = beamform(ctx, strategy, p_hat);
    out.H = effective_channels(ctx.channels, out.bf);
    out.objective_trace.push_back(objective(p_hat, out.bf, out.H));
    out.phi_trace.push_back(phi(ctx.channels, out.bf, p_hat, ctx.coeffs, ctx.noise, ctx.q));
  }
  out.power = std::move(current);
  return out;
}

SimulationResult run_simulation(const SimulationConfig& cfg) {
  validate(cfg);
  const int K = cfg.num_ues;
  const int T = cfg.rounds;
  const auto seed = cfg.seed;

  SimulationResult result;
  result.config = cfg;

  const Topology topo = place_nodes(seed, cfg.area_side, K, cfg.num_aps, cfg.n_rx);
  const LargeScaleGains gains = large_scale_gains(topo, cfg.path_loss);
  const NoiseModel noise = NoiseModel::from_dbm(cfg.noise_dbm);

  std::vector<RidgeDataset> data;
  data.reserve(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) {
    data.push_back(generate_dataset(seed, cfg.samples_per_ue, cfg.task.q, k, cfg.label));
  }
  const OptimalSolution opt = optimal_loss(data, cfg.task.rho);
  result.optimal_loss = opt.loss;

  RVec w = RVec::Zero(cfg.task.q);
  result.initial_loss = global_loss(w, data, cfg.task.rho);

  auto local_models = [&](const RVec& global, int round) {
    std::vector<RVec> models;
    models.reserve(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) {
      auto rng = make_stream(seed, Stream::minibatch, static_cast<std::uint64_t>(round),
                             static_cast<std::uint64_t>(k));
      models.push_back(local_update(global, data[static_cast<std::size_t>(k)], cfg.task, &rng));
    }
    return models;
  };

  double G = cfg.gap_G;
  if (G <= 0.0) {
    // Largest norm among the first models the UEs will upload.
    double largest = 0.0;
    for (const auto& m : local_models(w, 1)) largest = std::max(largest, m.norm());
    G = largest > 0.0 ? cfg.gap_G_safety * largest : 1.0;
  }
  result.G = G;

  GapHyper hyper;
  hyper.G = G;
  hyper.S = cfg.gap_S;
  hyper.mu = cfg.gap_mu;
  hyper.omega = cfg.task.omega;
  hyper.eta = cfg.task.eta;
  hyper.T = T;
  hyper.N = cfg.gap_N;
  hyper.W = cfg.gap_W;
  hyper.A_override = cfg.gap_A;
  hyper.B_override = cfg.gap_B;
  hyper.C_override = cfg.gap_C;

  const PowerBudget budget = PowerBudget::uniform(K, cfg.p_ave, cfg.p_max);
  result.budget = budget;

  std::vector<GapCoefficients> coeffs;
  coeffs.reserve(static_cast<std::size_t>(T));
  for (int t = 1; t <= T; ++t) coeffs.push_back(gap_coefficients(hyper, t));

  // Offline baseline: the whole channel tape is drawn up front.
  std::optional<LgrResult> tape;
  if (cfg.strategy.power == PowerKind::lgr) {
    std::vector<ChannelRealization> channels;
    channels.reserve(static_cast<std::size_t>(T));
    for (int t = 1; t <= T; ++t) channels.push_back(sample_channel(topo, gains, t, seed));
    const auto idle_queue = VirtualQueueState::zeros(K);
    LgrRoundSolver solver = [&](int t, const RVec& lambda, const RVec& warm) {
      const auto ti = static_cast<std::size_t>(t);
      const RoundContext ctx{channels[ti], gains, coeffs[ti], noise, cfg.task.q};
      AlternationResult alt = alternate_round(ctx, idle_queue, cfg.strategy, budget, &lambda, &warm);
      LgrRoundDecision d;
      d.phi = phi(channels[ti], alt.bf, alt.power.amplitude(), coeffs[ti], noise, cfg.task.q);
      d.coupling = coeffs[ti].A + coeffs[ti].C;
      d.iters = alt.iters;
      d.H = std::move(alt.H);
      d.bf = std::move(alt.bf);
      d.power = std::move(alt.power);
      return d;
    };
    tape = lgr_power(T, solver, budget, cfg.strategy.dual);
    result.lgr_dual_iters = tape->dual_iters;
    result.lgr_converged = tape->converged;
  }

  VirtualQueueState queue = VirtualQueueState::zeros(K);
  RVec power_sum = RVec::Zero(K);
  result.records.reserve(static_cast<std::size_t>(T));

  for (int t = 1; t <= T; ++t) {
    const auto ti = static_cast<std::size_t>(t - 1);
    const ChannelRealization channels = sample_channel(topo, gains, t, seed);
    const GapCoefficients& c = coeffs[ti];
    const RoundContext ctx{channels, gains, c, noise, cfg.task.q};

    PowerAllocation power;
    BeamformingVector bf;
    RoundRecord rec;
    rec.t = t;
    if (tape) {
      const auto& d = tape->rounds[ti];
      power = d.power;
      bf = d.bf;
      rec.alt_iters = d.iters;
    } else {
      AlternationResult alt = alternate_round(ctx, queue, cfg.strategy, budget);
      rec.alt_iters = alt.iters;
      const auto& tr = alt.objective_trace;
      for (std::size_t i = 1; i < tr.size(); ++i) {
        if (tr[i] > tr[i - 1] + 1e-10 * std::max(1.0, std::abs(tr[i - 1]))) {
          rec.objective_monotone = false;
        }
      }
      // Ci has no descent guarantee; only the optimizing strategies are held to it.
      if (cfg.strategy.power == PowerKind::ci) rec.objective_monotone = true;
      power = std::move(alt.power);
      bf = std::move(alt.bf);
    }

    std::vector<RVec> models = local_models(w, t);
    auto noise_rng = make_stream(seed, Stream::noise, static_cast<std::uint64_t>(t));
    AggregationOutcome agg = aggregate(models, channels, bf, power.amplitude(), noise, noise_rng);
    if (cfg.perfect_channel) {
      w = agg.w_bar;
      rec.error_sq = 0.0;
    } else {
      w = agg.global_model();
      rec.error_sq = agg.epsilon.squaredNorm();
    }

    queue = update_queue(queue, power, budget);
    power_sum += power.power();

    const ErrorBounds bounds = error_bounds(agg.m, agg.gamma, G);
    rec.loss = global_loss(w, data, cfg.task.rho);
    rec.gap = rec.loss - opt.loss;
    rec.power = power.power();
    rec.avg_power = power_sum / static_cast<double>(t);
    rec.queue = queue.q;
    rec.phi = phi(Residuals{agg.m, agg.H}, agg.gamma, c);
    rec.bias_bound = bounds.bias;
    rec.mse_bound = bounds.mse;
    result.records.push_back(std::move(rec));
  }
  return result;
}

int power_convergence_round(const SimulationResult& result, double slack) {
  const auto& recs = result.records;
  const RVec limit = result.budget.p_ave * (1.0 + slack);
  int round = static_cast<int>(recs.size()) + 1;
  for (auto it = recs.rbegin(); it != recs.rend(); ++it) {
    if (((it->avg_power - limit).array() > 0.0).any()) break;
    round = it->t;
  }
  return round;
}

std::vector<std::string> check_invariants(const SimulationResult& result) {
  std::vector<std::string> issues;
  const auto& budget = result.budget;
  const Eigen::Index K = budget.p_ave.size();
  RVec sum = RVec::Zero(K);
  RVec telescoped = RVec::Zero(K);
  RVec prev_q = RVec::Zero(K);
  auto report = [&](int t, const std::string& what) {
    std::ostringstream os;
    os << "round " << t << ": " << what;
    issues.push_back(os.str());
  };
  for (const auto& r : result.records) {
    for (Eigen::Index k = 0; k < K; ++k) {
      if (r.power(k) < 0.0 || r.power(k) > budget.p_max(k)) {
        report(r.t, "power outside [0, P_max]");
      }
      if (r.queue(k) < 0.0) report(r.t, "negative virtual queue");
      const double expected_q = std::max(prev_q(k) + r.power(k) - budget.p_ave(k), 0.0);
      if (r.queue(k) != expected_q) report(r.t, "queue does not follow its recursion");
      // Same accumulation order as the queue, so q_k[t] >= sum_t (p - P_ave) exactly.
      telescoped(k) = telescoped(k) + r.power(k) - budget.p_ave(k);
      if (telescoped(k) / r.t > r.queue(k) / r.t) report(r.t, "telescoped queue bound violated");
    }
    sum += r.power;
    const RVec avg = sum / static_cast<double>(r.t);
    if (avg != r.avg_power) report(r.t, "running average is not the mean of recorded powers");
    if (!r.objective_monotone) report(r.t, "alternation objective increased");
    if (!std::isfinite(r.loss)) report(r.t, "non-finite loss");
    prev_q = r.queue;
  }
  return issues;
}

std::vector<SweepRow> sweep_v(const SimulationConfig& cfg, const std::vector<double>& v_values) {
  if (v_values.empty()) throw std::invalid_argument("sweep_v: no V values");
  std::vector<SweepRow> rows;
  for (double V : v_values) {
    SimulationConfig run = cfg;
    run.strategy.lyapunov.V = V;
    rows.push_back(sweep_row(run_simulation(run)));
  }
  return rows;
}

SweepRow sweep_row(const SimulationResult& res) {
  SweepRow row;
  row.V = res.config.strategy.lyapunov.V;
  row.final_loss = res.final_loss();
  row.final_gap = res.final_loss() - res.optimal_loss;
  row.convergence_round = power_convergence_round(res);
  row.max_avg_power = res.records.back().avg_power.maxCoeff();
  return row;
}

}  // namespace otafl
