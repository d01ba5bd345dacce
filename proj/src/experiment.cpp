#include "otafl/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "otafl/csv.hpp"

namespace otafl {

using nlohmann::json;

Preset parse_preset(std::string_view name) {
  if (name == "fig1") return Preset::fig1;
  if (name == "fig2") return Preset::fig2;
  if (name == "fig3") return Preset::fig3;
  if (name == "single") return Preset::single;
  throw std::invalid_argument("unknown preset '" + std::string(name) + "' (fig1|fig2|fig3|single)");
}

std::string_view to_string(Preset preset) {
  switch (preset) {
    case Preset::fig1: return "fig1";
    case Preset::fig2: return "fig2";
    case Preset::fig3: return "fig3";
    case Preset::single: return "single";
  }
  return "unknown";
}

std::vector<StrategyConfig> fig1_strategies(const StrategyConfig& base) {
  std::vector<StrategyConfig> out;
  for (PowerKind p : {PowerKind::lofpc, PowerKind::lgr, PowerKind::ci, PowerKind::fixed}) {
    StrategyConfig s = base;
    s.beamformer = BeamformerKind::mop;
    s.power = p;
    out.push_back(s);
  }
  return out;
}

std::vector<StrategyConfig> fig2_strategies(const StrategyConfig& base) {
  std::vector<StrategyConfig> out;
  for (BeamformerKind bf : {BeamformerKind::mop, BeamformerKind::mrc}) {
    for (PowerKind p : {PowerKind::lofpc, PowerKind::lgr, PowerKind::ci, PowerKind::fixed}) {
      StrategyConfig s = base;
      s.beamformer = bf;
      s.power = p;
      out.push_back(s);
    }
  }
  return out;
}

namespace {

std::string label(const SimulationResult& r) {
  return strategy_label(r.config.strategy.beamformer, r.config.strategy.power);
}

}  // namespace

void write_avg_power_csv(std::ostream& out, const std::vector<SimulationResult>& runs) {
  out << "round,strategy,ue,avg_power\n";
  for (const auto& run : runs) {
    const std::string name = label(run);
    for (const auto& rec : run.records) {
      for (Eigen::Index k = 0; k < rec.avg_power.size(); ++k) {
        out << rec.t << ',' << name << ',' << k << ',' << format_double(rec.avg_power(k)) << '\n';
      }
    }
  }
}

void write_loss_csv(std::ostream& out, const std::vector<SimulationResult>& runs) {
  out << "round,strategy,loss,gap\n";
  for (const auto& run : runs) {
    const std::string name = label(run);
    for (const auto& rec : run.records) {
      out << rec.t << ',' << name << ',' << format_double(rec.loss) << ','
          << format_double(rec.gap) << '\n';
    }
  }
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "V,final_loss,final_gap,convergence_round,max_avg_power\n";
  for (const auto& r : rows) {
    out << format_double(r.V) << ',' << format_double(r.final_loss) << ','
        << format_double(r.final_gap) << ',' << r.convergence_round << ','
        << format_double(r.max_avg_power) << '\n';
  }
}

void write_rounds_csv(std::ostream& out, const SimulationResult& run) {
  out << "round,ue,loss,gap,power,avg_power,queue,phi,bias_bound,mse_bound,error_sq,alt_iters\n";
  for (const auto& rec : run.records) {
    for (Eigen::Index k = 0; k < rec.power.size(); ++k) {
      out << rec.t << ',' << k << ',' << format_double(rec.loss) << ',' << format_double(rec.gap)
          << ',' << format_double(rec.power(k)) << ',' << format_double(rec.avg_power(k)) << ','
          << format_double(rec.queue(k)) << ',' << format_double(rec.phi) << ','
          << format_double(rec.bias_bound) << ',' << format_double(rec.mse_bound) << ','
          << format_double(rec.error_sq) << ',' << rec.alt_iters << '\n';
    }
  }
}

json run_summary(const SimulationResult& run) {
  json j;
  j["strategy"] = label(run);
  j["seed"] = run.config.seed;
  j["rounds"] = run.records.size();
  j["initial_loss"] = run.initial_loss;
  j["final_loss"] = run.final_loss();
  j["optimal_loss"] = run.optimal_loss;
  j["final_gap"] = run.final_loss() - run.optimal_loss;
  j["G"] = run.G;
  j["convergence_round"] = power_convergence_round(run);
  if (!run.records.empty()) {
    const RVec& avg = run.records.back().avg_power;
    j["final_avg_power"] = std::vector<double>(avg.data(), avg.data() + avg.size());
  }
  if (run.config.strategy.power == PowerKind::lgr) {
    j["lgr_dual_iters"] = run.lgr_dual_iters;
    j["lgr_converged"] = run.lgr_converged;
  }
  j["invariant_violations"] = check_invariants(run);
  j["config"] = to_json(run.config);
  return j;
}

std::vector<SimulationResult> run_all(const std::vector<SimulationConfig>& configs, int jobs) {
  std::vector<SimulationResult> results(configs.size());
  std::vector<std::exception_ptr> errors(configs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      try {
        results[i] = run_simulation(configs[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int n = std::clamp(jobs, 1, std::max(1, static_cast<int>(configs.size())));
  std::vector<std::thread> pool;
  for (int i = 1; i < n; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

namespace {

bool write_file(const std::filesystem::path& path, const std::string& contents, std::ostream& log) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    log << "error: cannot open " << path.string() << " for writing\n";
    return false;
  }
  out << contents;
  out.flush();
  if (!out) {
    log << "error: failed writing " << path.string() << '\n';
    return false;
  }
  log << "wrote " << path.string() << '\n';
  return true;
}

int report_invariants(const std::vector<SimulationResult>& runs, std::ostream& log) {
  int status = 0;
  for (const auto& run : runs) {
    for (const auto& issue : check_invariants(run)) {
      log << "invariant violated [" << label(run) << "]: " << issue << '\n';
      status = 1;
    }
  }
  return status;
}

}  // namespace

int run_experiment(Preset preset, const SimulationConfig& cfg, const std::filesystem::path& out_dir,
                   std::ostream& log, int jobs) {
  validate(cfg);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    log << "error: cannot create " << out_dir.string() << ": " << ec.message() << '\n';
    return 2;
  }

  std::ostringstream body;
  switch (preset) {
    case Preset::fig1:
    case Preset::fig2: {
      const auto strategies =
          preset == Preset::fig1 ? fig1_strategies(cfg.strategy) : fig2_strategies(cfg.strategy);
      std::vector<SimulationConfig> configs;
      for (const auto& s : strategies) {
        SimulationConfig c = cfg;
        c.strategy = s;
        configs.push_back(c);
      }
      const auto runs = run_all(configs, jobs);
      json meta;
      meta["preset"] = to_string(preset);
      meta["seed"] = cfg.seed;
      meta["config"] = to_json(cfg);
      for (const auto& r : runs) meta["runs"].push_back(run_summary(r));
      if (preset == Preset::fig1) {
        write_avg_power_csv(body, runs);
        if (!write_file(out_dir / "fig1_avg_power.csv", body.str(), log)) return 2;
        if (!write_file(out_dir / "fig1_meta.json", meta.dump(2) + "\n", log)) return 2;
      } else {
        write_loss_csv(body, runs);
        if (!write_file(out_dir / "fig2_loss.csv", body.str(), log)) return 2;
        if (!write_file(out_dir / "fig2_meta.json", meta.dump(2) + "\n", log)) return 2;
      }
      return report_invariants(runs, log);
    }
    case Preset::fig3: {
      std::vector<SimulationConfig> configs;
      for (double V : cfg.sweep_v) {
        SimulationConfig c = cfg;
        c.strategy.lyapunov.V = V;
        configs.push_back(c);
      }
      const auto runs = run_all(configs, jobs);
      std::vector<SweepRow> rows;
      for (const auto& r : runs) rows.push_back(sweep_row(r));
      write_sweep_csv(body, rows);
      json meta;
      meta["preset"] = "fig3";
      meta["seed"] = cfg.seed;
      meta["shared_seeds"] = {{"placement", cfg.seed}, {"fading", cfg.seed},
                              {"noise", cfg.seed},     {"data", cfg.seed}};
      meta["v_values"] = cfg.sweep_v;
      meta["config"] = to_json(cfg);
      if (!write_file(out_dir / "fig3_v_sweep.csv", body.str(), log)) return 2;
      if (!write_file(out_dir / "fig3_meta.json", meta.dump(2) + "\n", log)) return 2;
      return report_invariants(runs, log);
    }
    case Preset::single: {
      const auto runs = run_all({cfg}, 1);
      write_rounds_csv(body, runs.front());
      if (!write_file(out_dir / "rounds.csv", body.str(), log)) return 2;
      if (!write_file(out_dir / "summary.json", run_summary(runs.front()).dump(2) + "\n", log)) {
        return 2;
      }
      return report_invariants(runs, log);
    }
  }
  return 2;
}

}  // namespace otafl
