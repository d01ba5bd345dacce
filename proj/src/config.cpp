#include "otafl/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace otafl {

using nlohmann::json;

std::string_view to_string(BeamformerKind kind) {
  return kind == BeamformerKind::mop ? "mop" : "mrc";
}

std::string_view to_string(PowerKind kind) {
  switch (kind) {
    case PowerKind::lofpc: return "lofpc";
    case PowerKind::fixed: return "fixed";
    case PowerKind::ci: return "ci";
    case PowerKind::lgr: return "lgr";
  }
  return "unknown";
}

BeamformerKind parse_beamformer(std::string_view name) {
  if (name == "mop") return BeamformerKind::mop;
  if (name == "mrc") return BeamformerKind::mrc;
  throw std::invalid_argument("unknown beamformer '" + std::string(name) + "' (mop|mrc)");
}

PowerKind parse_power(std::string_view name) {
  if (name == "lofpc") return PowerKind::lofpc;
  if (name == "fixed") return PowerKind::fixed;
  if (name == "ci") return PowerKind::ci;
  if (name == "lgr") return PowerKind::lgr;
  throw std::invalid_argument("unknown power strategy '" + std::string(name) +
                              "' (lofpc|fixed|ci|lgr)");
}

std::string strategy_label(BeamformerKind bf, PowerKind power) {
  std::string out = bf == BeamformerKind::mop ? "MOP-" : "MRC-";
  switch (power) {
    case PowerKind::lofpc: out += "LOFPC"; break;
    case PowerKind::fixed: out += "Fixed"; break;
    case PowerKind::ci: out += "Ci"; break;
    case PowerKind::lgr: out += "Lgr"; break;
  }
  return out;
}

namespace {

struct Field {
  std::string key;
  std::function<json(const SimulationConfig&)> get;
  std::function<void(SimulationConfig&, const json&)> set;
};

[[noreturn]] void type_error(const std::string& key, const char* expected, const json& value) {
  throw std::invalid_argument("config key '" + key + "': expected " + expected + ", got " +
                              value.dump());
}

template <typename Proj>
Field int_field(std::string key, Proj proj) {
  return {key, [proj](const SimulationConfig& c) { return json(proj(c)); },
          [proj, key](SimulationConfig& c, const json& v) {
            if (!v.is_number_integer()) type_error(key, "an integer", v);
            proj(c) = v.get<int>();
          }};
}

template <typename Proj>
Field double_field(std::string key, Proj proj) {
  return {key, [proj](const SimulationConfig& c) { return json(proj(c)); },
          [proj, key](SimulationConfig& c, const json& v) {
            if (!v.is_number()) type_error(key, "a number", v);
            proj(c) = v.get<double>();
          }};
}

template <typename Proj>
Field optional_double_field(std::string key, Proj proj) {
  return {key,
          [proj](const SimulationConfig& c) {
            const auto& o = proj(c);
            return o ? json(*o) : json(nullptr);
          },
          [proj, key](SimulationConfig& c, const json& v) {
            if (v.is_null()) {
              proj(c).reset();
            } else if (v.is_number()) {
              proj(c) = v.get<double>();
            } else {
              type_error(key, "a number or null", v);
            }
          }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    using C = SimulationConfig;
    f.push_back(int_field("topology.num_ues", [](auto& c) -> auto& { return c.num_ues; }));
    f.push_back(int_field("topology.num_aps", [](auto& c) -> auto& { return c.num_aps; }));
    f.push_back(int_field("topology.n_rx", [](auto& c) -> auto& { return c.n_rx; }));
    f.push_back(double_field("topology.area_side", [](auto& c) -> auto& { return c.area_side; }));
    f.push_back(double_field("channel.carrier_hz", [](auto& c) -> auto& { return c.path_loss.carrier_hz; }));
    f.push_back(double_field("channel.d0", [](auto& c) -> auto& { return c.path_loss.d0; }));
    f.push_back(double_field("channel.exponent", [](auto& c) -> auto& { return c.path_loss.exponent; }));
    f.push_back(double_field("channel.noise_dbm", [](auto& c) -> auto& { return c.noise_dbm; }));
    f.push_back(int_field("task.q", [](auto& c) -> auto& { return c.task.q; }));
    f.push_back(double_field("task.rho", [](auto& c) -> auto& { return c.task.rho; }));
    f.push_back(int_field("task.samples_per_ue", [](auto& c) -> auto& { return c.samples_per_ue; }));
    f.push_back(double_field("task.eta", [](auto& c) -> auto& { return c.task.eta; }));
    f.push_back(int_field("task.omega", [](auto& c) -> auto& { return c.task.omega; }));
    f.push_back(int_field("task.batch_size", [](auto& c) -> auto& { return c.task.batch_size; }));
    f.push_back(double_field("task.label_coef_2", [](auto& c) -> auto& { return c.label.coef_2; }));
    f.push_back(double_field("task.label_coef_5", [](auto& c) -> auto& { return c.label.coef_5; }));
    f.push_back(double_field("task.label_noise", [](auto& c) -> auto& { return c.label.noise_scale; }));
    f.push_back(double_field("budget.p_ave", [](auto& c) -> auto& { return c.p_ave; }));
    f.push_back(double_field("budget.p_max", [](auto& c) -> auto& { return c.p_max; }));
    f.push_back(double_field("gap.G", [](auto& c) -> auto& { return c.gap_G; }));
    f.push_back(double_field("gap.G_safety", [](auto& c) -> auto& { return c.gap_G_safety; }));
    f.push_back(double_field("gap.S", [](auto& c) -> auto& { return c.gap_S; }));
    f.push_back(double_field("gap.mu", [](auto& c) -> auto& { return c.gap_mu; }));
    f.push_back(double_field("gap.N", [](auto& c) -> auto& { return c.gap_N; }));
    f.push_back(double_field("gap.W", [](auto& c) -> auto& { return c.gap_W; }));
    f.push_back(optional_double_field("gap.A", [](auto& c) -> auto& { return c.gap_A; }));
    f.push_back(optional_double_field("gap.B", [](auto& c) -> auto& { return c.gap_B; }));
    f.push_back(optional_double_field("gap.C", [](auto& c) -> auto& { return c.gap_C; }));
    f.push_back({"strategy.beamformer",
                 [](const C& c) { return json(std::string(to_string(c.strategy.beamformer))); },
                 [](C& c, const json& v) {
                   if (!v.is_string()) type_error("strategy.beamformer", "a string", v);
                   c.strategy.beamformer = parse_beamformer(v.get<std::string>());
                 }});
    f.push_back({"strategy.power",
                 [](const C& c) { return json(std::string(to_string(c.strategy.power))); },
                 [](C& c, const json& v) {
                   if (!v.is_string()) type_error("strategy.power", "a string", v);
                   c.strategy.power = parse_power(v.get<std::string>());
                 }});
    f.push_back(double_field("lyapunov.V", [](auto& c) -> auto& { return c.strategy.lyapunov.V; }));
    f.push_back(int_field("lyapunov.max_sweeps", [](auto& c) -> auto& { return c.strategy.lyapunov.max_sweeps; }));
    f.push_back(double_field("lyapunov.tol", [](auto& c) -> auto& { return c.strategy.lyapunov.tol; }));
    f.push_back(int_field("alternation.max_iters", [](auto& c) -> auto& { return c.strategy.alternation.max_iters; }));
    f.push_back(double_field("alternation.tol", [](auto& c) -> auto& { return c.strategy.alternation.tol; }));
    f.push_back(int_field("dual.max_iters", [](auto& c) -> auto& { return c.strategy.dual.max_iters; }));
    f.push_back(double_field("dual.step", [](auto& c) -> auto& { return c.strategy.dual.step; }));
    f.push_back(double_field("dual.feas_tol", [](auto& c) -> auto& { return c.strategy.dual.feas_tol; }));
    f.push_back(double_field("dual.slack_tol", [](auto& c) -> auto& { return c.strategy.dual.slack_tol; }));
    f.push_back(int_field("run.rounds", [](auto& c) -> auto& { return c.rounds; }));
    f.push_back({"run.seed", [](const C& c) { return json(c.seed); },
                 [](C& c, const json& v) {
                   if (!v.is_number_unsigned()) type_error("run.seed", "a non-negative integer", v);
                   c.seed = v.get<std::uint64_t>();
                 }});
    f.push_back({"run.perfect_channel", [](const C& c) { return json(c.perfect_channel); },
                 [](C& c, const json& v) {
                   if (!v.is_boolean()) type_error("run.perfect_channel", "a boolean", v);
                   c.perfect_channel = v.get<bool>();
                 }});
    f.push_back({"sweep.v_values", [](const C& c) { return json(c.sweep_v); },
                 [](C& c, const json& v) {
                   if (!v.is_array()) type_error("sweep.v_values", "a list of numbers", v);
                   std::vector<double> out;
                   for (const auto& e : v) {
                     if (!e.is_number()) type_error("sweep.v_values", "a list of numbers", v);
                     out.push_back(e.get<double>());
                   }
                   c.sweep_v = std::move(out);
                 }});
    f.push_back({"output.dir", [](const C& c) { return json(c.out_dir); },
                 [](C& c, const json& v) {
                   if (!v.is_string()) type_error("output.dir", "a string", v);
                   c.out_dir = v.get<std::string>();
                 }});
    return f;
  }();
  return table;
}

const Field& find_field(std::string_view key) {
  for (const auto& f : fields()) {
    if (f.key == key) return f;
  }
  throw std::invalid_argument("unknown config key '" + std::string(key) + "'");
}

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("invalid config: " + what);
}

}  // namespace

void validate(const SimulationConfig& c) {
  require(c.num_ues >= 1, "topology.num_ues must be >= 1");
  require(c.num_aps >= 1, "topology.num_aps must be >= 1");
  require(c.n_rx >= 1, "topology.n_rx must be >= 1");
  require(c.area_side > 0.0, "topology.area_side must be > 0");
  require(c.path_loss.carrier_hz > 0.0, "channel.carrier_hz must be > 0");
  require(c.path_loss.d0 > 0.0, "channel.d0 must be > 0");
  require(c.path_loss.exponent >= 0.0, "channel.exponent must be >= 0");
  require(std::isfinite(c.noise_dbm), "channel.noise_dbm must be finite");
  require(c.task.q >= 5, "task.q must be >= 5 (the label rule reads x(2) and x(5))");
  require(c.task.rho >= 0.0, "task.rho must be >= 0");
  require(c.samples_per_ue >= 1, "task.samples_per_ue must be >= 1");
  require(c.task.eta > 0.0, "task.eta must be > 0");
  require(c.task.omega >= 1, "task.omega must be >= 1");
  require(c.task.batch_size >= 0, "task.batch_size must be >= 0");
  require(c.p_ave > 0.0, "budget.p_ave must be > 0");
  require(c.p_ave <= c.p_max, "budget.p_ave must not exceed budget.p_max");
  require(c.gap_G >= 0.0, "gap.G must be >= 0 (0 = automatic)");
  require(c.gap_G_safety > 0.0, "gap.G_safety must be > 0");
  require(c.gap_S > 0.0, "gap.S must be > 0");
  require(c.gap_mu >= 0.0, "gap.mu must be >= 0");
  require(!c.gap_A || *c.gap_A >= 0.0, "gap.A must be >= 0");
  require(!c.gap_B || *c.gap_B > 0.0, "gap.B must be > 0");
  require(!c.gap_C || *c.gap_C >= 0.0, "gap.C must be >= 0");
  require(c.strategy.lyapunov.V > 0.0, "lyapunov.V must be > 0");
  require(c.strategy.lyapunov.max_sweeps >= 1, "lyapunov.max_sweeps must be >= 1");
  require(c.strategy.lyapunov.tol > 0.0, "lyapunov.tol must be > 0");
  require(c.strategy.alternation.max_iters >= 1, "alternation.max_iters must be >= 1");
  require(c.strategy.alternation.tol > 0.0, "alternation.tol must be > 0");
  require(c.strategy.dual.max_iters >= 1, "dual.max_iters must be >= 1");
  require(c.strategy.dual.step > 0.0, "dual.step must be > 0");
  require(c.strategy.dual.feas_tol >= 0.0, "dual.feas_tol must be >= 0");
  require(c.strategy.dual.slack_tol >= 0.0, "dual.slack_tol must be >= 0");
  require(c.rounds >= 1, "run.rounds must be >= 1");
  require(!c.sweep_v.empty(), "sweep.v_values must not be empty");
  for (double v : c.sweep_v) require(v > 0.0, "sweep.v_values entries must be > 0");
  require(!c.out_dir.empty(), "output.dir must not be empty");
}

json to_json(const SimulationConfig& cfg) {
  json out = json::object();
  for (const auto& f : fields()) out[f.key] = f.get(cfg);
  return out;
}

void apply_json(SimulationConfig& cfg, const json& flat) {
  if (!flat.is_object()) throw std::invalid_argument("config must be a JSON object");
  for (const auto& [key, value] : flat.items()) find_field(key).set(cfg, value);
}

void apply_override(SimulationConfig& cfg, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw std::invalid_argument("override must look like key=value, got '" +
                                std::string(assignment) + "'");
  }
  const std::string key(assignment.substr(0, eq));
  const std::string text(assignment.substr(eq + 1));
  json value = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (value.is_discarded()) value = text;
  find_field(key).set(cfg, value);
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& f : fields()) keys.push_back(f.key);
  return keys;
}

SimulationConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file '" + path + "'");
  json flat = json::parse(in, nullptr, /*allow_exceptions=*/false, /*ignore_comments=*/true);
  if (flat.is_discarded()) throw std::invalid_argument("config file '" + path + "' is not valid JSON");
  SimulationConfig cfg;
  apply_json(cfg, flat);
  return cfg;
}

SimulationConfig parse_config(const ConfigSources& sources) {
  SimulationConfig cfg = sources.file ? load_config_file(*sources.file) : SimulationConfig{};
  if (sources.env_out_dir && !sources.env_out_dir->empty()) cfg.out_dir = *sources.env_out_dir;
  for (const auto& o : sources.overrides) apply_override(cfg, o);
  validate(cfg);
  return cfg;
}

}  // namespace otafl
