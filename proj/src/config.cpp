#include "qsync/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace qsync {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::string& where,
                    const std::set<std::string>& allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key()))
      throw ConfigError("unknown key '" + where + it.key() + "'");
  }
}

template <typename T>
void read(const json& obj, const char* key, T& target) {
  if (!obj.contains(key)) return;
  try {
    target = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

}  // namespace

CoupledModel RunConfig::make_model() const {
  if (model_kind == "linear4d") return CoupledModel::linear4d(eta, omega, tau, kappa, diffusion);
  if (model_kind == "ring") return CoupledModel::ring(omega, tau, kappa, diffusion);
  if (model_kind == "ring_cos") return CoupledModel::ring_cos(omega, tau, kappa, diffusion);
  if (model_kind == "discrete9") return CoupledModel::discrete9(omega, tau, kappa);
  throw ConfigError("unknown model kind '" + model_kind +
                    "' (expected linear4d | ring | ring_cos | discrete9)");
}

static std::vector<double> linspace(double lo, double hi, int n) {
  if (n < 1) throw ConfigError("grid count must be >= 1");
  std::vector<double> g(n);
  if (n == 1) {
    g[0] = lo;
    return g;
  }
  for (int i = 0; i < n; ++i) g[i] = lo + (hi - lo) * i / (n - 1);
  return g;
}

std::vector<double> RunConfig::tau_grid() const { return linspace(tau_min, tau_max, tau_count); }
std::vector<double> RunConfig::kappa_grid() const {
  return linspace(kappa_min, kappa_max, kappa_count);
}

std::string RunConfig::echo() const {
  json j;
  j["model"] = {{"kind", model_kind}, {"omega", omega}, {"tau", tau},
                {"kappa", kappa},     {"eta", eta},     {"diffusion", diffusion}};
  j["solver"] = {{"J", J},
                 {"M", M},
                 {"N", N},
                 {"coalescence_tol", coalescence_tol},
                 {"check_convergence", check_convergence}};
  j["simulation"] = {{"dt", dt},           {"t_end", t_end},   {"seed", seed},
                     {"grid_dt", grid_dt}, {"discard", discard}, {"stride", stride},
                     {"burn_in", burn_in}};
  j["spectra"] = {{"segment_len", segment_len},
                  {"overlap", overlap},
                  {"window", window},
                  {"analytic_only", analytic_only}};
  j["sweep"] = {{"tau_min", tau_min},     {"tau_max", tau_max},     {"tau_count", tau_count},
                {"kappa_min", kappa_min}, {"kappa_max", kappa_max}, {"kappa_count", kappa_count}};
  j["output"] = {{"directory", directory}, {"formats", formats}};
  return j.dump();
}

RunConfig parse_config_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config root must be an object");
  reject_unknown(root, "",
                 {"model", "solver", "simulation", "spectra", "sweep", "output"});

  RunConfig c;
  if (root.contains("model")) {
    const json& m = root["model"];
    reject_unknown(m, "model.", {"kind", "omega", "tau", "kappa", "eta", "diffusion"});
    read(m, "kind", c.model_kind);
    read(m, "omega", c.omega);
    read(m, "tau", c.tau);
    read(m, "kappa", c.kappa);
    read(m, "eta", c.eta);
    read(m, "diffusion", c.diffusion);
  }
  if (root.contains("solver")) {
    const json& s = root["solver"];
    reject_unknown(s, "solver.", {"J", "M", "N", "coalescence_tol", "check_convergence"});
    read(s, "J", c.J);
    read(s, "M", c.M);
    read(s, "N", c.N);
    read(s, "coalescence_tol", c.coalescence_tol);
    read(s, "check_convergence", c.check_convergence);
  }
  if (root.contains("simulation")) {
    const json& s = root["simulation"];
    reject_unknown(s, "simulation.",
                   {"dt", "t_end", "seed", "grid_dt", "discard", "stride", "burn_in"});
    read(s, "dt", c.dt);
    read(s, "t_end", c.t_end);
    read(s, "seed", c.seed);
    read(s, "grid_dt", c.grid_dt);
    read(s, "discard", c.discard);
    read(s, "stride", c.stride);
    read(s, "burn_in", c.burn_in);
  }
  if (root.contains("spectra")) {
    const json& s = root["spectra"];
    reject_unknown(s, "spectra.", {"segment_len", "overlap", "window", "analytic_only"});
    read(s, "segment_len", c.segment_len);
    read(s, "overlap", c.overlap);
    read(s, "window", c.window);
    read(s, "analytic_only", c.analytic_only);
    if (c.window != "hann") throw ConfigError("only the hann window is implemented");
  }
  if (root.contains("sweep")) {
    const json& s = root["sweep"];
    reject_unknown(s, "sweep.",
                   {"tau_min", "tau_max", "tau_count", "kappa_min", "kappa_max", "kappa_count"});
    read(s, "tau_min", c.tau_min);
    read(s, "tau_max", c.tau_max);
    read(s, "tau_count", c.tau_count);
    read(s, "kappa_min", c.kappa_min);
    read(s, "kappa_max", c.kappa_max);
    read(s, "kappa_count", c.kappa_count);
  }
  if (root.contains("output")) {
    const json& o = root["output"];
    reject_unknown(o, "output.", {"directory", "formats"});
    read(o, "directory", c.directory);
    read(o, "formats", c.formats);
    for (const auto& f : c.formats)
      if (f != "csv" && f != "json") throw ConfigError("unknown output format '" + f + "'");
  }

  // cheap validations that do not need the model built
  if (c.kappa_min < 0) throw ConfigError("sweep.kappa_min must be nonnegative");
  if (c.tau_count < 1 || c.kappa_count < 1) throw ConfigError("sweep counts must be >= 1");
  if (!(c.dt > 0) || !(c.grid_dt > 0)) throw ConfigError("time steps must be positive");
  if (c.stride < 1) throw ConfigError("simulation.stride must be >= 1");
  return c;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

}  // namespace qsync
