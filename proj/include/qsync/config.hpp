#pragma once

#include <string>
#include <vector>

#include "qsync/models.hpp"

namespace qsync {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Resolved run configuration.  Parsing is strict: unknown keys anywhere in
// the file are rejected, and every default is materialized so the echoed
// config fully describes the run.
struct RunConfig {
  // model
  std::string model_kind = "ring";
  double omega = 2.0;
  double tau = 0.0;
  double kappa = 0.0;
  double eta = 0.1;
  double diffusion = 0.1;

  // solver
  int J = 250;
  int M = 50;
  int N = 1;
  double coalescence_tol = 1e-6;
  bool check_convergence = false;

  // simulation
  double dt = 0.002;
  double t_end = 1000.0;
  uint64_t seed = 1234;
  double grid_dt = 2e-4;
  double discard = 10.0;
  int stride = 25;
  double burn_in = 100.0;

  // spectra
  int segment_len = 4096;
  double overlap = 0.5;
  std::string window = "hann";
  bool analytic_only = false;

  // sweep
  double tau_min = -0.5, tau_max = 0.5;
  int tau_count = 11;
  double kappa_min = 0.0, kappa_max = 0.5;
  int kappa_count = 26;

  // output
  std::string directory = "out";
  std::vector<std::string> formats = {"csv"};

  CoupledModel make_model() const;
  std::vector<double> tau_grid() const;
  std::vector<double> kappa_grid() const;

  // single-line JSON echo of every resolved value, for metadata headers
  std::string echo() const;
};

RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);

}  // namespace qsync
