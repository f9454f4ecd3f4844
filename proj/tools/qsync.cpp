// Command-line front end: one subcommand per output family
// (eig | kt | tongue | spectra | stationary | phasediff).
//
// Exit codes: 0 success, 1 configuration error, 2 numerical failure.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>

#include "qsync/cf_solver.hpp"
#include "qsync/config.hpp"
#include "qsync/discrete_phase.hpp"
#include "qsync/io.hpp"
#include "qsync/parallel.hpp"
#include "qsync/perturbation.hpp"
#include "qsync/qmodes.hpp"
#include "qsync/simulate.hpp"
#include "qsync/spectra.hpp"
#include "qsync/spectral.hpp"
#include "qsync/tongue.hpp"

namespace fs = std::filesystem;
using namespace qsync;

namespace {

struct Cli {
  RunConfig cfg;
  unsigned threads = 0;
  std::string outdir;

  std::string path(const std::string& name) const { return (fs::path(outdir) / name).string(); }
  std::vector<std::string> meta(const std::string& extra = "") const {
    std::vector<std::string> m{"config " + cfg.echo()};
    if (!extra.empty()) m.push_back(extra);
    return m;
  }
  bool wants(const std::string& fmt) const {
    for (const auto& f : cfg.formats)
      if (f == fmt) return true;
    return false;
  }
};

double nan_or(const std::optional<double>& v) {
  return v ? *v : std::numeric_limits<double>::quiet_NaN();
}

// ---------------------------------------------------------------------------

void cmd_eig(const Cli& cli) {
  const CoupledModel family = cli.cfg.make_model();
  const auto kappas = cli.cfg.kappa_grid();
  const double tau = cli.cfg.tau;

  std::optional<double> kt;
  try {
    kt = kt_boundary(family, tau);
  } catch (const std::invalid_argument&) {
    kt = std::nullopt;
  }
  Complex lam1 = unperturbed_eigendata(family.with(0.0, 0.0)).lambda1;

  struct Row {
    double kappa;
    Complex lp, lm, fop, fom;
    bool coalesced;
  };
  std::vector<Row> rows(kappas.size());
  parallel_for(
      kappas.size(),
      [&](std::size_t i) {
        CoupledModel m = family.with(tau, kappas[i]);
        Row& r = rows[i];
        r.kappa = kappas[i];
        if (m.is_ring()) {
          auto [lp, lm] = ring_leading_pair(m, cli.cfg.J);
          r.lp = lp;
          r.lm = lm;
        } else {
          EigResult er = eig_dense(generator_matrix(m).cast<Complex>());
          auto idx = leading_oscillatory_pair(er);
          r.lp = er.pairs[idx[0]].lambda;
          r.lm = er.pairs[idx[1]].lambda;
        }
        SplittingReport rep = splitting_report(build_m_matrix(m));
        r.fop = lam1 + rep.lambda_c_plus;
        r.fom = lam1 + rep.lambda_c_minus;
        // keep the overlay branches aligned with the measured ones
        if (std::abs(r.fop - r.lp) + std::abs(r.fom - r.lm) >
            std::abs(r.fop - r.lm) + std::abs(r.fom - r.lp))
          std::swap(r.fop, r.fom);
        r.coalesced =
            std::abs(r.lp - r.lm) < cli.cfg.coalescence_tol * std::max(std::abs(r.lp), 1e-300);
      },
      cli.threads);

  std::ostringstream km;
  km << "tau=" << tau << " kt_kappa=" << (kt ? CsvWriter::format(*kt) : "none");
  CsvWriter w(cli.path("eig_sweep.csv"), cli.meta(km.str()),
              {"kappa", "re_plus", "im_plus", "re_minus", "im_minus", "re_fo_plus", "im_fo_plus",
               "re_fo_minus", "im_fo_minus", "coalesced"});
  for (const Row& r : rows)
    w.row({r.kappa, r.lp.real(), r.lp.imag(), r.lm.real(), r.lm.imag(), r.fop.real(),
           r.fop.imag(), r.fom.real(), r.fom.imag(), r.coalesced ? 1.0 : 0.0});
}

void cmd_kt(const Cli& cli) {
  const CoupledModel family = cli.cfg.make_model();
  const auto taus = cli.cfg.tau_grid();
  const auto kappas = cli.cfg.kappa_grid();

  CsvWriter wb(cli.path("kt_boundary.csv"), cli.meta(), {"tau", "kappa_star"});
  for (double t : taus) {
    std::optional<double> k;
    try {
      k = kt_boundary(family, t);
    } catch (const std::invalid_argument&) {
      k = std::nullopt;
    }
    wb.row({t, nan_or(k)});
  }

  CsvWriter wr(cli.path("kt_regimes.csv"), cli.meta(),
               {"tau", "kappa", "regime", "re_d", "im_d"});
  for (double t : taus)
    for (double k : kappas) {
      SplittingReport rep = splitting_report(build_m_matrix(family.with(t, k)));
      wr.row({t, k, static_cast<double>(rep.regime), rep.discriminant.real(),
              rep.discriminant.imag()});
    }
}

void cmd_tongue(const Cli& cli) {
  const CoupledModel family = cli.cfg.make_model();
  TongueOptions topts;
  topts.classify.ring_J = std::min(cli.cfg.J, 120);
  topts.threads = cli.threads;
  TongueGrid grid = sweep(family, cli.cfg.tau_grid(), cli.cfg.kappa_grid(), topts);

  if (cli.wants("csv")) {
    CsvWriter wg(cli.path("tongue_grid.csv"), cli.meta(), {"tau", "kappa", "class"});
    for (std::size_t ti = 0; ti < grid.tau_values.size(); ++ti)
      for (std::size_t ki = 0; ki < grid.kappa_values.size(); ++ki)
        wg.row({grid.tau_values[ti], grid.kappa_values[ki],
                static_cast<double>(grid.classification[ti][ki])});

    CsvWriter wbnd(cli.path("tongue_boundary.csv"), cli.meta(),
                   {"tau", "kappa_star", "kappa_analytic"});
    for (std::size_t ti = 0; ti < grid.tau_values.size(); ++ti)
      wbnd.row({grid.tau_values[ti], nan_or(grid.boundary_curve[ti]),
                nan_or(grid.analytic_line[ti])});
  }
  if (cli.wants("json")) {
    std::ofstream js(cli.path("tongue.json"));
    js << "{\n  \"version\": \"" << kVersion << "\",\n  \"config\": " << cli.cfg.echo()
       << ",\n  \"method\": \""
       << (grid.method == TongueGrid::Method::CFSolver ? "cf_solver" : "exact_matrix")
       << "\",\n  \"monotone\": " << (grid.monotone ? "true" : "false") << "\n}\n";
  }
}

void cmd_spectra(const Cli& cli) {
  const CoupledModel m = cli.cfg.make_model();
  LeadingModes modes = leading_modes(m, cli.cfg.J, cli.cfg.M);
  GaugeResult gauge = gauge_align(modes.q_plus, modes.q_minus, modes.rho);

  // analytic curves on a grid centered between the two mode frequencies
  const double w0 = 0.5 * (modes.lambda_plus.imag() + modes.lambda_minus.imag());
  const double halfwidth =
      10.0 * std::max({std::abs(modes.lambda_plus.real()), std::abs(modes.lambda_minus.real()),
                       0.5 * std::abs(modes.lambda_plus.imag() - modes.lambda_minus.imag())});
  VectorXd grid(1201);
  for (int i = 0; i < grid.size(); ++i)
    grid(i) = w0 - halfwidth + 2.0 * halfwidth * i / (grid.size() - 1);

  write_spectral_estimate_csv(cli.path("psd_plus_analytic.csv"),
                              lorentzian_power(modes.lambda_plus, grid), cli.meta("mode=plus"));
  write_spectral_estimate_csv(cli.path("psd_minus_analytic.csv"),
                              lorentzian_power(modes.lambda_minus, grid), cli.meta("mode=minus"));
  std::ostringstream gm;
  gm << "alpha=" << gauge.alpha << " aligned_overlap=" << gauge.aligned_overlap.real();
  write_spectral_estimate_csv(
      cli.path("csd_analytic.csv"),
      analytic_cross(modes.lambda_plus, modes.lambda_minus, gauge.aligned_overlap, grid),
      cli.meta(gm.str()));

  if (cli.cfg.analytic_only) return;
  if (!(cli.cfg.t_end > 0)) throw ConfigError("spectra: simulation.t_end must be positive");

  std::vector<EigenfunctionDescriptor> obs{modes.q_plus, gauge.rotated_minus,
                                           raw_observable(m)};
  std::vector<std::string> labels{"q_plus", "q_minus_aligned", "raw"};
  double dt = m.kind == ModelKind::Discrete9D ? cli.cfg.grid_dt : cli.cfg.dt;
  std::vector<QSeries> series = simulate_q_series(m, obs, labels, dt, cli.cfg.t_end,
                                                  cli.cfg.seed, cli.cfg.stride, cli.cfg.burn_in);

  write_spectral_estimate_csv(cli.path("psd_plus_welch.csv"),
                              welch_psd(series[0], cli.cfg.segment_len, cli.cfg.overlap),
                              cli.meta("mode=plus"));
  write_spectral_estimate_csv(cli.path("psd_minus_welch.csv"),
                              welch_psd(series[1], cli.cfg.segment_len, cli.cfg.overlap),
                              cli.meta("mode=minus"));
  write_spectral_estimate_csv(
      cli.path("csd_welch.csv"),
      welch_csd(series[0], series[1], cli.cfg.segment_len, cli.cfg.overlap), cli.meta(gm.str()));
  write_spectral_estimate_csv(cli.path("psd_raw_welch.csv"),
                              welch_psd(series[2], cli.cfg.segment_len, cli.cfg.overlap),
                              cli.meta("mode=raw-coordinate comparison"));
}

void cmd_stationary(const Cli& cli) {
  const CoupledModel m = cli.cfg.make_model();
  StationaryCorrection corr = stationary_correction(m, std::min(cli.cfg.J, 80));

  switch (m.kind) {
    case ModelKind::Ring2D:
    case ModelKind::RingCos2D: {
      const auto& field = std::get<FourierField>(corr);
      RingStationary rho = std::get<RingStationary>(stationary_density(m, std::min(cli.cfg.J, 80)));
      if (cli.wants("csv")) {
        write_fourier_field_csv(cli.path("stationary_correction.csv"), field, cli.meta());
        write_fourier_field_csv(cli.path("stationary_exact.csv"), rho.field, cli.meta());
      }
      if (cli.wants("json")) {
        std::ofstream js(cli.path("stationary_correction.json"));
        js << fourier_field_json(field) << "\n";
      }

      if (!cli.cfg.analytic_only) {
        // Monte-Carlo histogram comparison against P0 + correction
        Trajectory traj = euler_maruyama(m, cli.cfg.dt, cli.cfg.t_end, cli.cfg.seed);
        const int B = 32;
        Eigen::MatrixXd hist = Eigen::MatrixXd::Zero(B, B);
        long skip = static_cast<long>(cli.cfg.discard / cli.cfg.dt);
        long count = 0;
        for (long i = skip; i < static_cast<long>(traj.values.size()); ++i) {
          int bx = std::min(B - 1, static_cast<int>(traj.values[i](0) / kTwoPi * B));
          int by = std::min(B - 1, static_cast<int>(traj.values[i](1) / kTwoPi * B));
          hist(bx, by) += 1.0;
          ++count;
        }
        hist /= static_cast<double>(count);
        double tv = 0;
        const double cell = kTwoPi / B;
        CsvWriter wh(cli.path("stationary_histogram.csv"), cli.meta(),
                     {"x", "y", "empirical", "first_order"});
        for (int bx = 0; bx < B; ++bx)
          for (int by = 0; by < B; ++by) {
            double x = (bx + 0.5) * cell, y = (by + 0.5) * cell;
            double first = (1.0 / (4.0 * kPi * kPi) +
                            eval_stationary_correction(corr, Eigen::Vector2d(x, y))) *
                           cell * cell;
            tv += 0.5 * std::abs(hist(bx, by) - first);
            wh.row({x, y, hist(bx, by), first});
          }
        std::cout << "histogram total variation vs first-order density: " << tv << "\n";
      }
      break;
    }
    case ModelKind::Discrete9D: {
      const auto& v = std::get<VectorXd>(corr);
      DiscreteStationary rho = std::get<DiscreteStationary>(stationary_density(m));
      VectorXd occupancy = VectorXd::Zero(9);
      if (!cli.cfg.analytic_only) {
        Trajectory traj = gillespie(m, cli.cfg.t_end, cli.cfg.seed, cli.cfg.grid_dt);
        for (int s : traj.states) occupancy(s) += 1.0;
        occupancy /= static_cast<double>(traj.states.size());
      }
      CsvWriter w(cli.path("stationary_discrete.csv"), cli.meta(),
                  {"state", "exact", "correction", "occupancy"});
      for (int s = 0; s < 9; ++s)
        w.row({static_cast<double>(s), rho.p(s), v(s), occupancy(s)});
      break;
    }
    case ModelKind::Linear4D: {
      const auto& g = std::get<GaussianCovarianceCorrection>(corr);
      CsvWriter w(cli.path("stationary_covariance.csv"), cli.meta(),
                  {"row", "col", "sigma0", "sigma1"});
      for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c)
          w.row({static_cast<double>(r), static_cast<double>(c), g.sigma0(r, c), g.sigma1(r, c)});
      break;
    }
  }
}

void cmd_phasediff(const Cli& cli) {
  const CoupledModel m = cli.cfg.make_model();
  std::vector<double> kappas = cli.cfg.kappa_grid();
  if (!kappas.empty() && kappas.front() == 0.0) kappas.erase(kappas.begin());
  ProjectedPhases pp = project_and_diff(m, kappas);
  CsvWriter w(cli.path("phasediff.csv"), cli.meta(),
              {"kappa", "cross_0", "cross_1", "cross_2", "within_0", "within_1", "within_2",
               "degenerate"});
  for (std::size_t i = 0; i < pp.kappa_values.size(); ++i)
    w.row({pp.kappa_values[i], pp.phase_diff[i](0), pp.phase_diff[i](1), pp.phase_diff[i](2),
           pp.within_diff[i](0), pp.within_diff[i](1), pp.within_diff[i](2),
           pp.degenerate[i] ? 1.0 : 0.0});
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Q-function synchronization toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string outdir;
  std::string format;
  uint64_t seed_override = 0;
  bool seed_given = false;
  unsigned threads = 0;

  app.add_option("--config", config_path, "JSON configuration file")->required();
  app.add_option("--out", outdir, "output directory (overrides output.directory)");
  app.add_option("--seed", seed_override, "seed override")->each([&](const std::string&) {
    seed_given = true;
  });
  app.add_option("--threads", threads, "worker threads (0 = hardware)");
  app.add_option("--format", format, "restrict output format (csv or json)");

  auto* sub_eig = app.add_subcommand("eig", "eigenvalue branches vs coupling");
  auto* sub_kt = app.add_subcommand("kt", "first-order coalescence boundary and regimes");
  auto* sub_tongue = app.add_subcommand("tongue", "synchronization region sweep");
  auto* sub_spectra = app.add_subcommand("spectra", "power and cross spectra");
  auto* sub_stationary = app.add_subcommand("stationary", "stationary density and correction");
  auto* sub_phasediff = app.add_subcommand("phasediff", "discrete-model phase locking");

  CLI11_PARSE(app, argc, argv);

  try {
    Cli cli;
    cli.cfg = parse_config_file(config_path);
    if (!outdir.empty()) cli.cfg.directory = outdir;
    if (seed_given) cli.cfg.seed = seed_override;
    if (!format.empty()) {
      if (format != "csv" && format != "json") throw ConfigError("unknown --format " + format);
      cli.cfg.formats = {format};
    }
    cli.threads = threads;
    cli.outdir = cli.cfg.directory;
    fs::create_directories(cli.outdir);

    if (*sub_eig) cmd_eig(cli);
    if (*sub_kt) cmd_kt(cli);
    if (*sub_tongue) cmd_tongue(cli);
    if (*sub_spectra) cmd_spectra(cli);
    if (*sub_stationary) cmd_stationary(cli);
    if (*sub_phasediff) cmd_phasediff(cli);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
