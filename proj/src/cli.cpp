#include "floqem/cli.hpp"

#include "floqem/config.hpp"
#include "floqem/csv.hpp"
#include "floqem/decay.hpp"
#include "floqem/persistence.hpp"

#include <CLI11.hpp>

#include <array>
#include <filesystem>
#include <iostream>
#include <random>

namespace floqem {

namespace {

constexpr const char* kVersion = "0.1.0";

struct Common {
  std::string config;
  std::string out = "out";
  int threads = 1;
  std::uint64_t seed = 12345;
};

std::string outpath(const Common& c, const std::string& name) {
  std::filesystem::create_directories(c.out);
  return (std::filesystem::path(c.out) / name).string();
}

void stamp(CsvWriter& w, const Common& c, const ExperimentConfig& cfg,
           const std::string& command) {
  w.meta("command", command);
  w.meta("version", kVersion);
  w.meta("config_hash", std::to_string(cfg.hash));
  w.meta("seed", std::to_string(c.seed));
}

std::string fb(bool b) { return b ? "1" : "0"; }

int cmd_bands(const Common& c) {
  const ExperimentConfig cfg = load_config(c.config);
  const ResolvedExperiment rx = resolve(cfg, c.threads);
  const ScalarField field = scan_channel_field(rx.pot, cfg.bands.channel);
  const BandStructure bs =
      band_scan(field, rx.pot.period, {cfg.bands.lo, cfg.bands.hi},
                cfg.bands.samples, rx.cfg.matching.floquet.integrator, c.threads);
  {
    CsvWriter w(outpath(c, "bands.csv"));
    stamp(w, c, cfg, "bands");
    w.header({"lambda", "discriminant", "in_band"});
    for (const BandPoint& p : bs.table)
      w.row({format_g(p.lambda), format_g(p.discriminant), fb(p.in_band)});
  }
  {
    CsvWriter w(outpath(c, "band_edges.csv"));
    stamp(w, c, cfg, "bands");
    w.header({"band", "lo", "hi", "midpoint"});
    for (size_t i = 0; i < bs.bands.size(); ++i)
      w.row({std::to_string(i), format_g(bs.bands[i].lo),
             format_g(bs.bands[i].hi), format_g(bs.bands[i].midpoint())});
  }
  std::cout << "bands: " << bs.bands.size() << " band(s) in ["
            << format_g(cfg.bands.lo) << ", " << format_g(cfg.bands.hi) << "]";
  if (!bs.bands.empty())
    std::cout << "; first band [" << format_g(bs.bands[0].lo) << ", "
              << format_g(bs.bands[0].hi) << "], midpoint "
              << format_g(bs.bands[0].midpoint());
  std::cout << "\n";
  return 0;
}

int cmd_monodromy(const Common& c) {
  const ExperimentConfig cfg = load_config(c.config);
  const ResolvedExperiment rx = resolve(cfg, c.threads);
  const PeriodicSystem sys = infinity_system(rx.pot, rx.lambda0);
  const FloquetData fd = floquet_decomposition(sys, rx.cfg.matching.floquet);
  {
    CsvWriter w(outpath(c, "monodromy.csv"));
    stamp(w, c, cfg, "monodromy");
    w.meta("lambda0", format_g(rx.lambda0));
    w.meta("period", format_g(fd.period));
    w.header({"i", "j", "value"});
    for (int i = 0; i < fd.monodromy.rows(); ++i)
      for (int j = 0; j < fd.monodromy.cols(); ++j)
        w.row({std::to_string(i), std::to_string(j),
               format_g(fd.monodromy(i, j))});
  }
  {
    CsvWriter w(outpath(c, "multipliers.csv"));
    stamp(w, c, cfg, "monodromy");
    w.meta("lambda0", format_g(rx.lambda0));
    w.meta("center_count", std::to_string(fd.center_count));
    w.meta("omega_min", format_g(fd.omega_min));
    w.meta("det_defect", format_g(fd.det_defect));
    w.meta("exp_defect", format_g(fd.exp_defect));
    w.meta("periodicity_defect", format_g(fd.periodicity_defect));
    w.header({"k", "mult_re", "mult_im", "modulus", "exp_re", "exp_im"});
    for (int k = 0; k < fd.multipliers.size(); ++k)
      w.row({std::to_string(k), format_g(fd.multipliers(k).real()),
             format_g(fd.multipliers(k).imag()),
             format_g(std::abs(fd.multipliers(k))),
             format_g(fd.exponents(k).real()),
             format_g(fd.exponents(k).imag())});
  }
  std::cout << "monodromy at lambda0 = " << format_g(rx.lambda0)
            << ": dims (s, c, u) = (" << fd.split.stable_basis.cols() << ", "
            << fd.split.center_basis.cols() << ", "
            << fd.split.unstable_basis.cols()
            << "), omega_min = " << format_g(fd.omega_min)
            << ", decomposition defect = " << format_g(fd.exp_defect) << "\n";
  return 0;
}

struct FitSummary {
  bool fitted = false;
  DecayFit fit;
};

FitSummary try_fit(const EigenCandidate& cand) {
  FitSummary s;
  try {
    s.fit = fit_decay_rate(cand);
    s.fitted = true;
  } catch (const FitRejected&) {
  }
  return s;
}

void write_candidate(const Common& c, const ExperimentConfig& cfg,
                     const std::string& command, const EigenCandidate& cand,
                     const FitSummary& fs) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  CsvWriter w(outpath(c, "candidate.csv"));
  stamp(w, c, cfg, command);
  w.header({"lambda", "sigma_min", "flagged", "center_count", "omega_min",
            "residual", "seam_jump", "rate_right", "rate_left", "r2_right",
            "r2_left", "within_reference"});
  w.row({format_g(cand.lambda), format_g(cand.sigma_min), fb(cand.flagged),
         std::to_string(cand.center_count), format_g(cand.omega_min),
         format_g(cand.residual), format_g(cand.seam_jump),
         format_g(fs.fitted ? fs.fit.rate_right : nan),
         format_g(fs.fitted ? fs.fit.rate_left : nan),
         format_g(fs.fitted ? fs.fit.r2_right : nan),
         format_g(fs.fitted ? fs.fit.r2_left : nan),
         fb(fs.fitted && fs.fit.within_reference())});
}

int cmd_eig(const Common& c) {
  const ExperimentConfig cfg = load_config(c.config);
  const ResolvedExperiment rx = resolve(cfg, c.threads);
  EigenCandidate cand = find_embedded_eigenvalue(rx.pot, rx.pert_ptr(),
                                                 rx.lambda0, rx.cfg.matching);
  eigenfunction(rx.pot, rx.pert_ptr(), cand, rx.cfg.matching);
  const FitSummary fs = try_fit(cand);
  {
    CsvWriter w(outpath(c, "mismatch.csv"));
    stamp(w, c, cfg, "eig");
    w.meta("lambda0", format_g(rx.lambda0));
    w.header({"lambda", "sigma_min"});
    for (const ScanPoint& p : cand.scan)
      w.row({format_g(p.lambda), format_g(p.sigma_min)});
  }
  write_candidate(c, cfg, "eig", cand, fs);
  {
    const int n = rx.pot.n;
    CsvWriter w(outpath(c, "eigenfunction.csv"));
    stamp(w, c, cfg, "eig");
    w.meta("lambda", format_g(cand.lambda));
    std::vector<std::string> cols{"x"};
    for (int j = 0; j < n; ++j) cols.push_back("u" + std::to_string(j));
    for (int j = 0; j < n; ++j) cols.push_back("du" + std::to_string(j));
    w.header(cols);
    for (size_t k = 0; k < cand.grid.size(); ++k) {
      std::vector<std::string> cells{format_g(cand.grid[k])};
      for (int j = 0; j < 2 * n; ++j)
        cells.push_back(format_g(cand.state(static_cast<Eigen::Index>(k), j)));
      w.row(cells);
    }
  }
  std::cout << "eig: lambda = " << format_g(cand.lambda)
            << ", sigma_min = " << format_g(cand.sigma_min)
            << (cand.flagged ? " (flagged as an eigenvalue)" : " (no eigenvalue)")
            << ", residual = " << format_g(cand.residual) << "\n";
  return 0;
}

Perturbation build_direction(const std::string& name,
                             const ResolvedExperiment& rx, std::uint64_t seed,
                             const QuadratureConfig& quad) {
  const int n = rx.pot.n;
  const double beta = rx.pot.beta;
  if (name == "transversal")
    return normalize_direction(make_perturbation(
        PerturbationClass::t_beta, sech2_profile(), "sech2", 1.0, n, beta));
  if (name == "diagonal")
    return normalize_direction(make_perturbation(
        PerturbationClass::diagonal, sech2_profile(), "sech2", 1.0, n, beta, 0));
  if (name == "tangent") {
    const TangentData td =
        make_tangent_data(rx.pot, rx.lambda0, rx.cfg.matching.floquet, quad);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::array<double, 5> cv{};
    for (double& v : cv) v = u(rng);
    ScalarField raw = [cv](double x) {
      const double s = 1.0 / std::cosh(x);
      return s * s *
             (cv[0] + cv[1] * std::sin(x) + cv[2] * std::cos(x) +
              cv[3] * std::sin(2.0 * x) + cv[4] * std::cos(2.0 * x));
    };
    ScalarField proj = project_tangent(raw, td, quad);
    return normalize_direction(make_perturbation(
        PerturbationClass::t_beta, proj, "tangent_projected", 1.0, n, beta));
  }
  throw ConfigError("unknown persistence direction '" + name + "'");
}

int cmd_persist(const Common& c) {
  const ExperimentConfig cfg = load_config(c.config);
  const ResolvedExperiment rx = resolve(cfg, c.threads);
  const QuadratureConfig quad;
  for (const std::string& name : cfg.persist.directions) {
    const Perturbation dir = build_direction(name, rx, c.seed, quad);
    const PersistenceScan scan = persistence_scan(
        rx.pot, rx.lambda0, dir, cfg.persist.epsilons, rx.cfg.matching);
    CsvWriter w(outpath(c, "persist_" + name + ".csv"));
    stamp(w, c, cfg, "persist");
    w.meta("direction", name);
    w.meta("lambda0", format_g(rx.lambda0));
    w.meta("fitted_exponent", format_g(scan.fitted_exponent));
    w.header({"epsilon", "lambda_min", "sigma_min", "flagged"});
    for (const PersistenceRow& r : scan.rows)
      w.row({format_g(r.epsilon), format_g(r.lambda_min), format_g(r.sigma_min),
             fb(r.flagged)});
    std::cout << "persist[" << name
              << "]: exponent = " << format_g(scan.fitted_exponent)
              << ", sigma_min at smallest epsilon = "
              << format_g(scan.rows.back().sigma_min) << "\n";
  }
  return 0;
}

int cmd_decay(const Common& c) {
  const ExperimentConfig cfg = load_config(c.config);
  const ResolvedExperiment rx = resolve(cfg, c.threads);
  EigenCandidate cand = find_embedded_eigenvalue(rx.pot, rx.pert_ptr(),
                                                 rx.lambda0, rx.cfg.matching);
  eigenfunction(rx.pot, rx.pert_ptr(), cand, rx.cfg.matching);
  const DecayFit fit = fit_decay_rate(cand);
  {
    CsvWriter w(outpath(c, "decay.csv"));
    stamp(w, c, cfg, "decay");
    w.header({"lambda", "sigma_min", "rate_right", "rate_left", "r2_right",
              "r2_left", "kappa", "omega_min", "within_reference"});
    w.row({format_g(cand.lambda), format_g(cand.sigma_min),
           format_g(fit.rate_right), format_g(fit.rate_left),
           format_g(fit.r2_right), format_g(fit.r2_left),
           format_g(fit.kappa()), format_g(fit.omega_min),
           fb(fit.within_reference())});
  }

  int passed = 0;
  {
    std::mt19937_64 rng(c.seed);
    std::uniform_real_distribution<double> uu(0.5, 1.5), us(-1.5, -0.5),
        uf(0.5, 3.0), uph(0.0, 2.0 * M_PI), ud(0.5, 1.0);
    CsvWriter w(outpath(c, "roughness.csv"));
    stamp(w, c, cfg, "decay");
    w.header({"trial", "kappa_s_base", "kappa_u_base", "K", "delta", "budget",
              "kappa_s_meas", "kappa_u_meas", "in_band"});
    for (int t = 0; t < cfg.decay.trials; ++t) {
      const double ku = uu(rng), ks = us(rng);
      MatrixXd base = MatrixXd::Zero(2, 2);
      base(0, 0) = ku;
      base(1, 1) = ks;
      const double budget = std::min(-ks, ku) / 2.0;
      const double delta = cfg.decay.delta_frac * budget * ud(rng);
      const double om = uf(rng), ph = uph(rng);
      MatrixField D = [delta, om, ph](double x) {
        MatrixXd d = MatrixXd::Zero(2, 2);
        const double v = delta * std::sin(om * x + ph);
        d(0, 1) = v;
        d(1, 0) = -v;
        return d;
      };
      const RoughnessResult res = roughness_probe(
          RoughnessProbe{base, D, delta, cfg.decay.horizon},
          rx.cfg.matching.floquet.integrator);
      const bool ok = res.within_bands();
      passed += ok ? 1 : 0;
      w.row({std::to_string(t), format_g(res.kappa_s_base),
             format_g(res.kappa_u_base), format_g(res.K), format_g(res.delta),
             format_g(res.budget), format_g(res.kappa_s_meas),
             format_g(res.kappa_u_meas), fb(ok)});
    }
  }
  std::cout << "decay: kappa = " << format_g(fit.kappa()) << " (right "
            << format_g(fit.rate_right) << ", left " << format_g(fit.rate_left)
            << "), omega_min = " << format_g(fit.omega_min) << ", roughness "
            << passed << "/" << cfg.decay.trials << " trials in band\n";
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{
      "Floquet analysis of asymptotically periodic Schrodinger systems: "
      "band structure, embedded eigenvalue matching, persistence and decay"};
  app.require_subcommand(1);

  Common c;
  auto add_common = [&c](CLI::App* sub) {
    sub->add_option("--config", c.config, "JSON experiment config")->required();
    sub->add_option("--out", c.out, "output directory (created if missing)");
    sub->add_option("--threads", c.threads, "worker threads")
        ->check(CLI::PositiveNumber);
    sub->add_option("--seed", c.seed, "seed for randomized probes");
  };

  CLI::App* bands =
      app.add_subcommand("bands", "scan the spectral bands of the periodic channel");
  CLI::App* monodromy =
      app.add_subcommand("monodromy", "period map and Floquet data at lambda0");
  CLI::App* eig = app.add_subcommand(
      "eig", "locate an embedded eigenvalue by subspace matching");
  CLI::App* persist = app.add_subcommand(
      "persist", "mismatch scaling under perturbation directions");
  CLI::App* decay = app.add_subcommand(
      "decay", "decay-rate fit of the matched state and roughness probes");
  for (CLI::App* sub : {bands, monodromy, eig, persist, decay}) add_common(sub);

  std::vector<std::string> full = {"floqem"};
  full.insert(full.end(), args.begin(), args.end());
  std::vector<char*> argv;
  argv.reserve(full.size());
  for (std::string& s : full) argv.push_back(s.data());

  try {
    try {
      app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e);
      return code == 0 ? 0 : 2;  // usage problems share the config exit code
    }
    if (bands->parsed()) return cmd_bands(c);
    if (monodromy->parsed()) return cmd_monodromy(c);
    if (eig->parsed()) return cmd_eig(c);
    if (persist->parsed()) return cmd_persist(c);
    if (decay->parsed()) return cmd_decay(c);
    throw ConfigError("no command selected");
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace floqem
