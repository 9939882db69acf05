#include "floqem/config.hpp"

#include "floqem/csv.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace floqem {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& j, const std::set<std::string>& known,
                         const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key()))
      throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

TableSpec parse_table(const json& j, const std::string& where) {
  reject_unknown_keys(j, {"x0", "dx", "values"}, where);
  TableSpec t;
  read(j, "x0", t.x0);
  if (!j.contains("dx")) throw ConfigError(where + " needs 'dx'");
  t.dx = j.at("dx").get<double>();
  if (!j.contains("values")) throw ConfigError(where + " needs 'values'");
  t.rows = j.at("values").get<std::vector<std::vector<double>>>();
  return t;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");

  try {
    ExperimentConfig cfg;
    reject_unknown_keys(j, {"n", "beta", "lambda0", "potential", "period",
                            "perturbation", "bands", "eig", "persist", "decay",
                            "matching", "integrator"},
                        "config");
    read(j, "n", cfg.n);
    read(j, "beta", cfg.beta);
    if (j.contains("lambda0") && !j.at("lambda0").is_null())
      cfg.lambda0 = j.at("lambda0").get<double>();
    read(j, "period", cfg.period);

    if (j.contains("potential")) {
      const json& p = j.at("potential");
      if (p.is_string()) {
        cfg.potential = p.get<std::string>();
      } else if (p.is_object()) {
        reject_unknown_keys(p, {"period", "Ap", "A_minus_Ap"}, "potential");
        cfg.potential = "table";
        if (p.contains("period")) cfg.period = p.at("period").get<double>();
        if (!p.contains("Ap") || !p.contains("A_minus_Ap"))
          throw ConfigError("table potential needs 'Ap' and 'A_minus_Ap'");
        cfg.table_ap = parse_table(p.at("Ap"), "potential.Ap");
        cfg.table_diff = parse_table(p.at("A_minus_Ap"), "potential.A_minus_Ap");
      } else {
        throw ConfigError("'potential' must be a name or a table object");
      }
    }

    if (j.contains("perturbation") && !j.at("perturbation").is_null()) {
      const json& p = j.at("perturbation");
      reject_unknown_keys(p, {"class", "profile", "bump", "epsilon", "row",
                              "col", "pattern", "normalize"},
                          "perturbation");
      PerturbationSpec spec;
      if (p.contains("class"))
        spec.cls = perturbation_class_from_string(p.at("class").get<std::string>());
      read(p, "profile", spec.profile);
      if (p.contains("bump")) {
        const auto b = p.at("bump").get<std::vector<double>>();
        if (b.size() != 2) throw ConfigError("'bump' must be [a, b]");
        spec.bump_a = b[0];
        spec.bump_b = b[1];
      }
      read(p, "epsilon", spec.epsilon);
      read(p, "row", spec.row);
      read(p, "col", spec.col);
      read(p, "normalize", spec.normalize);
      if (p.contains("pattern")) {
        const auto rows = p.at("pattern").get<std::vector<std::vector<double>>>();
        spec.pattern.resize(rows.size(), rows.empty() ? 0 : rows[0].size());
        for (size_t r = 0; r < rows.size(); ++r) {
          if (rows[r].size() != rows[0].size())
            throw ConfigError("perturbation pattern must be rectangular");
          for (size_t c = 0; c < rows[r].size(); ++c)
            spec.pattern(r, c) = rows[r][c];
        }
      }
      cfg.perturbation = std::move(spec);
    }

    if (j.contains("bands")) {
      const json& b = j.at("bands");
      reject_unknown_keys(b, {"lo", "hi", "samples", "channel"}, "bands");
      read(b, "lo", cfg.bands.lo);
      read(b, "hi", cfg.bands.hi);
      read(b, "samples", cfg.bands.samples);
      read(b, "channel", cfg.bands.channel);
    }
    if (j.contains("eig")) {
      const json& e = j.at("eig");
      reject_unknown_keys(e, {"radius", "coarse_samples"}, "eig");
      read(e, "radius", cfg.eig.radius);
      read(e, "coarse_samples", cfg.eig.coarse_samples);
    }
    if (j.contains("persist")) {
      const json& p = j.at("persist");
      reject_unknown_keys(p, {"epsilons", "directions"}, "persist");
      read(p, "epsilons", cfg.persist.epsilons);
      read(p, "directions", cfg.persist.directions);
    }
    if (j.contains("decay")) {
      const json& d = j.at("decay");
      reject_unknown_keys(d, {"trials", "delta_frac", "horizon"}, "decay");
      read(d, "trials", cfg.decay.trials);
      read(d, "delta_frac", cfg.decay.delta_frac);
      read(d, "horizon", cfg.decay.horizon);
    }
    if (j.contains("matching")) {
      const json& m = j.at("matching");
      reject_unknown_keys(m, {"T", "mismatch_tol", "lambda_tol", "sample_step",
                              "blend_halfwidth", "center_tol"},
                          "matching");
      read(m, "T", cfg.matching.T);
      read(m, "mismatch_tol", cfg.matching.mismatch_tol);
      read(m, "lambda_tol", cfg.matching.lambda_tol);
      read(m, "sample_step", cfg.matching.sample_step);
      read(m, "blend_halfwidth", cfg.matching.blend_halfwidth);
      read(m, "center_tol", cfg.matching.floquet.center_tol);
    }
    if (j.contains("integrator")) {
      const json& i = j.at("integrator");
      reject_unknown_keys(i, {"rel_tol", "abs_tol", "max_step", "renorm_interval"},
                          "integrator");
      IntegratorConfig& ic = cfg.matching.floquet.integrator;
      read(i, "rel_tol", ic.rel_tol);
      read(i, "abs_tol", ic.abs_tol);
      read(i, "max_step", ic.max_step);
      read(i, "renorm_interval", ic.renorm_interval);
    }

    cfg.matching.radius = cfg.eig.radius;
    cfg.matching.coarse_samples = cfg.eig.coarse_samples;

    if (cfg.n < 1) throw ConfigError("n must be >= 1");
    if (!(cfg.beta > 1.0))
      throw ConfigError(
          "beta must be > 1 (perturbations live in a (1+|x|)^beta weighted space)");
    if (!(cfg.period > 0)) throw ConfigError("period must be positive");
    if (cfg.bands.samples < 8) throw ConfigError("bands.samples must be >= 8");
    if (!(cfg.bands.lo < cfg.bands.hi)) throw ConfigError("bands range is empty");
    if (cfg.perturbation && !(cfg.perturbation->epsilon >= 0))
      throw ConfigError("perturbation epsilon must be >= 0");
    if (cfg.decay.trials < 0) throw ConfigError("decay.trials must be >= 0");
    if (!(cfg.decay.delta_frac > 0 && cfg.decay.delta_frac < 1))
      throw ConfigError("decay.delta_frac must be in (0, 1)");
    cfg.matching.validate();

    cfg.hash = fnv1a64(j.dump());
    return cfg;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config type error: ") + e.what());
  }
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

ScalarField make_profile(const PerturbationSpec& spec) {
  if (spec.profile == "sech2") return sech2_profile();
  if (spec.profile == "gauss") return gaussian_profile();
  if (spec.profile == "bump") return bump_profile(spec.bump_a, spec.bump_b);
  throw ConfigError("unknown perturbation profile '" + spec.profile + "'");
}

Perturbation build_perturbation(const PerturbationSpec& spec, int n, double beta) {
  Perturbation p = make_perturbation(
      spec.cls, make_profile(spec), spec.profile, spec.epsilon, n, beta,
      spec.row, spec.col, spec.pattern.size() > 0 ? &spec.pattern : nullptr);
  if (spec.normalize) p = normalize_direction(p);
  return p;
}

ScalarField scan_channel_field(const Potential& pot, int channel) {
  if (!pot.diagonal_periodic_part)
    throw ConfigError("band scans need a diagonal periodic part");
  if (channel < 0) channel = (pot.name == "example5") ? 1 : 0;
  if (channel >= pot.n) throw ConfigError("scan channel out of range");
  return pot.Ap_diagonal[channel];
}

ResolvedExperiment resolve(const ExperimentConfig& cfg, int threads) {
  ResolvedExperiment r;
  r.cfg = cfg;
  r.cfg.matching.threads = std::max(1, threads);

  if (cfg.potential == "example5") {
    if (cfg.n != 2) throw ConfigError("the example5 potential has n = 2");
    double lam0;
    if (cfg.lambda0) {
      lam0 = *cfg.lambda0;
    } else {
      // The periodic channel does not depend on lambda0, so the band midpoint
      // can be computed before the potential is assembled.
      ScalarField vp = [](double x) { return 2.0 * std::cos(2.0 * x); };
      const BandStructure bs =
          band_scan(vp, M_PI, {cfg.bands.lo, cfg.bands.hi}, cfg.bands.samples,
                    r.cfg.matching.floquet.integrator, r.cfg.matching.threads);
      lam0 = first_band_midpoint(bs);
    }
    r.pot = make_example5(lam0);
    r.lambda0 = lam0;
  } else if (cfg.potential == "free") {
    r.pot = make_free_potential(cfg.n, cfg.period);
    r.pot.beta = cfg.beta;
    r.lambda0 = cfg.lambda0.value_or(1.0);
  } else if (cfg.potential == "table") {
    if (!cfg.table_ap || !cfg.table_diff)
      throw ConfigError("table potential needs both sample tables");
    r.pot = make_table_potential(cfg.n, cfg.period, cfg.beta,
                                 cfg.table_diff->x0, cfg.table_diff->dx,
                                 cfg.table_diff->rows, cfg.table_ap->dx,
                                 cfg.table_ap->rows);
    if (!cfg.lambda0)
      throw ConfigError("table potentials need an explicit lambda0");
    r.lambda0 = *cfg.lambda0;
  } else {
    throw ConfigError("unknown potential '" + cfg.potential + "'");
  }

  if (cfg.perturbation)
    r.pert = build_perturbation(*cfg.perturbation, r.pot.n, r.pot.beta);
  return r;
}

}  // namespace floqem
