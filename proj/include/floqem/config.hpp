#pragma once

#include "floqem/potentials.hpp"
#include "floqem/spectral.hpp"

#include <optional>
#include <string>
#include <vector>

namespace floqem {

struct PerturbationSpec {
  PerturbationClass cls = PerturbationClass::t_beta;
  std::string profile = "sech2";  // sech2 | gauss | bump
  double bump_a = -2.0, bump_b = 2.0;
  double epsilon = 0.0;
  int row = 0, col = 1;
  MatrixXd pattern;       // class "full" only
  bool normalize = true;  // unit weighted norm for the unit-scale direction
};

struct BandsSection {
  double lo = -1.0, hi = 4.0;
  int samples = 601;
  int channel = -1;  // -1: default scan channel for the potential
};

struct EigSection {
  double radius = 0.02;
  int coarse_samples = 41;
};

struct PersistSection {
  std::vector<double> epsilons{0.04, 0.02, 0.01};
  std::vector<std::string> directions{"transversal", "tangent", "diagonal"};
};

struct DecaySection {
  int trials = 5;
  double delta_frac = 0.5;  // fraction of the admissible roughness budget
  double horizon = 50.0;
};

struct TableSpec {
  double x0 = 0.0, dx = 0.0;
  std::vector<std::vector<double>> rows;
};

struct ExperimentConfig {
  int n = 2;
  double beta = 2.0;
  std::optional<double> lambda0;  // default: first band midpoint
  std::string potential = "example5";
  double period = M_PI;  // free/table potentials
  std::optional<TableSpec> table_ap;    // table potential: periodic part
  std::optional<TableSpec> table_diff;  // table potential: A - Ap
  std::optional<PerturbationSpec> perturbation;
  BandsSection bands;
  EigSection eig;
  PersistSection persist;
  DecaySection decay;
  MatchingConfig matching;
  uint64_t hash = 0;  // over the canonical JSON dump
};

ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& json_text);

ScalarField make_profile(const PerturbationSpec& spec);
Perturbation build_perturbation(const PerturbationSpec& spec, int n, double beta);

// Scalar channel used for band scans; resolves channel -1 to the potential's
// periodic channel. Requires a diagonal periodic part.
ScalarField scan_channel_field(const Potential& pot, int channel);

struct ResolvedExperiment {
  ExperimentConfig cfg;
  Potential pot;
  double lambda0 = 0.0;
  std::optional<Perturbation> pert;
  const Perturbation* pert_ptr() const { return pert ? &*pert : nullptr; }
};

// Builds the potential, resolves lambda0 (band scan when not pinned) and the
// perturbation. The matching config inside the result carries `threads`.
ResolvedExperiment resolve(const ExperimentConfig& cfg, int threads = 1);

}  // namespace floqem
