#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "qrep/fit.hpp"
#include "qrep/rng.hpp"

namespace qrep::sim {

// Group scale rule: eta_i = 1/x_i (heteroskedastic) or eta_i = 1.
enum class EtaRule { reciprocal, unit };

struct Scenario {
  int k = 5;                 // distinct covariate values
  int n0 = 200;              // replicates per group
  double tau = 0.5;
  EtaRule eta = EtaRule::reciprocal;
  std::array<double, 2> beta_true{1.0, 0.5};
  double gamma_shape = 2.0;  // covariate distribution
  double gamma_scale = 0.5;
  std::int64_t reps = 1000;
  std::uint64_t seed = 0;
  bool redraw_covariates = false;  // default: one covariate set per scenario
  PipelineOptions pipeline{};
};

struct ScenarioResult {
  Scenario scenario;
  std::array<double, 2> mse_wls{};  // over successful replications
  std::array<double, 2> mse_kb{};
  std::int64_t wls_failures = 0;
  std::int64_t kb_failures = 0;
};

// k gamma draws from the given stream, retried until strictly positive and
// pairwise distinct.
std::vector<double> draw_covariates(int k, double shape, double scale, rng::SeqStream& g);

// Covariate values for one scenario (rep only matters with redraw_covariates).
std::vector<double> draw_covariates(const Scenario& sc, std::uint64_t rep);

// The replicated design for one replication: responses are normal with group
// location beta0 + beta1 x_i - eta_i z_tau and scale eta_i, so the tau-th
// conditional quantile is exactly linear with the true coefficients.
ReplicatedDesign draw_responses(const Scenario& sc, const std::vector<double>& xs,
                                std::uint64_t rep);

// Runs all replications (thread pool sized by QREP_WORKERS or the hardware),
// fitting both estimators per replication and reducing squared errors in
// replication order; a failed fit counts into the failure tallies.
ScenarioResult run_scenario(const Scenario& sc);

struct GridAxes {
  std::vector<double> taus;
  std::vector<int> ks;
  std::vector<int> n0s;
  std::vector<EtaRule> etas;
};

// The full study grid: tau {0.1,...,0.9} x k {5,10,30} x n0 {50,...,500} x
// both scale rules.
GridAxes full_grid();

// Cartesian sweep in (tau, k, n0, eta) order, each cell with a sub-seed
// derived from (seed, cell index).
std::vector<ScenarioResult> run_grid(const GridAxes& axes, const Scenario& base);

int worker_count();

}  // namespace qrep::sim
