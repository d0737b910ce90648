#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "qrep/fit.hpp"

namespace qrep::kb {

// Flattened check-loss problem: one row per observation.
struct CheckLossProblem {
  Eigen::MatrixXd x;  // n rows, p+1 columns
  Eigen::VectorXd y;
  double tau = 0.5;
};

CheckLossProblem flatten(const ReplicatedDesign& design, QuantileLevel tau);

struct SolveOptions {
  std::int64_t max_iterations = 0;  // 0 means the default cap of 50 * n
};

struct SolveInfo {
  Eigen::VectorXd dual;             // one multiplier per row, in [tau-1, tau] at optimum
  std::vector<Eigen::Index> tight;  // rows the returned vertex fits exactly
  std::int64_t iterations = 0;
  double objective = 0.0;
};

// Exact minimizer of sum_j rho_tau(y_j - x_j'beta) by primal simplex on the
// u/v split, lowest-index (Bland) pivoting from the all-zero coefficient
// start. Ties over a degenerate optimal face resolve by sliding to the vertex
// minimizing the total fitted value, which reproduces the smallest-minimizer
// convention of the sample quantile in the intercept-only case. Returns the
// point estimate only; covariance comes from kb_pipeline / kb_covariance.
QuantileFit kb_fit(const CheckLossProblem& problem, SolveInfo* info = nullptr,
                   const SolveOptions& opt = {});

// Plug-in sandwich covariance tau(1-tau)/n * D1^-1 D0 D1^-1 with group
// densities 1/s_i taken from the sparsity estimates.
Eigen::MatrixXd kb_covariance(const ReplicatedDesign& design,
                              const quantile::SparsityEstimates& s, QuantileLevel tau);

// flatten -> kb_fit, then the sandwich covariance from the same sparsity
// estimation the weighted estimator uses.
QuantileFit kb_pipeline(const ReplicatedDesign& design, QuantileLevel tau,
                        const PipelineOptions& opt = {});

}  // namespace qrep::kb
