#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "qrep/errors.hpp"

namespace qrep {

// Quantile level, validated to lie strictly inside (0,1).
class QuantileLevel {
 public:
  explicit QuantileLevel(double tau);
  double value() const noexcept { return tau_; }

 private:
  double tau_;
};

// One raw observation: covariate vector (intercept included) and response.
struct Observation {
  std::vector<double> x;
  double y = 0.0;
};

// k distinct covariate rows, each with a vector of replicate responses.
// Row i of x pairs with responses[i]; group order is first appearance.
struct ReplicatedDesign {
  Eigen::MatrixXd x;                           // k rows, p+1 columns
  std::vector<std::vector<double>> responses;  // k entries, n_i >= 1 each

  Eigen::Index groups() const noexcept { return x.rows(); }
  Eigen::Index dim() const noexcept { return x.cols(); }
  std::int64_t total_obs() const noexcept;
  std::vector<std::int64_t> group_sizes() const;
};

// Collapses raw rows into a ReplicatedDesign keyed on bitwise-identical
// covariate vectors, in first-appearance order.
ReplicatedDesign group_by_covariates(const std::vector<Observation>& rows);

// Checks finiteness, k >= p+1, full column rank (singular values relative to
// the largest, 1e-10 cutoff), and n_i >= 2 when require_replicates is set.
// Returns its argument to allow validated pass-through.
const ReplicatedDesign& validate_design(const ReplicatedDesign& design,
                                        bool require_replicates);

}  // namespace qrep
