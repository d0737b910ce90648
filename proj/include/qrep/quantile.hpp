#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "qrep/design.hpp"

namespace qrep::quantile {

// rho_tau(u) = u * (tau - [u < 0])
double check_loss(double u, QuantileLevel tau) noexcept;

// Smallest minimizer of sum_j rho_tau(y_j - q): the order statistic with
// 1-based index ceil(n*tau), or n*tau itself when the double product is an
// exact integer. Always an element of the sample.
double sample_quantile(std::span<const double> y, QuantileLevel tau);

// Same index rule applied to pre-sorted data at level t; t outside (0,1)
// clamps to the extreme order statistics.
double sorted_quantile(std::span<const double> sorted_y, double t);

// Bandwidth for the Siddiqui difference quotient under a Gaussian reference
// model, clamped so tau +/- h stays inside [1/(2n), 1 - 1/(2n)] whenever that
// interval admits it.
double hall_sheather_bandwidth(std::int64_t n, QuantileLevel tau, double alpha);

enum class SparsityMethod { siddiqui_hs, kernel_plugin };

struct SparsityValue {
  double value = 0.0;      // floored at s_min = 1e-8 * response range (or 1e-8)
  double bandwidth = 0.0;  // Siddiqui level offset h, or KDE width for the plug-in
  bool degenerate = false; // floor applied (e.g. numerically identical responses)
};

// Difference quotient [q(tau+h) - q(tau-h)] / (2h) on the sample quantiles.
SparsityValue siddiqui_sparsity(std::span<const double> y, QuantileLevel tau, double h);

// Reciprocal of a Gaussian KDE evaluated at the sample quantile, width by
// Silverman's rule 0.9 * min(sd, IQR/1.34) * n^(-1/5) with zero-spread
// fallbacks between the two scale measures.
SparsityValue kernel_plugin_sparsity(std::span<const double> y, QuantileLevel tau);

struct SparsityEstimates {
  double tau = 0.0;
  SparsityMethod method = SparsityMethod::siddiqui_hs;
  double alpha = 0.0;              // Hall-Sheather level (Siddiqui only)
  Eigen::VectorXd s_hat;           // one per group, strictly positive
  Eigen::VectorXd bandwidths;
  std::vector<char> degenerate;    // per-group floor flags
};

// Per-group sparsity for a replicated design. With strict set, a degenerate
// group raises instead of carrying the floored value.
SparsityEstimates estimate_sparsity(const ReplicatedDesign& design, QuantileLevel tau,
                                    SparsityMethod method, double alpha,
                                    bool strict = false);

// Diagonal of the heteroskedastic variance model for group sample quantiles.
enum class WeightForm { squared_sparsity, linear_sparsity };

struct WeightMatrix {
  Eigen::VectorXd diag;  // k entries, strictly positive and finite
};

WeightMatrix weight_matrix(const ReplicatedDesign& design, QuantileLevel tau,
                           const SparsityEstimates& s,
                           WeightForm form = WeightForm::squared_sparsity);

}  // namespace qrep::quantile
