#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>

#include "qrep/design.hpp"

namespace qrep::asym {

// Weighted design moments D_m = n^-1 sum_i n_i f_i^m x_i x_i' for m = 0,1,2,
// where f_i is the conditional response density at the group quantile.
struct MomentMatrices {
  Eigen::MatrixXd d0, d1, d2;
  std::int64_t n = 0;
};

MomentMatrices moment_matrices(const Eigen::MatrixXd& x, std::span<const std::int64_t> n_i,
                               std::span<const double> f);

// Asymptotic covariance of the check-loss estimator: tau(1-tau) D1^-1 D0 D1^-1.
Eigen::MatrixXd covariance_kb(const MomentMatrices& m, QuantileLevel tau);

// Asymptotic covariance of the weighted quantile regression: tau(1-tau) D2^-1.
Eigen::MatrixXd covariance_wls(const MomentMatrices& m, QuantileLevel tau);

// Symmetrized D2 - D1 D0^-1 D1; positive semidefinite for every valid input,
// and zero exactly when all f_i coincide.
Eigen::MatrixXd loewner_gap(const MomentMatrices& m);

// Smallest eigenvalue of the gap (>= -tol * largest eigenvalue of D2 up to
// roundoff); the efficiency ordering of the two covariances follows from it.
double loewner_check(const MomentMatrices& m);

// True iff every augmented point (1, z_i')' is an eigenvector of c within
// rel_tol relative residual. For continuous points in general position this
// holds only when c is numerically a scalar multiple of the identity, which
// is the mechanism behind the equality case of the efficiency ordering.
bool lemma1_probe(const Eigen::MatrixXd& z_samples, const Eigen::MatrixXd& c,
                  double rel_tol = 1e-8);

struct AsymptoticReport {
  MomentMatrices moment;
  Eigen::MatrixXd cov_kb, cov_wls;
  double loewner_gap_min_eig = 0.0;
  bool equal_sparsity = false;  // all f_i equal within 1e-10 relative
};

AsymptoticReport make_report(const Eigen::MatrixXd& x, std::span<const std::int64_t> n_i,
                             std::span<const double> f, QuantileLevel tau);

}  // namespace qrep::asym
