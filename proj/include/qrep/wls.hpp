#pragma once

#include <Eigen/Dense>

#include "qrep/fit.hpp"

namespace qrep::wls {

// Per-group sample quantiles at the given level, in group order.
Eigen::VectorXd conditional_quantiles(const ReplicatedDesign& design, QuantileLevel tau);

// Weighted least squares of the conditional quantiles on the covariate rows,
// weights 1/diag. Solved by QR on the rescaled system; covariance is
// (X' W X)^-1 with no degrees-of-freedom correction.
QuantileFit wls_fit(const ReplicatedDesign& design, QuantileLevel tau,
                    const quantile::WeightMatrix& w);

// conditional_quantiles -> sparsity -> weight_matrix -> wls_fit, recording the
// sparsity estimates used.
QuantileFit wls_pipeline(const ReplicatedDesign& design, QuantileLevel tau,
                         const PipelineOptions& opt = {});

}  // namespace qrep::wls
