#pragma once

#include <Eigen/Dense>
#include <optional>

#include "qrep/quantile.hpp"

namespace qrep {

enum class Method { wls, kb };

struct QuantileFit {
  double tau = 0.0;
  Method method = Method::wls;
  Eigen::VectorXd beta;
  Eigen::MatrixXd covariance;   // 0x0 when the caller asked only for the point estimate
  Eigen::VectorXd std_errors;   // sqrt of the covariance diagonal, empty likewise
  std::optional<quantile::SparsityEstimates> sparsity;  // estimates behind the covariance
};

struct PipelineOptions {
  quantile::SparsityMethod sparsity = quantile::SparsityMethod::siddiqui_hs;
  double alpha = 0.05;
  quantile::WeightForm weight_form = quantile::WeightForm::squared_sparsity;
  bool strict_sparsity = false;  // raise on degenerate groups instead of flooring
};

}  // namespace qrep
