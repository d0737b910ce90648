#include "qrep/wls.hpp"

#include <cmath>

namespace qrep::wls {

Eigen::VectorXd conditional_quantiles(const ReplicatedDesign& design, QuantileLevel tau) {
  const Eigen::Index k = design.groups();
  Eigen::VectorXd q(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    q(i) = quantile::sample_quantile(design.responses[static_cast<std::size_t>(i)], tau);
  }
  return q;
}

QuantileFit wls_fit(const ReplicatedDesign& design, QuantileLevel tau,
                    const quantile::WeightMatrix& w) {
  validate_design(design, false);
  const Eigen::Index k = design.groups();
  const Eigen::Index p1 = design.dim();
  if (w.diag.size() != k) {
    raise(errc::invalid_argument, "weight diagonal does not match the design's group count");
  }
  for (Eigen::Index i = 0; i < k; ++i) {
    if (!(w.diag(i) > 0.0) || !std::isfinite(w.diag(i))) {
      raise(errc::non_finite, "weight diagonal must be strictly positive and finite");
    }
  }

  const Eigen::VectorXd q = conditional_quantiles(design, tau);
  const Eigen::VectorXd sw = w.diag.cwiseInverse().cwiseSqrt();
  const Eigen::MatrixXd a = sw.asDiagonal() * design.x;
  const Eigen::VectorXd b = sw.cwiseProduct(q);

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  qr.setThreshold(1e-10);
  if (qr.rank() < p1) {
    raise(errc::singular_system, "weighted design matrix is numerically singular");
  }

  QuantileFit fit;
  fit.tau = tau.value();
  fit.method = Method::wls;
  fit.beta = qr.solve(b);

  // (X' W X)^-1 from the R factor: A P = Q R implies (A'A)^-1 = P R^-1 R^-T P'.
  Eigen::MatrixXd rinv = qr.matrixQR()
                             .topRows(p1)
                             .triangularView<Eigen::Upper>()
                             .solve(Eigen::MatrixXd::Identity(p1, p1));
  Eigen::MatrixXd cov = qr.colsPermutation() * (rinv * rinv.transpose()) *
                        qr.colsPermutation().transpose();
  cov = ((cov + cov.transpose()) / 2.0).eval();
  fit.covariance = cov;
  fit.std_errors.resize(p1);
  for (Eigen::Index j = 0; j < p1; ++j) {
    if (!(cov(j, j) >= 0.0)) {
      raise(errc::not_positive_definite, "covariance diagonal went negative");
    }
    fit.std_errors(j) = std::sqrt(cov(j, j));
  }
  return fit;
}

QuantileFit wls_pipeline(const ReplicatedDesign& design, QuantileLevel tau,
                         const PipelineOptions& opt) {
  validate_design(design, true);
  auto s = quantile::estimate_sparsity(design, tau, opt.sparsity, opt.alpha, opt.strict_sparsity);
  auto w = quantile::weight_matrix(design, tau, s, opt.weight_form);
  QuantileFit fit = wls_fit(design, tau, w);
  fit.sparsity = std::move(s);
  return fit;
}

}  // namespace qrep::wls
