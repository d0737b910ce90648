#include "qrep/asymptotics.hpp"

#include <cmath>
#include <string>

namespace qrep::asym {

namespace {

Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& m, const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) {
    raise(errc::not_positive_definite, std::string(what) + " is not positive definite");
  }
  Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(m.rows(), m.cols()));
  return ((inv + inv.transpose()) / 2.0).eval();
}

}  // namespace

MomentMatrices moment_matrices(const Eigen::MatrixXd& x, std::span<const std::int64_t> n_i,
                               std::span<const double> f) {
  const Eigen::Index k = x.rows();
  const Eigen::Index p1 = x.cols();
  if (k == 0 || p1 == 0) raise(errc::empty_sample, "moment matrices of an empty design");
  if (static_cast<Eigen::Index>(n_i.size()) != k || static_cast<Eigen::Index>(f.size()) != k) {
    raise(errc::invalid_argument, "group sizes and densities must match the design rows");
  }
  if (!x.allFinite()) raise(errc::non_finite, "design matrix has non-finite entries");

  MomentMatrices m;
  m.d0 = Eigen::MatrixXd::Zero(p1, p1);
  m.d1 = Eigen::MatrixXd::Zero(p1, p1);
  m.d2 = Eigen::MatrixXd::Zero(p1, p1);
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto ni = n_i[static_cast<std::size_t>(i)];
    const double fi = f[static_cast<std::size_t>(i)];
    if (ni < 1) raise(errc::invalid_argument, "group sizes must be at least 1");
    if (!(fi > 0.0) || !std::isfinite(fi)) {
      raise(errc::invalid_argument, "densities must be strictly positive and finite");
    }
    const Eigen::MatrixXd xxt =
        static_cast<double>(ni) * (x.row(i).transpose() * x.row(i));
    m.d0 += xxt;
    m.d1 += fi * xxt;
    m.d2 += (fi * fi) * xxt;
    m.n += ni;
  }
  m.d0 /= static_cast<double>(m.n);
  m.d1 /= static_cast<double>(m.n);
  m.d2 /= static_cast<double>(m.n);
  return m;
}

Eigen::MatrixXd covariance_kb(const MomentMatrices& m, QuantileLevel tau) {
  const double t = tau.value();
  Eigen::MatrixXd d1inv = spd_inverse(m.d1, "D1");
  Eigen::MatrixXd cov = t * (1.0 - t) * (d1inv * m.d0 * d1inv);
  return ((cov + cov.transpose()) / 2.0).eval();
}

Eigen::MatrixXd covariance_wls(const MomentMatrices& m, QuantileLevel tau) {
  const double t = tau.value();
  Eigen::MatrixXd cov = t * (1.0 - t) * spd_inverse(m.d2, "D2");
  return ((cov + cov.transpose()) / 2.0).eval();
}

Eigen::MatrixXd loewner_gap(const MomentMatrices& m) {
  Eigen::MatrixXd d0inv = spd_inverse(m.d0, "D0");
  Eigen::MatrixXd gap = m.d2 - m.d1 * d0inv * m.d1;
  return ((gap + gap.transpose()) / 2.0).eval();
}

double loewner_check(const MomentMatrices& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(loewner_gap(m));
  if (es.info() != Eigen::Success) {
    raise(errc::not_positive_definite, "eigendecomposition of the efficiency gap failed");
  }
  return es.eigenvalues().minCoeff();
}

bool lemma1_probe(const Eigen::MatrixXd& z_samples, const Eigen::MatrixXd& c,
                  double rel_tol) {
  if (c.rows() != c.cols()) raise(errc::invalid_argument, "probe matrix must be square");
  if (z_samples.cols() + 1 != c.rows()) {
    raise(errc::invalid_argument, "probe needs points of dimension one less than the matrix");
  }
  if (z_samples.rows() == 0) raise(errc::empty_sample, "probe needs at least one point");
  const double cscale = c.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < z_samples.rows(); ++i) {
    Eigen::VectorXd v(c.rows());
    v(0) = 1.0;
    v.tail(z_samples.cols()) = z_samples.row(i).transpose();
    const Eigen::VectorXd w = c * v;
    const double lambda = v.dot(w) / v.squaredNorm();
    const double resid = (w - lambda * v).norm();
    const double scale = std::max(w.norm(), cscale * v.norm());
    if (resid > rel_tol * std::max(scale, 1e-300)) return false;
  }
  return true;
}

AsymptoticReport make_report(const Eigen::MatrixXd& x, std::span<const std::int64_t> n_i,
                             std::span<const double> f, QuantileLevel tau) {
  AsymptoticReport rep;
  rep.moment = moment_matrices(x, n_i, f);
  rep.cov_kb = covariance_kb(rep.moment, tau);
  rep.cov_wls = covariance_wls(rep.moment, tau);
  rep.loewner_gap_min_eig = loewner_check(rep.moment);
  double fmin = f[0], fmax = f[0];
  for (double fi : f) {
    fmin = std::min(fmin, fi);
    fmax = std::max(fmax, fi);
  }
  rep.equal_sparsity = (fmax - fmin) <= 1e-10 * fmax;
  return rep;
}

}  // namespace qrep::asym
