#include "qrep/kb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "qrep/asymptotics.hpp"
#include "qrep/kernels.hpp"

namespace qrep::kb {

namespace {

// Primal simplex for min tau 1'u + (1-tau) 1'v subject to X beta + u - v = y,
// u, v >= 0, beta free. A basis is |L| coefficient columns plus one of u_j /
// v_j on every non-tight row; the tight rows h (|h| = |L|) pair with the
// coefficient columns, so every basis solve reduces to the block X(h, L).
// Variables are ordered beta(0..p) < u(rows) < v(rows) for lowest-index
// pivoting. Coefficients enter at most p+1 times and never leave.
class Simplex {
 public:
  Simplex(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double tau,
          std::int64_t max_iter)
      : x_(x),
        y_(y),
        tau_(tau),
        n_(x.rows()),
        p1_(x.cols()),
        max_iter_(max_iter),
        in_l_(static_cast<std::size_t>(p1_), 0),
        in_h_(static_cast<std::size_t>(n_), 0),
        side_(static_cast<std::size_t>(n_), 1) {
    colsum_ = x_.colwise().sum();
    colabs_ = x_.cwiseAbs().colwise().sum();
    yscale_ = y_.size() > 0 ? y_.cwiseAbs().maxCoeff() : 0.0;
    beta_ = Eigen::VectorXd::Zero(p1_);
    pi_.resize(n_);
    g_.resize(p1_);
    w_.resize(n_);
    z_.resize(n_);
  }

  void run() {
    for (Eigen::Index j = 0; j < n_; ++j) side_[static_cast<std::size_t>(j)] = y_(j) >= 0.0 ? 1 : -1;
    r_ = y_;
    for (;;) {
      if (iterations_ >= max_iter_) {
        raise(errc::max_iterations,
              "simplex exceeded " + std::to_string(max_iter_) + " pivots");
      }
      compute_duals();
      Entering e;
      if (find_strict(e)) {
        pivot(e);
        continue;
      }
      if (take_zero_slide()) continue;
      break;
    }
  }

  const Eigen::VectorXd& beta() const { return beta_; }
  const Eigen::VectorXd& residuals() const { return r_; }
  const Eigen::VectorXd& duals() const { return pi_; }
  const std::vector<Eigen::Index>& tight() const { return h_; }
  std::int64_t iterations() const { return iterations_; }

 private:
  enum class Kind { coef, upos, vneg };
  struct Entering {
    Kind kind = Kind::coef;
    Eigen::Index idx = 0;  // column for coef, row for upos/vneg
    double sigma = 1.0;
  };

  double tol_coef(Eigen::Index m) const { return 1e-12 * (1.0 + colabs_(m)); }
  double tol_uv() const { return 1e-10 * (1.0 + pi_max_); }

  void refresh_basis() {
    const auto t = static_cast<Eigen::Index>(l_.size());
    Eigen::MatrixXd xhl(t, t);
    for (Eigen::Index a = 0; a < t; ++a) {
      for (Eigen::Index b = 0; b < t; ++b) {
        xhl(a, b) = x_(h_[static_cast<std::size_t>(a)], l_[static_cast<std::size_t>(b)]);
      }
    }
    lu_.compute(xhl);
    lut_.compute(xhl.transpose());
    if (t > 0 && (!lu_.isInvertible() || !lut_.isInvertible())) {
      raise(errc::singular_system, "simplex basis became numerically singular");
    }
    beta_.setZero();
    if (t > 0) {
      Eigen::VectorXd yh(t);
      for (Eigen::Index a = 0; a < t; ++a) yh(a) = y_(h_[static_cast<std::size_t>(a)]);
      Eigen::VectorXd bl = lu_.solve(yh);
      for (Eigen::Index b = 0; b < t; ++b) beta_(l_[static_cast<std::size_t>(b)]) = bl(b);
    }
    r_.noalias() = y_ - x_ * beta_;
  }

  void compute_duals() {
    for (Eigen::Index j = 0; j < n_; ++j) {
      pi_(j) = in_h_[static_cast<std::size_t>(j)] ? 0.0
               : (side_[static_cast<std::size_t>(j)] > 0 ? tau_ : tau_ - 1.0);
    }
    const auto t = static_cast<Eigen::Index>(l_.size());
    g_.noalias() = x_.transpose() * pi_;
    if (t > 0) {
      Eigen::VectorXd rhs(t);
      for (Eigen::Index b = 0; b < t; ++b) rhs(b) = -g_(l_[static_cast<std::size_t>(b)]);
      Eigen::VectorXd ph = lut_.solve(rhs);
      for (Eigen::Index a = 0; a < t; ++a) {
        const Eigen::Index row = h_[static_cast<std::size_t>(a)];
        pi_(row) = ph(a);
        g_.noalias() += ph(a) * x_.row(row).transpose();
      }
    }
    pi_max_ = n_ > 0 ? pi_.cwiseAbs().maxCoeff() : 0.0;
  }

  bool find_strict(Entering& e) {
    for (Eigen::Index m = 0; m < p1_; ++m) {
      if (in_l_[static_cast<std::size_t>(m)]) continue;
      const double d = -g_(m);
      if (d < -tol_coef(m)) {
        e = {Kind::coef, m, +1.0};
        return true;
      }
      if (d > tol_coef(m)) {
        e = {Kind::coef, m, -1.0};
        return true;
      }
    }
    for (Eigen::Index row : h_) {
      if (tau_ - pi_(row) < -tol_uv()) {
        e = {Kind::upos, row, +1.0};
        return true;
      }
    }
    for (Eigen::Index row : h_) {
      if ((1.0 - tau_) + pi_(row) < -tol_uv()) {
        e = {Kind::vneg, row, +1.0};
        return true;
      }
    }
    return false;
  }

  // z = B^-1 (sigma * entering column), split into the coefficient block zb
  // and per-row rates for the basic u/v variables (stored in z_).
  void direction(const Entering& e, Eigen::VectorXd& zb) {
    const auto t = static_cast<Eigen::Index>(l_.size());
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(t);
    if (e.kind == Kind::coef) {
      for (Eigen::Index a = 0; a < t; ++a) {
        rhs(a) = e.sigma * x_(h_[static_cast<std::size_t>(a)], e.idx);
      }
    } else {
      const auto pos = std::lower_bound(h_.begin(), h_.end(), e.idx) - h_.begin();
      rhs(pos) = e.kind == Kind::upos ? e.sigma : -e.sigma;
    }
    zb = t > 0 ? lu_.solve(rhs).eval() : Eigen::VectorXd();
    w_.setZero();
    const auto& ops = kernels::active();
    for (Eigen::Index b = 0; b < t; ++b) {
      ops.axpy(zb(b), x_.col(l_[static_cast<std::size_t>(b)]).data(), w_.data(),
               static_cast<std::size_t>(n_));
    }
    for (Eigen::Index j = 0; j < n_; ++j) {
      if (in_h_[static_cast<std::size_t>(j)]) {
        z_(j) = 0.0;
        continue;
      }
      const double aj = e.kind == Kind::coef ? x_(j, e.idx) : 0.0;
      z_(j) = side_[static_cast<std::size_t>(j)] * (e.sigma * aj - w_(j));
    }
  }

  // Returns false when no basic variable blocks the entering direction.
  bool ratio_test(Eigen::Index& j_out, double& theta) {
    double zmax = 0.0;
    for (Eigen::Index j = 0; j < n_; ++j) {
      if (!in_h_[static_cast<std::size_t>(j)]) zmax = std::max(zmax, z_(j));
    }
    const double eps = 1e-11 * std::max(1.0, zmax);
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < n_; ++j) {
      if (in_h_[static_cast<std::size_t>(j)] || !(z_(j) > eps)) continue;
      const double value = std::max(side_[static_cast<std::size_t>(j)] * r_(j), 0.0);
      best = std::min(best, value / z_(j));
    }
    if (!std::isfinite(best)) return false;
    const double window = best + 1e-12 * (1.0 + best);
    Eigen::Index best_var = -1;
    for (Eigen::Index j = 0; j < n_; ++j) {
      if (in_h_[static_cast<std::size_t>(j)] || !(z_(j) > eps)) continue;
      const double value = std::max(side_[static_cast<std::size_t>(j)] * r_(j), 0.0);
      if (value / z_(j) > window) continue;
      const Eigen::Index var = side_[static_cast<std::size_t>(j)] > 0 ? p1_ + j : p1_ + n_ + j;
      if (best_var < 0 || var < best_var) {
        best_var = var;
        j_out = j;
      }
    }
    theta = best;
    return best_var >= 0;
  }

  void pivot(const Entering& e) {
    Eigen::VectorXd zb;
    direction(e, zb);
    Eigen::Index j_out = -1;
    double theta = 0.0;
    if (!ratio_test(j_out, theta)) {
      raise(errc::unbounded, "no blocking variable for an improving direction");
    }
    apply(e, j_out);
  }

  void apply(const Entering& e, Eigen::Index j_out) {
    if (e.kind == Kind::coef) {
      in_l_[static_cast<std::size_t>(e.idx)] = 1;
      l_.insert(std::lower_bound(l_.begin(), l_.end(), e.idx), e.idx);
    } else {
      in_h_[static_cast<std::size_t>(e.idx)] = 0;
      h_.erase(std::lower_bound(h_.begin(), h_.end(), e.idx));
      side_[static_cast<std::size_t>(e.idx)] = e.kind == Kind::upos ? 1 : -1;
    }
    in_h_[static_cast<std::size_t>(j_out)] = 1;
    h_.insert(std::lower_bound(h_.begin(), h_.end(), j_out), j_out);
    refresh_basis();
    ++iterations_;
  }

  // At a (tolerance-)optimal basis, complete the coefficient block and walk
  // zero-reduced-cost edges that strictly lower the total fitted value
  // sum_j x_j'beta. This pins the degenerate-tie vertex deterministically and
  // matches the smallest-minimizer convention of the sample quantile.
  bool take_zero_slide() {
    const double tol_s = 1e-8 * (1.0 + colsum_.cwiseAbs().maxCoeff());
    const double theta_eps = 1e-14 * (1.0 + yscale_);
    const auto t = static_cast<Eigen::Index>(l_.size());

    for (Eigen::Index m = 0; m < p1_; ++m) {
      if (in_l_[static_cast<std::size_t>(m)]) continue;
      // reduced cost is within tolerance of zero here (strict scan passed)
      Entering e{Kind::coef, m, +1.0};
      Eigen::VectorXd zb;
      direction(e, zb);
      double rate = colsum_(m);
      for (Eigen::Index b = 0; b < static_cast<Eigen::Index>(l_.size()); ++b) {
        rate -= colsum_(l_[static_cast<std::size_t>(b)]) * zb(b);
      }
      if (!(rate < -tol_s)) {
        // prefer the direction that lowers the total fitted value
        e.sigma = -1.0;
        direction(e, zb);
      }
      Eigen::Index j_out = -1;
      double theta = 0.0;
      if (!ratio_test(j_out, theta)) {
        e.sigma = -e.sigma;
        direction(e, zb);
        if (!ratio_test(j_out, theta)) {
          raise(errc::unbounded, "free coefficient unblocked in both directions");
        }
      }
      apply(e, j_out);
      return true;
    }

    if (t == 0) return false;
    for (int kind = 0; kind < 2; ++kind) {
      for (Eigen::Index row : h_) {
        const double d = kind == 0 ? tau_ - pi_(row) : (1.0 - tau_) + pi_(row);
        if (std::abs(d) > tol_uv()) continue;
        Entering e{kind == 0 ? Kind::upos : Kind::vneg, row, +1.0};
        Eigen::VectorXd zb;
        direction(e, zb);
        double rate = 0.0;
        for (Eigen::Index b = 0; b < static_cast<Eigen::Index>(l_.size()); ++b) {
          rate -= colsum_(l_[static_cast<std::size_t>(b)]) * zb(b);
        }
        if (!(rate < -tol_s)) continue;
        Eigen::Index j_out = -1;
        double theta = 0.0;
        if (!ratio_test(j_out, theta) || !(theta > theta_eps)) continue;
        apply(e, j_out);
        return true;
      }
    }
    return false;
  }

  const Eigen::MatrixXd& x_;
  const Eigen::VectorXd& y_;
  const double tau_;
  const Eigen::Index n_, p1_;
  const std::int64_t max_iter_;

  std::vector<Eigen::Index> l_, h_;
  std::vector<char> in_l_, in_h_;
  std::vector<signed char> side_;
  Eigen::VectorXd beta_, r_, pi_, g_, w_, z_, colsum_, colabs_;
  Eigen::FullPivLU<Eigen::MatrixXd> lu_, lut_;
  double pi_max_ = 0.0, yscale_ = 0.0;
  std::int64_t iterations_ = 0;
};

void validate_problem(const CheckLossProblem& problem) {
  const Eigen::Index n = problem.x.rows();
  const Eigen::Index p1 = problem.x.cols();
  if (n == 0 || p1 == 0) raise(errc::empty_sample, "check-loss problem has no rows or columns");
  if (problem.y.size() != n) {
    raise(errc::invalid_argument, "response length does not match the row count");
  }
  if (!problem.x.allFinite() || !problem.y.allFinite()) {
    raise(errc::non_finite, "check-loss problem has non-finite entries");
  }
  if (n < p1) {
    raise(errc::too_few_groups, "need at least as many observations as coefficients");
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(problem.x);
  qr.setThreshold(1e-10);
  if (qr.rank() < p1) raise(errc::rank_deficient, "design matrix is rank deficient");
}

}  // namespace

CheckLossProblem flatten(const ReplicatedDesign& design, QuantileLevel tau) {
  validate_design(design, false);
  CheckLossProblem p;
  p.tau = tau.value();
  const std::int64_t n = design.total_obs();
  p.x.resize(n, design.dim());
  p.y.resize(n);
  Eigen::Index row = 0;
  for (Eigen::Index i = 0; i < design.groups(); ++i) {
    for (double yv : design.responses[static_cast<std::size_t>(i)]) {
      p.x.row(row) = design.x.row(i);
      p.y(row) = yv;
      ++row;
    }
  }
  return p;
}

QuantileFit kb_fit(const CheckLossProblem& problem, SolveInfo* info, const SolveOptions& opt) {
  QuantileLevel tau(problem.tau);
  validate_problem(problem);
  const std::int64_t max_iter =
      opt.max_iterations > 0 ? opt.max_iterations : 50 * static_cast<std::int64_t>(problem.x.rows());

  Simplex s(problem.x, problem.y, problem.tau, max_iter);
  s.run();

  QuantileFit fit;
  fit.tau = problem.tau;
  fit.method = Method::kb;
  fit.beta = s.beta();
  if (info != nullptr) {
    info->dual = s.duals();
    info->tight = s.tight();
    info->iterations = s.iterations();
    info->objective = kernels::active().check_loss_sum(
        s.residuals().data(), static_cast<std::size_t>(s.residuals().size()), problem.tau);
  }
  return fit;
}

Eigen::MatrixXd kb_covariance(const ReplicatedDesign& design,
                              const quantile::SparsityEstimates& s, QuantileLevel tau) {
  if (s.s_hat.size() != design.groups()) {
    raise(errc::invalid_argument, "sparsity estimates do not match the design's group count");
  }
  const auto sizes = design.group_sizes();
  std::vector<double> f(static_cast<std::size_t>(design.groups()));
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = 1.0 / s.s_hat(static_cast<Eigen::Index>(i));
  auto m = asym::moment_matrices(design.x, sizes, f);
  return (asym::covariance_kb(m, tau) / static_cast<double>(m.n)).eval();
}

QuantileFit kb_pipeline(const ReplicatedDesign& design, QuantileLevel tau,
                        const PipelineOptions& opt) {
  validate_design(design, true);
  QuantileFit fit = kb_fit(flatten(design, tau));
  auto s = quantile::estimate_sparsity(design, tau, opt.sparsity, opt.alpha, opt.strict_sparsity);
  fit.covariance = kb_covariance(design, s, tau);
  fit.std_errors.resize(fit.covariance.rows());
  for (Eigen::Index j = 0; j < fit.covariance.rows(); ++j) {
    if (!(fit.covariance(j, j) >= 0.0)) {
      raise(errc::not_positive_definite, "covariance diagonal went negative");
    }
    fit.std_errors(j) = std::sqrt(fit.covariance(j, j));
  }
  fit.sparsity = std::move(s);
  return fit;
}

}  // namespace qrep::kb
