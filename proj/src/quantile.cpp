#include "qrep/quantile.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qrep/kernels.hpp"

namespace qrep::quantile {

namespace {

void require_finite(std::span<const double> y) {
  for (double v : y) {
    if (!std::isfinite(v)) raise(errc::non_finite, "sample contains a non-finite value");
  }
}

// 0-based order-statistic index for level t on a sample of size n.
std::size_t quantile_index(std::size_t n, double t) {
  double u = static_cast<double>(n) * t;
  double idx = (u == std::floor(u)) ? u : std::ceil(u);
  if (idx < 1.0) idx = 1.0;
  if (idx > static_cast<double>(n)) idx = static_cast<double>(n);
  return static_cast<std::size_t>(idx) - 1;
}

double sparsity_floor(std::span<const double> y) {
  auto [lo, hi] = std::minmax_element(y.begin(), y.end());
  double range = *hi - *lo;
  return 1e-8 * (range > 0.0 ? range : 1.0);
}

}  // namespace

double check_loss(double u, QuantileLevel tau) noexcept {
  return u * (u < 0.0 ? tau.value() - 1.0 : tau.value());
}

double sample_quantile(std::span<const double> y, QuantileLevel tau) {
  if (y.empty()) raise(errc::empty_sample, "sample quantile of an empty sample");
  require_finite(y);
  std::vector<double> v(y.begin(), y.end());
  auto nth = v.begin() + static_cast<std::ptrdiff_t>(quantile_index(v.size(), tau.value()));
  std::nth_element(v.begin(), nth, v.end());
  return *nth;
}

double sorted_quantile(std::span<const double> sorted_y, double t) {
  if (sorted_y.empty()) raise(errc::empty_sample, "sample quantile of an empty sample");
  return sorted_y[quantile_index(sorted_y.size(), t)];
}

double hall_sheather_bandwidth(std::int64_t n, QuantileLevel tau, double alpha) {
  if (n < 1) raise(errc::empty_sample, "bandwidth for an empty sample");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    raise(errc::invalid_argument, "alpha must lie in (0,1), got " + std::to_string(alpha));
  }
  const double t = tau.value();
  const double za = kernels::normal_icdf(1.0 - alpha / 2.0);
  const double zt = kernels::normal_icdf(t);
  const double phi = kernels::normal_pdf(zt);
  const double core = 1.5 * phi * phi / (2.0 * zt * zt + 1.0);
  const double nn = static_cast<double>(n);
  double h = std::pow(nn, -1.0 / 3.0) * std::pow(za, 2.0 / 3.0) * std::cbrt(core);

  const double lo = 1.0 / (2.0 * nn);
  h = std::min(h, std::min(t - lo, (1.0 - lo) - t));
  if (h <= 0.0) h = std::min(lo, std::min(t, 1.0 - t));
  return h;
}

SparsityValue siddiqui_sparsity(std::span<const double> y, QuantileLevel tau, double h) {
  if (y.size() < 2) raise(errc::no_replicates, "sparsity estimation needs at least 2 responses");
  require_finite(y);
  if (!(h > 0.0)) raise(errc::invalid_argument, "bandwidth must be positive");
  std::vector<double> v(y.begin(), y.end());
  std::sort(v.begin(), v.end());
  const double hi = sorted_quantile(v, tau.value() + h);
  const double lo = sorted_quantile(v, tau.value() - h);
  const double raw = (hi - lo) / (2.0 * h);
  const double s_min = sparsity_floor(y);
  SparsityValue out;
  out.bandwidth = h;
  out.degenerate = !(raw >= s_min);
  out.value = out.degenerate ? s_min : raw;
  return out;
}

SparsityValue kernel_plugin_sparsity(std::span<const double> y, QuantileLevel tau) {
  if (y.size() < 2) raise(errc::no_replicates, "sparsity estimation needs at least 2 responses");
  require_finite(y);
  const std::size_t n = y.size();
  std::vector<double> v(y.begin(), y.end());
  std::sort(v.begin(), v.end());
  const double q = sorted_quantile(v, tau.value());

  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  const double iqr = sorted_quantile(v, 0.75) - sorted_quantile(v, 0.25);
  double spread = std::min(sd, iqr / 1.34);
  if (spread <= 0.0) spread = std::max(sd, iqr / 1.34);

  const double s_min = sparsity_floor(y);
  SparsityValue out;
  if (spread <= 0.0) {
    // zero spread on both measures: numerically constant sample
    out.value = s_min;
    out.degenerate = true;
    return out;
  }
  const double b = 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
  double fhat = 0.0;
  for (double x : v) fhat += kernels::normal_pdf((q - x) / b);
  fhat /= static_cast<double>(n) * b;
  const double raw = 1.0 / fhat;
  out.bandwidth = b;
  out.degenerate = !(raw >= s_min);
  out.value = out.degenerate ? s_min : raw;
  return out;
}

SparsityEstimates estimate_sparsity(const ReplicatedDesign& design, QuantileLevel tau,
                                    SparsityMethod method, double alpha, bool strict) {
  const Eigen::Index k = design.groups();
  SparsityEstimates out;
  out.tau = tau.value();
  out.method = method;
  out.alpha = alpha;
  out.s_hat.resize(k);
  out.bandwidths.resize(k);
  out.degenerate.assign(static_cast<std::size_t>(k), 0);
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto& g = design.responses[static_cast<std::size_t>(i)];
    SparsityValue v;
    if (method == SparsityMethod::siddiqui_hs) {
      double h = hall_sheather_bandwidth(static_cast<std::int64_t>(g.size()), tau, alpha);
      v = siddiqui_sparsity(g, tau, h);
    } else {
      v = kernel_plugin_sparsity(g, tau);
    }
    if (v.degenerate && strict) {
      raise(errc::degenerate_sample,
            "group " + std::to_string(i + 1) + " has numerically degenerate responses");
    }
    out.s_hat(i) = v.value;
    out.bandwidths(i) = v.bandwidth;
    out.degenerate[static_cast<std::size_t>(i)] = v.degenerate ? 1 : 0;
  }
  return out;
}

WeightMatrix weight_matrix(const ReplicatedDesign& design, QuantileLevel tau,
                           const SparsityEstimates& s, WeightForm form) {
  const Eigen::Index k = design.groups();
  if (s.s_hat.size() != k) {
    raise(errc::invalid_argument, "sparsity estimates do not match the design's group count");
  }
  const double t = tau.value();
  WeightMatrix w;
  w.diag.resize(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const double si = s.s_hat(i);
    const double ni = static_cast<double>(design.responses[static_cast<std::size_t>(i)].size());
    const double sfac = form == WeightForm::squared_sparsity ? si * si : si;
    w.diag(i) = t * (1.0 - t) * sfac / ni;
    if (!(w.diag(i) > 0.0) || !std::isfinite(w.diag(i))) {
      raise(errc::non_finite, "variance weight for group " + std::to_string(i + 1) +
                                  " is not positive and finite");
    }
  }
  return w;
}

}  // namespace qrep::quantile
