#include "qrep/kernels.hpp"

#include <cmath>
#include <cstddef>

#include "kernels_detail.hpp"

namespace qrep::kernels {

namespace {

// Reductions accumulate into four lane-strided partial sums and combine them
// as (s0+s1)+(s2+s3); the AVX2 backend does exactly the same, which is what
// makes the backends bit-identical.
double check_loss_sum_scalar(const double* u, std::size_t n, double tau) {
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t k = n & ~std::size_t(3);
  for (std::size_t i = 0; i < k; i += 4) {
    for (int l = 0; l < 4; ++l) {
      double x = u[i + l];
      acc[l] += x * (x < 0.0 ? tau - 1.0 : tau);
    }
  }
  for (std::size_t i = k; i < n; ++i) {
    double x = u[i];
    acc[i - k] += x * (x < 0.0 ? tau - 1.0 : tau);
  }
  return (acc[0] + acc[1]) + (acc[2] + acc[3]);
}

void normal_icdf_scalar(const double* p, double* z, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) z[i] = detail::icdf_scalar(p[i]);
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = std::fma(a, x[i], y[i]);
}

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t k = n & ~std::size_t(3);
  for (std::size_t i = 0; i < k; i += 4) {
    for (int l = 0; l < 4; ++l) acc[l] = std::fma(x[i + l], y[i + l], acc[l]);
  }
  for (std::size_t i = k; i < n; ++i) acc[i - k] = std::fma(x[i], y[i], acc[i - k]);
  return (acc[0] + acc[1]) + (acc[2] + acc[3]);
}

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

}  // namespace

const Ops& scalar_ops() noexcept {
  static const Ops ops = {check_loss_sum_scalar, normal_icdf_scalar, axpy_scalar,
                          dot_scalar, "scalar"};
  return ops;
}

double normal_icdf(double p) noexcept { return detail::icdf_scalar(p); }

double normal_cdf(double z) noexcept { return 0.5 * std::erfc(-z * kInvSqrt2); }

double normal_pdf(double z) noexcept {
  return kInvSqrt2Pi * std::exp(-0.5 * z * z);
}

}  // namespace qrep::kernels
