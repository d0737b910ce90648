#include <immintrin.h>

#include <cmath>
#include <cstddef>

#include "kernels_detail.hpp"
#include "qrep/kernels.hpp"

namespace qrep::kernels {

namespace {

inline __m256d horner8v(const double (&c)[8], __m256d r) {
  __m256d acc = _mm256_set1_pd(c[7]);
  acc = _mm256_fmadd_pd(acc, r, _mm256_set1_pd(c[6]));
  acc = _mm256_fmadd_pd(acc, r, _mm256_set1_pd(c[5]));
  acc = _mm256_fmadd_pd(acc, r, _mm256_set1_pd(c[4]));
  acc = _mm256_fmadd_pd(acc, r, _mm256_set1_pd(c[3]));
  acc = _mm256_fmadd_pd(acc, r, _mm256_set1_pd(c[2]));
  acc = _mm256_fmadd_pd(acc, r, _mm256_set1_pd(c[1]));
  acc = _mm256_fmadd_pd(acc, r, _mm256_set1_pd(c[0]));
  return acc;
}

double check_loss_sum_avx2(const double* u, std::size_t n, double tau) {
  const __m256d vzero = _mm256_setzero_pd();
  const __m256d vtau = _mm256_set1_pd(tau);
  const __m256d vtaum1 = _mm256_set1_pd(tau - 1.0);
  __m256d vacc = vzero;
  std::size_t k = n & ~std::size_t(3);
  for (std::size_t i = 0; i < k; i += 4) {
    __m256d x = _mm256_loadu_pd(u + i);
    __m256d neg = _mm256_cmp_pd(x, vzero, _CMP_LT_OQ);
    __m256d f = _mm256_blendv_pd(vtau, vtaum1, neg);
    vacc = _mm256_add_pd(vacc, _mm256_mul_pd(x, f));
  }
  alignas(32) double acc[4];
  _mm256_store_pd(acc, vacc);
  for (std::size_t i = k; i < n; ++i) {
    double x = u[i];
    acc[i - k] += x * (x < 0.0 ? tau - 1.0 : tau);
  }
  return (acc[0] + acc[1]) + (acc[2] + acc[3]);
}

void normal_icdf_avx2(const double* p, double* z, std::size_t n) {
  const __m256d vhalf = _mm256_set1_pd(0.5);
  const __m256d vr0 = _mm256_set1_pd(0.180625);
  const __m256d vcut = _mm256_set1_pd(0.425);
  const __m256d vabsmask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
  std::size_t k = n & ~std::size_t(3);
  for (std::size_t i = 0; i < k; i += 4) {
    __m256d vp = _mm256_loadu_pd(p + i);
    __m256d q = _mm256_sub_pd(vp, vhalf);
    __m256d r = _mm256_sub_pd(vr0, _mm256_mul_pd(q, q));
    __m256d central =
        _mm256_mul_pd(q, _mm256_div_pd(horner8v(detail::kA, r), horner8v(detail::kB, r)));
    __m256d inrange = _mm256_cmp_pd(_mm256_and_pd(q, vabsmask), vcut, _CMP_LE_OQ);
    _mm256_storeu_pd(z + i, central);
    int lanes = _mm256_movemask_pd(inrange);
    if (lanes != 0xf) {
      for (int l = 0; l < 4; ++l)
        if (!(lanes & (1 << l))) z[i + l] = detail::icdf_scalar(p[i + l]);
    }
  }
  for (std::size_t i = k; i < n; ++i) z[i] = detail::icdf_scalar(p[i]);
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t k = n & ~std::size_t(3);
  for (std::size_t i = 0; i < k; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
    _mm256_storeu_pd(y + i, vy);
  }
  for (std::size_t i = k; i < n; ++i) y[i] = std::fma(a, x[i], y[i]);
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d vacc = _mm256_setzero_pd();
  std::size_t k = n & ~std::size_t(3);
  for (std::size_t i = 0; i < k; i += 4) {
    vacc = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), vacc);
  }
  alignas(32) double acc[4];
  _mm256_store_pd(acc, vacc);
  for (std::size_t i = k; i < n; ++i) acc[i - k] = std::fma(x[i], y[i], acc[i - k]);
  return (acc[0] + acc[1]) + (acc[2] + acc[3]);
}

}  // namespace

const Ops& avx2_ops() noexcept {
  static const Ops ops = {check_loss_sum_avx2, normal_icdf_avx2, axpy_avx2,
                          dot_avx2, "avx2"};
  return ops;
}

}  // namespace qrep::kernels
