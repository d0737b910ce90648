#pragma once

#include <cstddef>

namespace qrep::kernels {

// Data-parallel primitives behind the estimator inner loops. Each op has a
// scalar reference implementation and an AVX2 variant; the two are bit
// identical by construction (same 4-lane partial-sum order in reductions,
// same fma sequences elementwise), so runtime dispatch never changes results.
struct Ops {
  // sum_i u_i * (tau - [u_i < 0])
  double (*check_loss_sum)(const double* u, std::size_t n, double tau);
  // standard normal inverse CDF, elementwise; NaN outside (0,1)
  void (*normal_icdf)(const double* p, double* z, std::size_t n);
  // y += a * x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  double (*dot)(const double* x, const double* y, std::size_t n);
  const char* name;
};

const Ops& scalar_ops() noexcept;

// Compiled in and supported by the CPU at runtime.
bool avx2_available() noexcept;
const Ops& avx2_ops() noexcept;  // only meaningful when avx2_available()

// Backend chosen once at first use. QREP_KERNELS=scalar|avx2 overrides the
// auto pick; an unsupported request falls back to scalar with a stderr note.
const Ops& active() noexcept;

// Scalar one-off helpers (same AS241-based inverse CDF as the batch op).
double normal_icdf(double p) noexcept;
double normal_cdf(double z) noexcept;
double normal_pdf(double z) noexcept;

}  // namespace qrep::kernels
