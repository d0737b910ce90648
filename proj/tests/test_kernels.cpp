#include <cmath>
#include <cstring>
#include <random>
#include <vector>

#include "doctest.h"
#include "qrep/kernels.hpp"

using qrep::kernels::Ops;

namespace {

std::vector<double> random_probs(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::uniform_real_distribution<double> u(1e-6, 1.0 - 1e-6);
  std::vector<double> p(n);
  for (auto& v : p) v = u(g);
  return p;
}

std::vector<double> random_values(std::size_t n, std::uint64_t seed, double lo = -5.0,
                                  double hi = 5.0) {
  std::mt19937_64 g(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(g);
  return v;
}

bool bits_equal(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  return a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("normal icdf matches reference values") {
  struct Ref {
    double p, z;
  };
  // high-precision reference evaluations of the standard normal quantile
  const double p40 = 0x1p-40, p30 = 0x1p-30, p60 = 0x1p-60;
  const Ref refs[] = {
      {1e-12, -7.03448382530113192981},   {1e-9, -5.99780701500768687156},
      {1e-4, -3.71901648545568056439},    {0.025, -1.95996398454005423552},
      {0.2, -0.841621233572914205179},    {0.3, -0.524400512708040784038},
      {0.5, 0.0},                         {0.7, 0.524400512708040784038},
      {0.75, 0.674489750196081743202},    {0.975, 1.95996398454005423552},
      {0.99, 2.32634787404084110089},     {p40, -7.04770025666440872535},
      {p60, -8.77332116902755168185},     {1.0 - p40, 7.04770025666440872535},
      {1.0 - p30, 6.00935356553074389318},
  };
  for (const auto& r : refs) {
    const double z = qrep::kernels::normal_icdf(r.p);
    CHECK(z == doctest::Approx(r.z).epsilon(1e-14));
  }
}

TEST_CASE("normal icdf round trips through the cdf") {
  for (double p : {0.001, 0.02, 0.2, 0.5, 0.77, 0.975, 0.9999}) {
    const double z = qrep::kernels::normal_icdf(p);
    CHECK(qrep::kernels::normal_cdf(z) == doctest::Approx(p).epsilon(1e-12));
  }
}

TEST_CASE("normal icdf is odd about one half") {
  // exact dyadic p keeps 1-p free of representation slop in the deep tail
  for (double p : {0x1p-40, 1e-4, 0.07, 0.21, 0.33, 0.49}) {
    const double a = qrep::kernels::normal_icdf(p);
    const double b = qrep::kernels::normal_icdf(1.0 - p);
    CHECK(std::abs(a + b) <= 2e-13 * std::max(1.0, std::abs(a)));
  }
}

TEST_CASE("normal icdf rejects arguments outside the open unit interval") {
  CHECK(std::isnan(qrep::kernels::normal_icdf(0.0)));
  CHECK(std::isnan(qrep::kernels::normal_icdf(1.0)));
  CHECK(std::isnan(qrep::kernels::normal_icdf(-0.5)));
  CHECK(std::isnan(qrep::kernels::normal_icdf(1.5)));
}

TEST_CASE("normal pdf at zero") {
  CHECK(qrep::kernels::normal_pdf(0.0) == doctest::Approx(0.39894228040143267794).epsilon(1e-15));
}

TEST_CASE("check loss sum agrees with the direct loop") {
  const auto& ops = qrep::kernels::scalar_ops();
  for (std::size_t n : {0, 1, 2, 3, 5, 17, 64, 130}) {
    const auto u = random_values(n, 1000 + n);
    const double tau = 0.37;
    double direct = 0.0;
    for (double v : u) direct += v * (tau - (v < 0.0 ? 1.0 : 0.0));
    const double got = ops.check_loss_sum(u.data(), n, tau);
    CHECK(got == doctest::Approx(direct).epsilon(1e-12));
  }
}

TEST_CASE("dot and axpy agree with the direct loop") {
  const auto& ops = qrep::kernels::scalar_ops();
  const std::size_t n = 103;
  const auto a = random_values(n, 7);
  const auto b = random_values(n, 8);
  double direct = 0.0;
  for (std::size_t i = 0; i < n; ++i) direct += a[i] * b[i];
  CHECK(ops.dot(a.data(), b.data(), n) == doctest::Approx(direct).epsilon(1e-12));

  auto y = random_values(n, 9);
  auto y2 = y;
  ops.axpy(2.5, a.data(), y.data(), n);
  for (std::size_t i = 0; i < n; ++i) y2[i] = std::fma(2.5, a[i], y2[i]);
  CHECK(bits_equal(y, y2));
}

TEST_CASE("vector backend matches the scalar backend bit for bit") {
  if (!qrep::kernels::avx2_available()) {
    MESSAGE("vector backend unavailable on this host; skipping");
    return;
  }
  const auto& sc = qrep::kernels::scalar_ops();
  const auto& vx = qrep::kernels::avx2_ops();
  CHECK(std::strcmp(sc.name, vx.name) != 0);

  for (std::size_t n : {0, 1, 2, 3, 4, 5, 7, 8, 15, 16, 17, 63, 64, 65, 127, 257}) {
    auto p = random_probs(n, 42 + n);
    // exercise the tail branches too
    if (n > 3) {
      p[0] = 1e-300;
      p[1] = 1e-15;
      p[2] = 1.0 - 1e-12;
      p[3] = 0.425001;
    }
    std::vector<double> zs(n), zv(n);
    sc.normal_icdf(p.data(), zs.data(), n);
    vx.normal_icdf(p.data(), zv.data(), n);
    CHECK(bits_equal(zs, zv));

    const auto u = random_values(n, 77 + n);
    const double ls = sc.check_loss_sum(u.data(), n, 0.81);
    const double lv = vx.check_loss_sum(u.data(), n, 0.81);
    CHECK(std::memcmp(&ls, &lv, sizeof(double)) == 0);

    const auto b = random_values(n, 99 + n);
    const double ds = sc.dot(u.data(), b.data(), n);
    const double dv = vx.dot(u.data(), b.data(), n);
    CHECK(std::memcmp(&ds, &dv, sizeof(double)) == 0);

    auto ys = random_values(n, 5 + n);
    auto yv = ys;
    sc.axpy(-1.75, u.data(), ys.data(), n);
    vx.axpy(-1.75, u.data(), yv.data(), n);
    CHECK(bits_equal(ys, yv));
  }
}

TEST_CASE("active backend is one of the named implementations") {
  const Ops& act = qrep::kernels::active();
  const bool is_scalar = std::strcmp(act.name, "scalar") == 0;
  const bool is_avx2 = std::strcmp(act.name, "avx2") == 0;
  CHECK((is_scalar || is_avx2));
  if (is_avx2) CHECK(qrep::kernels::avx2_available());
}
