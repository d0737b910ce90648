#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "qrep/quantile.hpp"

using qrep::QuantileLevel;
namespace qq = qrep::quantile;

namespace {

double loss_sum(const std::vector<double>& y, double q, QuantileLevel tau) {
  double s = 0.0;
  for (double v : y) s += qq::check_loss(v - q, tau);
  return s;
}

qrep::ReplicatedDesign two_group_design(std::size_t n1, std::size_t n2) {
  std::vector<qrep::Observation> rows;
  std::mt19937_64 g(11);
  std::normal_distribution<double> z;
  for (std::size_t j = 0; j < n1; ++j) rows.push_back({{1.0, 0.0}, z(g)});
  for (std::size_t j = 0; j < n2; ++j) rows.push_back({{1.0, 1.0}, 2.0 + z(g)});
  return qrep::group_by_covariates(rows);
}

}  // namespace

TEST_CASE("check loss values") {
  QuantileLevel t(0.3);
  CHECK(qq::check_loss(0.0, t) == 0.0);
  CHECK(qq::check_loss(2.0, t) == doctest::Approx(0.6));
  CHECK(qq::check_loss(-2.0, t) == doctest::Approx(1.4));
}

TEST_CASE("sample quantile picks the smallest minimizer at integer index products") {
  std::vector<double> y{1.0, 2.0, 3.0, 4.0};
  CHECK(qq::sample_quantile(y, QuantileLevel(0.5)) == 2.0);
  CHECK(qq::sample_quantile(y, QuantileLevel(0.25)) == 1.0);
  std::vector<double> neg{-4.0, -3.0, -2.0, -1.0};
  CHECK(qq::sample_quantile(neg, QuantileLevel(0.5)) == -3.0);
}

TEST_CASE("sample quantile index rule around the integer boundary") {
  std::vector<double> y{10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
  CHECK(qq::sample_quantile(y, QuantileLevel(0.2)) == 20.0);
  CHECK(qq::sample_quantile(y, QuantileLevel(0.2 + 1e-9)) == 30.0);
  CHECK(qq::sample_quantile(y, QuantileLevel(0.2 - 1e-9)) == 20.0);
}

TEST_CASE("sample quantile is a global check loss minimizer over the sample") {
  std::mt19937_64 g(29);
  std::uniform_int_distribution<int> len(1, 60);
  std::uniform_int_distribution<int> val(-20, 20);
  for (int rep = 0; rep < 300; ++rep) {
    std::vector<double> y(static_cast<std::size_t>(len(g)));
    for (auto& v : y) v = val(g);
    const double tau = std::uniform_real_distribution<double>(0.05, 0.95)(g);
    QuantileLevel t(tau);
    const double q = qq::sample_quantile(y, t);
    CHECK(std::find(y.begin(), y.end(), q) != y.end());
    const double best = loss_sum(y, q, t);
    for (double m : y) {
      CHECK(loss_sum(y, m, t) >= best - 1e-9);
      // smallest minimizer: strictly smaller sample values lose strictly
      if (m < q) CHECK(loss_sum(y, m, t) > best + 1e-12);
    }
  }
}

TEST_CASE("sample quantile is monotone in the level and affine equivariant") {
  std::vector<double> y{5, -1, 3, 9, 2, 2, 8, -4, 0, 7, 1};
  double prev = -1e300;
  for (double tau : {0.05, 0.2, 0.35, 0.5, 0.65, 0.8, 0.95}) {
    const double q = qq::sample_quantile(y, QuantileLevel(tau));
    CHECK(q >= prev);
    prev = q;
    std::vector<double> ty(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) ty[i] = 0.5 * y[i] + 3.0;
    CHECK(qq::sample_quantile(ty, QuantileLevel(tau)) == 0.5 * q + 3.0);
  }
}

TEST_CASE("sample quantile rejects empty and non-finite input") {
  std::vector<double> empty;
  CHECK_THROWS_AS(qq::sample_quantile(empty, QuantileLevel(0.5)), qrep::error);
  std::vector<double> bad{1.0, std::nan("")};
  CHECK_THROWS_AS(qq::sample_quantile(bad, QuantileLevel(0.5)), qrep::error);
}

TEST_CASE("sorted quantile clamps levels outside the unit interval") {
  std::vector<double> y{1, 2, 3, 4, 5};
  CHECK(qq::sorted_quantile(y, -0.2) == 1.0);
  CHECK(qq::sorted_quantile(y, 0.0) == 1.0);
  CHECK(qq::sorted_quantile(y, 1.0) == 5.0);
  CHECK(qq::sorted_quantile(y, 1.3) == 5.0);
  CHECK(qq::sorted_quantile(y, 0.5) == 3.0);
}

TEST_CASE("bandwidth matches reference evaluations when the clamp is inactive") {
  CHECK(qq::hall_sheather_bandwidth(100, QuantileLevel(0.5), 0.05) ==
        doctest::Approx(0.209316046947003225398).epsilon(1e-12));
  CHECK(qq::hall_sheather_bandwidth(50, QuantileLevel(0.3), 0.05) ==
        doctest::Approx(0.207918431076477906286).epsilon(1e-12));
  CHECK(qq::hall_sheather_bandwidth(200, QuantileLevel(0.9), 0.05) ==
        doctest::Approx(0.0591642487239844674691).epsilon(1e-12));
  CHECK(qq::hall_sheather_bandwidth(100000, QuantileLevel(0.5), 0.05) ==
        doctest::Approx(0.0209316046947003225398).epsilon(1e-12));
}

TEST_CASE("bandwidth clamps toward the nearer tail and falls back at the boundary") {
  // raw value 0.016228 exceeds the distance to the upper tail bound
  CHECK(qq::hall_sheather_bandwidth(81, QuantileLevel(0.99), 0.05) ==
        doctest::Approx((1.0 - 0.5 / 81.0) - 0.99).epsilon(1e-12));
  // tau sits exactly on the bound, leaving no admissible window
  CHECK(qq::hall_sheather_bandwidth(50, QuantileLevel(0.99), 0.05) ==
        doctest::Approx(0.01).epsilon(1e-14));
}

TEST_CASE("bandwidth always leaves tau plus or minus h inside the unit interval") {
  for (std::int64_t n : {5, 20, 100, 1000, 100000}) {
    for (double tau : {0.01, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99}) {
      const double h = qq::hall_sheather_bandwidth(n, QuantileLevel(tau), 0.05);
      CHECK(h > 0.0);
      CHECK(tau - h >= 0.0);
      CHECK(tau + h <= 1.0);
    }
  }
}

TEST_CASE("difference quotient sparsity recovers known reciprocal densities") {
  std::mt19937_64 g(101);
  const std::size_t n = 100000;
  std::vector<double> y(n);

  std::normal_distribution<double> z;
  for (auto& v : y) v = z(g);
  double h = qq::hall_sheather_bandwidth(static_cast<std::int64_t>(n), QuantileLevel(0.5), 0.05);
  auto s = qq::siddiqui_sparsity(y, QuantileLevel(0.5), h);
  CHECK_FALSE(s.degenerate);
  CHECK(s.value == doctest::Approx(2.50662827463100050242).epsilon(0.05));

  std::uniform_real_distribution<double> u;
  for (auto& v : y) v = u(g);
  h = qq::hall_sheather_bandwidth(static_cast<std::int64_t>(n), QuantileLevel(0.3), 0.05);
  s = qq::siddiqui_sparsity(y, QuantileLevel(0.3), h);
  CHECK(s.value == doctest::Approx(1.0).epsilon(0.05));

  std::exponential_distribution<double> e;
  for (auto& v : y) v = e(g);
  h = qq::hall_sheather_bandwidth(static_cast<std::int64_t>(n), QuantileLevel(0.3), 0.05);
  s = qq::siddiqui_sparsity(y, QuantileLevel(0.3), h);
  CHECK(s.value == doctest::Approx(1.0 / 0.7).epsilon(0.07));
}

TEST_CASE("kernel plug-in sparsity recovers known reciprocal densities") {
  std::mt19937_64 g(202);
  const std::size_t n = 100000;
  std::vector<double> y(n);

  std::normal_distribution<double> z;
  for (auto& v : y) v = z(g);
  auto s = qq::kernel_plugin_sparsity(y, QuantileLevel(0.5));
  CHECK_FALSE(s.degenerate);
  CHECK(s.value == doctest::Approx(2.50662827463100050242).epsilon(0.05));

  std::uniform_real_distribution<double> u;
  for (auto& v : y) v = u(g);
  s = qq::kernel_plugin_sparsity(y, QuantileLevel(0.3));
  CHECK(s.value == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("constant samples floor the sparsity and flag degeneracy") {
  std::vector<double> y(40, 5.0);
  auto s = qq::siddiqui_sparsity(y, QuantileLevel(0.5), 0.1);
  CHECK(s.degenerate);
  CHECK(s.value == 1e-8);
  s = qq::kernel_plugin_sparsity(y, QuantileLevel(0.5));
  CHECK(s.degenerate);
  CHECK(s.value == 1e-8);
}

TEST_CASE("per-group estimation carries flags and the strict mode raises") {
  auto d = two_group_design(50, 60);
  d.responses[1].assign(60, 7.0);  // make the second group constant
  auto s = qq::estimate_sparsity(d, QuantileLevel(0.5), qq::SparsityMethod::siddiqui_hs, 0.05);
  REQUIRE(s.s_hat.size() == 2);
  CHECK_FALSE(s.degenerate[0]);
  CHECK(s.degenerate[1]);
  CHECK(s.s_hat(1) == 1e-8);
  try {
    qq::estimate_sparsity(d, QuantileLevel(0.5), qq::SparsityMethod::siddiqui_hs, 0.05, true);
    FAIL("expected an error");
  } catch (const qrep::error& e) {
    CHECK(e.kind() == qrep::errc::degenerate_sample);
  }
}

TEST_CASE("weight diagonal scales sparsity by the quantile variance factor") {
  qrep::ReplicatedDesign d;
  d.x.resize(2, 2);
  d.x << 1.0, 0.0, 1.0, 1.0;
  d.responses = {std::vector<double>(4, 0.0), std::vector<double>(9, 0.0)};

  qq::SparsityEstimates s;
  s.tau = 0.5;
  s.s_hat.resize(2);
  s.s_hat << 2.0, 3.0;
  s.bandwidths = Eigen::VectorXd::Zero(2);
  s.degenerate = {0, 0};

  auto w = qq::weight_matrix(d, QuantileLevel(0.5), s);
  REQUIRE(w.diag.size() == 2);
  CHECK(w.diag(0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(w.diag(1) == doctest::Approx(0.25).epsilon(1e-15));

  auto wl = qq::weight_matrix(d, QuantileLevel(0.5), s, qq::WeightForm::linear_sparsity);
  CHECK(wl.diag(0) == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(wl.diag(1) == doctest::Approx(0.25 * 3.0 / 9.0).epsilon(1e-15));
}
