#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "qrep/design.hpp"

using qrep::Observation;
using qrep::ReplicatedDesign;

namespace {

std::vector<Observation> raw_rows() {
  // three distinct profiles interleaved, first appearance order b, a, c
  return {
      {{1.0, 2.0}, 10.0}, {{1.0, 1.0}, 20.0}, {{1.0, 2.0}, 11.0},
      {{1.0, 3.0}, 30.0}, {{1.0, 1.0}, 21.0}, {{1.0, 2.0}, 12.0},
  };
}

}  // namespace

TEST_CASE("grouping keeps first appearance order and replicate order") {
  const auto d = qrep::group_by_covariates(raw_rows());
  REQUIRE(d.groups() == 3);
  REQUIRE(d.dim() == 2);
  CHECK(d.x(0, 1) == 2.0);
  CHECK(d.x(1, 1) == 1.0);
  CHECK(d.x(2, 1) == 3.0);
  CHECK(d.responses[0] == std::vector<double>{10.0, 11.0, 12.0});
  CHECK(d.responses[1] == std::vector<double>{20.0, 21.0});
  CHECK(d.responses[2] == std::vector<double>{30.0});
  CHECK(d.total_obs() == 6);
  CHECK(d.group_sizes() == std::vector<std::int64_t>{3, 2, 1});
}

TEST_CASE("grouping a grouped design changes nothing") {
  const auto d = qrep::group_by_covariates(raw_rows());
  std::vector<Observation> again;
  for (Eigen::Index i = 0; i < d.groups(); ++i) {
    for (double y : d.responses[static_cast<std::size_t>(i)]) {
      Observation o;
      o.x = {d.x(i, 0), d.x(i, 1)};
      o.y = y;
      again.push_back(std::move(o));
    }
  }
  const auto d2 = qrep::group_by_covariates(again);
  CHECK(d2.x == d.x);
  CHECK(d2.responses == d.responses);
}

TEST_CASE("grouping keys are bitwise") {
  const double a = 0.1;
  const double b = std::nextafter(a, 1.0);
  std::vector<Observation> rows = {{{1.0, a}, 1.0}, {{1.0, b}, 2.0}};
  CHECK(qrep::group_by_covariates(rows).groups() == 2);
}

TEST_CASE("validation accepts a healthy replicated design") {
  auto d = qrep::group_by_covariates({
      {{1.0, 1.0}, 1.0}, {{1.0, 1.0}, 2.0},
      {{1.0, 2.0}, 3.0}, {{1.0, 2.0}, 4.0},
      {{1.0, 3.0}, 5.0}, {{1.0, 3.0}, 6.0},
  });
  CHECK_NOTHROW(qrep::validate_design(d, true));
}

TEST_CASE("validation rejects single-replicate groups only when replicates are required") {
  auto d = qrep::group_by_covariates({
      {{1.0, 1.0}, 1.0}, {{1.0, 1.0}, 2.0}, {{1.0, 2.0}, 3.0},
  });
  CHECK_NOTHROW(qrep::validate_design(d, false));
  try {
    qrep::validate_design(d, true);
    FAIL("expected an error");
  } catch (const qrep::error& e) {
    CHECK(e.kind() == qrep::errc::no_replicates);
  }
}

TEST_CASE("validation rejects fewer groups than coefficients") {
  auto d = qrep::group_by_covariates({{{1.0, 1.0}, 1.0}, {{1.0, 1.0}, 2.0}});
  try {
    qrep::validate_design(d, false);
    FAIL("expected an error");
  } catch (const qrep::error& e) {
    CHECK(e.kind() == qrep::errc::too_few_groups);
  }
}

TEST_CASE("validation rejects rank-deficient designs") {
  // second column is 2x the first
  auto d = qrep::group_by_covariates({
      {{1.0, 2.0}, 1.0}, {{2.0, 4.0}, 2.0}, {{3.0, 6.0}, 3.0},
  });
  try {
    qrep::validate_design(d, false);
    FAIL("expected an error");
  } catch (const qrep::error& e) {
    CHECK(e.kind() == qrep::errc::rank_deficient);
  }
}

TEST_CASE("validation rejects non-finite values") {
  auto d = qrep::group_by_covariates({
      {{1.0, 1.0}, 1.0}, {{1.0, 2.0}, std::numeric_limits<double>::quiet_NaN()},
      {{1.0, 3.0}, 3.0},
  });
  try {
    qrep::validate_design(d, false);
    FAIL("expected an error");
  } catch (const qrep::error& e) {
    CHECK(e.kind() == qrep::errc::non_finite);
  }
}

TEST_CASE("quantile level validates its range") {
  CHECK(qrep::QuantileLevel(0.5).value() == 0.5);
  CHECK_THROWS_AS(qrep::QuantileLevel(0.0), qrep::error);
  CHECK_THROWS_AS(qrep::QuantileLevel(1.0), qrep::error);
  CHECK_THROWS_AS(qrep::QuantileLevel(-0.1), qrep::error);
  CHECK_THROWS_AS(qrep::QuantileLevel(std::numeric_limits<double>::quiet_NaN()), qrep::error);
}

TEST_CASE("error kinds split into validation and numerical classes") {
  CHECK(qrep::is_validation_error(qrep::errc::too_few_groups));
  CHECK(qrep::is_validation_error(qrep::errc::parse_error));
  CHECK_FALSE(qrep::is_validation_error(qrep::errc::singular_system));
  CHECK_FALSE(qrep::is_validation_error(qrep::errc::max_iterations));
}
