#include "qrep/design.hpp"

#include <cmath>
#include <cstring>
#include <map>
#include <string>

namespace qrep {

QuantileLevel::QuantileLevel(double tau) : tau_(tau) {
  if (!std::isfinite(tau) || !(tau > 0.0 && tau < 1.0)) {
    raise(errc::invalid_argument, "quantile level must lie strictly in (0,1), got " +
                                      std::to_string(tau));
  }
}

std::int64_t ReplicatedDesign::total_obs() const noexcept {
  std::int64_t n = 0;
  for (const auto& g : responses) n += static_cast<std::int64_t>(g.size());
  return n;
}

std::vector<std::int64_t> ReplicatedDesign::group_sizes() const {
  std::vector<std::int64_t> sizes;
  sizes.reserve(responses.size());
  for (const auto& g : responses) sizes.push_back(static_cast<std::int64_t>(g.size()));
  return sizes;
}

ReplicatedDesign group_by_covariates(const std::vector<Observation>& rows) {
  if (rows.empty()) raise(errc::empty_sample, "no observations to group");
  const std::size_t p1 = rows[0].x.size();
  if (p1 == 0) raise(errc::invalid_argument, "observations carry no covariates");

  // Bitwise key: identical groups must match exactly, no fuzzing.
  std::map<std::string, Eigen::Index> seen;
  std::vector<const std::vector<double>*> order;
  std::vector<std::vector<double>> responses;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.x.size() != p1) {
      raise(errc::parse_error, "observation " + std::to_string(r + 1) + " has " +
                                   std::to_string(row.x.size()) + " covariates, expected " +
                                   std::to_string(p1));
    }
    std::string key(reinterpret_cast<const char*>(row.x.data()), p1 * sizeof(double));
    auto [it, inserted] = seen.try_emplace(std::move(key), static_cast<Eigen::Index>(order.size()));
    if (inserted) {
      order.push_back(&row.x);
      responses.emplace_back();
    }
    responses[static_cast<std::size_t>(it->second)].push_back(row.y);
  }

  ReplicatedDesign d;
  d.x.resize(static_cast<Eigen::Index>(order.size()), static_cast<Eigen::Index>(p1));
  for (Eigen::Index i = 0; i < d.x.rows(); ++i) {
    for (Eigen::Index j = 0; j < d.x.cols(); ++j)
      d.x(i, j) = (*order[static_cast<std::size_t>(i)])[static_cast<std::size_t>(j)];
  }
  d.responses = std::move(responses);
  return d;
}

const ReplicatedDesign& validate_design(const ReplicatedDesign& design,
                                        bool require_replicates) {
  const Eigen::Index k = design.groups();
  const Eigen::Index p1 = design.dim();
  if (k == 0 || p1 == 0) raise(errc::empty_sample, "design has no rows or no columns");
  if (static_cast<std::size_t>(k) != design.responses.size()) {
    raise(errc::invalid_argument, "covariate rows and response groups disagree");
  }
  if (!design.x.allFinite()) raise(errc::non_finite, "covariate matrix has non-finite entries");
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto& g = design.responses[static_cast<std::size_t>(i)];
    if (g.empty()) raise(errc::empty_sample, "group " + std::to_string(i + 1) + " has no responses");
    if (require_replicates && g.size() < 2) {
      raise(errc::no_replicates,
            "group " + std::to_string(i + 1) +
                " has a single response; replicate-based estimation needs n_i >= 2 "
                "(the check-loss method accepts unreplicated data)");
    }
    for (double y : g) {
      if (!std::isfinite(y)) {
        raise(errc::non_finite, "group " + std::to_string(i + 1) + " has a non-finite response");
      }
    }
  }
  if (k < p1) {
    raise(errc::too_few_groups, "need at least " + std::to_string(p1) +
                                    " distinct covariate rows, got " + std::to_string(k));
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(design.x);
  const auto& sv = svd.singularValues();
  if (sv(0) <= 0.0 || sv(sv.size() - 1) <= 1e-10 * sv(0)) {
    raise(errc::rank_deficient, "covariate matrix is rank deficient");
  }
  return design;
}

}  // namespace qrep
