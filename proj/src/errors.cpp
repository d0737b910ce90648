#include "qrep/errors.hpp"

namespace qrep {

const char* errc_name(errc kind) noexcept {
  switch (kind) {
    case errc::parse_error: return "parse_error";
    case errc::invalid_argument: return "invalid_argument";
    case errc::non_finite: return "non_finite";
    case errc::too_few_groups: return "too_few_groups";
    case errc::no_replicates: return "no_replicates";
    case errc::rank_deficient: return "rank_deficient";
    case errc::empty_sample: return "empty_sample";
    case errc::degenerate_covariate: return "degenerate_covariate";
    case errc::degenerate_sample: return "degenerate_sample";
    case errc::singular_system: return "singular_system";
    case errc::not_positive_definite: return "not_positive_definite";
    case errc::unbounded: return "unbounded";
    case errc::max_iterations: return "max_iterations";
  }
  return "unknown";
}

bool is_validation_error(errc kind) noexcept {
  switch (kind) {
    case errc::parse_error:
    case errc::invalid_argument:
    case errc::non_finite:
    case errc::too_few_groups:
    case errc::no_replicates:
    case errc::rank_deficient:
    case errc::empty_sample:
    case errc::degenerate_covariate:
      return true;
    default:
      return false;
  }
}

void raise(errc kind, const std::string& what) {
  throw error(kind, std::string(errc_name(kind)) + ": " + what);
}

}  // namespace qrep
