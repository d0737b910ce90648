#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace qrep {

// Failure kinds surfaced by the library. The CLI maps input/validation kinds
// to exit code 2 and numerical kinds to exit code 3.
enum class errc {
  parse_error,
  invalid_argument,
  non_finite,
  too_few_groups,
  no_replicates,
  rank_deficient,
  empty_sample,
  degenerate_covariate,
  degenerate_sample,
  singular_system,
  not_positive_definite,
  unbounded,
  max_iterations,
};

const char* errc_name(errc kind) noexcept;

// True for kinds caused by bad input rather than numerical breakdown.
bool is_validation_error(errc kind) noexcept;

class error : public std::runtime_error {
 public:
  error(errc kind, std::string what)
      : std::runtime_error(std::move(what)), kind_(kind) {}
  errc kind() const noexcept { return kind_; }

 private:
  errc kind_;
};

[[noreturn]] void raise(errc kind, const std::string& what);

}  // namespace qrep
