#include "optomech/error.hpp"

namespace optomech {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_dimension: return "invalid-dimension";
    case ErrorKind::truncation_insufficient: return "truncation-insufficient";
    case ErrorKind::cutoff_insufficient: return "cutoff-insufficient";
    case ErrorKind::degenerate_truncation: return "degenerate-truncation";
    case ErrorKind::extents_too_small: return "extents-too-small";
    case ErrorKind::contract_violation: return "contract-violation";
    case ErrorKind::domain: return "domain";
    case ErrorKind::unsupported_branch: return "unsupported-branch";
    case ErrorKind::wiring: return "wiring";
    case ErrorKind::resonant_divergence: return "resonant-divergence";
    case ErrorKind::internal_assembly: return "internal-assembly";
    case ErrorKind::config: return "config";
  }
  return "unknown";
}

bool Error::is_truncation() const noexcept {
  switch (kind_) {
    case ErrorKind::truncation_insufficient:
    case ErrorKind::cutoff_insufficient:
    case ErrorKind::degenerate_truncation:
    case ErrorKind::extents_too_small:
      return true;
    default:
      return false;
  }
}

int exit_code_for(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::config:
      return exit_code::config_error;
    case ErrorKind::truncation_insufficient:
    case ErrorKind::cutoff_insufficient:
    case ErrorKind::degenerate_truncation:
    case ErrorKind::extents_too_small:
      return exit_code::truncation_inadequate;
    default:
      return exit_code::numerical_failure;
  }
}

}  // namespace optomech
