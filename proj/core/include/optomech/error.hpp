#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace optomech {

enum class ErrorKind {
  invalid_dimension,
  truncation_insufficient,
  cutoff_insufficient,
  degenerate_truncation,
  extents_too_small,
  contract_violation,
  domain,
  unsupported_branch,
  wiring,
  resonant_divergence,
  internal_assembly,
  config,
};

std::string_view to_string(ErrorKind kind);

/// Base exception for every failure raised by the library. The kind decides
/// the process exit code used by the command-line driver.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// True for the family of failures that a larger basis or cutoff fixes.
  bool is_truncation() const noexcept;

 private:
  ErrorKind kind_;
};

/// Raised when a truncated representation leaks more than the admissible
/// population into its top basis state. Carries the smallest dimension
/// (or cutoff) that would have been adequate, when one is known.
class TruncationError : public Error {
 public:
  TruncationError(ErrorKind kind, const std::string& what, int suggested)
      : Error(kind, what), suggested_(suggested) {}

  int suggested() const noexcept { return suggested_; }

 private:
  int suggested_;
};

/// Process exit codes of the `optomech` driver.
namespace exit_code {
inline constexpr int success = 0;
inline constexpr int config_error = 2;
inline constexpr int numerical_failure = 3;
inline constexpr int truncation_inadequate = 4;
}  // namespace exit_code

int exit_code_for(ErrorKind kind) noexcept;

/// Non-fatal findings collected while building operators (for instance a
/// polaron block that reaches the mirror cutoff).
struct Diagnostics {
  std::vector<std::string> warnings;

  void warn(std::string message) { warnings.push_back(std::move(message)); }
  bool empty() const noexcept { return warnings.empty(); }
};

}  // namespace optomech
