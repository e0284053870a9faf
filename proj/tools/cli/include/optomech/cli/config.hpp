#pragma once

// Run configuration of the optomech driver and its JSON form.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "optomech/dynamics.hpp"
#include "optomech/hamiltonians.hpp"

namespace optomech::cli {

enum class Experiment { spectrum, evolve, husimi, sweep, verify };

std::string_view to_string(Experiment e);
std::optional<Experiment> parse_experiment(std::string_view name);

/// Grid extents; a missing half_width selects the default square.
struct GridSpec {
  std::optional<double> half_width;
  int points = 201;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

struct SpectrumOptions {
  std::string hamiltonian = "full";  // full | displaced | ion_laser | rwa | coupled
  int sideband = 0;                  // rwa only
  int count = 100;
  double max_top_population = 1e-12;

  friend bool operator==(const SpectrumOptions&, const SpectrumOptions&) = default;
};

struct EvolveOptions {
  cplx alpha{2.0, 0.0};
  cplx gamma{2.0, 0.0};
  std::vector<double> scaled_times{0.7853981633974483, 1.5707963267948966, 3.141592653589793};
  std::string compare = "structured";  // none | structured | full | ion_laser
  double min_fidelity = 1.0 - 1e-8;

  friend bool operator==(const EvolveOptions&, const EvolveOptions&) = default;
};

struct HusimiOptions {
  cplx alpha{2.0, 0.0};
  cplx gamma{2.0, 0.0};
  double scaled_time = 3.141592653589793;
  std::vector<std::string> modes{"mirror"};  // mirror | cavity
  std::vector<double> etas;                  // empty: use params.g0 / omega_m
  GridSpec grid;
  double threshold = 0.1;
  double max_residual = 1e-8;
  bool gnuplot = false;
  /// Gnuplot output only: scale every panel by the first panel's peak.
  bool normalize_to_first = true;

  friend bool operator==(const HusimiOptions&, const HusimiOptions&) = default;
};

struct SweepOptions {
  std::string parameter = "eta";  // eta | chi | scaled_time | detuning | xi
  std::vector<double> values;
  std::string model = "analytic";  // analytic | ion_laser | coupled | full
  std::vector<std::string> observables{"maxima_count"};
  std::string mode = "mirror";
  cplx alpha{2.0, 0.0};
  cplx gamma{2.0, 0.0};
  double scaled_time = 3.141592653589793;
  double threshold = 0.1;
  int grid_points = 201;
  std::optional<double> half_width;  // default grid when empty

  friend bool operator==(const SweepOptions&, const SweepOptions&) = default;
};

struct VerifyOptions {
  /// Test hook: "flip_coupling_sign" reverses omega_m eta N (b^dag + b) in
  /// the polaron-frame assembly, which must break spectrum preservation.
  std::string fault = "none";

  friend bool operator==(const VerifyOptions&, const VerifyOptions&) = default;
};

struct RunConfig {
  Experiment experiment = Experiment::verify;
  SystemParams params;
  /// chi follows g0^2 / omega_m whenever g0 changes.
  bool match_kerr = true;
  /// dim 0 selects the planned truncation.
  TruncationSpec truncation{0, 0, 1e-12};
  SpectrumOptions spectrum;
  EvolveOptions evolve;
  HusimiOptions husimi;
  SweepOptions sweep;
  VerifyOptions verify;

  /// params with match_kerr applied.
  SystemParams effective_params() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Raised for malformed or inconsistent configuration; `where` is
/// "origin:line: field" when the source position is known.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& where, const std::string& message)
      : Error(ErrorKind::config, where.empty() ? message : where + ": " + message) {}
};

/// Built-in configuration as JSON text ("fig1").
std::optional<std::string> preset_json(std::string_view name);

/// Parses JSON text layered as an RFC 7386 merge patch over `base` (may be empty).
RunConfig parse_config(std::string_view text, std::string_view origin, std::string_view base = {});

RunConfig load_config(const std::filesystem::path& path, std::string_view base = {});

/// Canonical JSON text: every field, fixed key order.
std::string serialize_config(const RunConfig& config);

}  // namespace optomech::cli
