#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "optomech/cli/commands.hpp"
#include "optomech/phase_space.hpp"

namespace optomech::cli::detail {

using nlohmann::json;

/// Writes via a temporary file in the same directory and renames it.
void write_atomic(const std::filesystem::path& path, std::string_view content);

/// Shortest decimal text that reads back to the same double.
std::string format_number(double x);

std::string grid_csv(const HusimiGrid& grid);

json params_json(const SystemParams& p);
json truncation_json(const TruncationSpec& tr);
json geometry_json(const GridGeometry& g);
json complex_json(cplx z);

void log_line(const CommandOptions& opts, std::string_view line);

/// Closed-form spec for the given state and parameters (eta taken from p).
AnalyticEvolutionSpec analytic_spec(cplx alpha, cplx gamma, double scaled_time, const SystemParams& p);

/// Configured truncation, or the planned one when the configured dims are 0.
TruncationSpec resolve_truncation(const TruncationSpec& configured, const AnalyticEvolutionSpec& spec);

struct Panel {
  Mode mode = Mode::mirror;
  double eta = 0.0;
  TruncationSpec truncation;
  SumCutoffs cutoffs;
  HusimiGrid grid;
  double integral = 0.0;
  std::vector<LocalMaximum> maxima;
  std::optional<double> residual;  // vs the reduced-density oracle
};

Panel compute_panel(const AnalyticEvolutionSpec& spec, Mode mode, const TruncationSpec& configured, const GridSpec& grid,
                    double threshold, bool with_oracle);

json panel_json(const Panel& panel);

/// Fidelity of a numeric model against its closed-form or frame-mapped
/// reference at spec.scaled_time:
///   structured  analytic vs evolve_resonant_numeric (rotating frame)
///   full        full Hamiltonian from |alpha, Gamma>, mapped to the rotating frame
///   ion_laser   ion-laser form from U_p^dag |alpha, Gamma>, in the polaron interaction frame
///   coupled     ion-laser form vs the coupled-oscillator form under coupled_frame_map
double model_fidelity(std::string_view model, const AnalyticEvolutionSpec& spec, const TruncationSpec& tr);

}  // namespace optomech::cli::detail
