#include <fmt/format.h>

#include "internal.hpp"

namespace optomech::cli {

using detail::json;

namespace {

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

struct Row {
  double value = 0.0;
  std::vector<double> observables;
  std::optional<ErrorKind> error;
  std::string message;
};

Row evaluate_row(const RunConfig& c, double v) {
  const SweepOptions& o = c.sweep;
  Row row;
  row.value = v;
  SystemParams p = c.params;
  bool match = c.match_kerr;
  double xt = o.scaled_time;
  if (o.parameter == "eta") p.g0 = v * p.omega_m;
  if (o.parameter == "chi") {
    p.chi = v;
    match = false;
  }
  if (o.parameter == "detuning") p.detuning = v;
  if (o.parameter == "xi") p.xi = v;
  if (o.parameter == "scaled_time") xt = v;
  if (match) p = p.with_matched_kerr();
  p.validate();

  const AnalyticEvolutionSpec spec = detail::analytic_spec(o.alpha, o.gamma, xt, p);
  const TruncationSpec tr = detail::resolve_truncation(c.truncation, spec);
  std::optional<detail::Panel> panel;
  const auto need_panel = [&]() -> const detail::Panel& {
    if (!panel) {
      const Mode mode = o.mode == "cavity" ? Mode::cavity : Mode::mirror;
      panel = detail::compute_panel(spec, mode, tr, GridSpec{o.half_width, o.grid_points}, o.threshold, false);
    }
    return *panel;
  };
  for (const std::string& name : o.observables) {
    if (name == "maxima_count") row.observables.push_back(static_cast<double>(need_panel().maxima.size()));
    if (name == "norm_integral") row.observables.push_back(need_panel().integral);
    if (name == "peak") row.observables.push_back(need_panel().grid.peak());
    if (name == "fidelity") row.observables.push_back(detail::model_fidelity(o.model, spec, tr));
    if (name == "purity") {
      const AnalyticState s = dynamics::evolve_analytic(spec, tr);
      row.observables.push_back(fock::reduced_density(s.state, Mode::cavity).purity());
    }
  }
  return row;
}

}  // namespace

CommandResult cmd_sweep(const RunConfig& c, const CommandOptions& opts) {
  const SweepOptions& o = c.sweep;
  std::string csv = o.parameter + ",status";
  for (const std::string& name : o.observables) csv += "," + name;
  csv += "\n";

  // Rows run in order; a failing row is recorded and the sweep continues.
  json rows = json::array();
  int code = exit_code::success;
  for (double v : o.values) {
    Row row;
    try {
      row = evaluate_row(c, v);
    } catch (const Error& e) {
      row.value = v;
      row.error = e.kind();
      row.message = e.what();
    }
    json jr = {{"value", v}};
    if (row.error) {
      csv += fmt::format("{},{}", v, csv_quote(fmt::format("error: {}: {}", to_string(*row.error), row.message)));
      for (std::size_t i = 0; i < o.observables.size(); ++i) csv += ",";
      jr["status"] = "error";
      jr["error"] = {{"kind", std::string(to_string(*row.error))}, {"message", row.message}};
      if (code == exit_code::success) code = exit_code_for(*row.error);
      detail::log_line(opts, fmt::format("sweep: {} = {}: {}", o.parameter, v, row.message));
    } else {
      csv += fmt::format("{},ok", v);
      json obs = json::object();
      for (std::size_t i = 0; i < o.observables.size(); ++i) {
        csv += "," + detail::format_number(row.observables[i]);
        obs[o.observables[i]] = row.observables[i];
      }
      jr["status"] = "ok";
      jr["observables"] = obs;
      detail::log_line(opts, fmt::format("sweep: {} = {} done", o.parameter, v));
    }
    csv += "\n";
    rows.push_back(jr);
  }
  json meta = {{"tool", tool_version()},
               {"experiment", "sweep"},
               {"parameter", o.parameter},
               {"model", o.model},
               {"observables", o.observables},
               {"config", json::parse(serialize_config(c))},
               {"rows", rows}};
  CommandResult r;
  const auto csv_path = opts.out_dir / "sweep.csv";
  const auto json_path = opts.out_dir / "sweep.json";
  detail::write_atomic(csv_path, csv);
  detail::write_atomic(json_path, meta.dump(2) + "\n");
  r.files = {csv_path, json_path};
  r.exit_code = code;
  return r;
}

}  // namespace optomech::cli
