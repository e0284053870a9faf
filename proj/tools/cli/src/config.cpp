#include "optomech/cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "json.hpp"

namespace optomech::cli {

using nlohmann::json;

namespace {

constexpr std::string_view kFig1 = R"({
  "experiment": "husimi",
  "params": {"detuning": 0.0, "omega_m": 1.0, "g0": 0.25, "chi": "matched", "xi": 0.01},
  "truncation": {"dim_cavity": 0, "dim_mirror": 0, "tail_tol": 1e-12},
  "husimi": {
    "alpha": [2.0, 0.0],
    "gamma": [2.0, 0.0],
    "scaled_time": 3.141592653589793,
    "modes": ["mirror"],
    "etas": [0.25, 0.5, 0.75, 1.0],
    "threshold": 0.1
  }
})";

// Finds the source line of a dotted field path by locating its keys in order.
int line_of(std::string_view text, const std::string& path) {
  if (text.empty()) return 0;
  std::size_t pos = 0;
  std::size_t start = 0;
  while (start <= path.size()) {
    const std::size_t dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    const std::size_t bracket = key.find('[');
    const std::string name = key.substr(0, bracket);
    const std::size_t hit = text.find('"' + name + '"', pos);
    if (hit == std::string_view::npos) return 0;
    pos = hit;
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

class Reader {
 public:
  Reader(std::string_view origin, std::string_view text) : origin_(origin), text_(text) {}

  [[noreturn]] void fail(const std::string& path, const std::string& message) const {
    const int line = line_of(text_, path);
    const std::string where = line > 0 ? fmt::format("{}:{}: {}", origin_, line, path) : fmt::format("{}: {}", origin_, path);
    throw ConfigError(where, message);
  }

 private:
  std::string origin_;
  std::string_view text_;
};

// One JSON object; remembers which keys were read so leftovers can be rejected.
class Section {
 public:
  Section(const Reader& r, const json& j, std::string path) : r_(r), j_(j), path_(std::move(path)) {
    if (!j_.is_object()) r_.fail(path_.empty() ? "<root>" : path_, "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }
  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* find(const std::string& key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  double number(const std::string& key, double fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_number()) r_.fail(field(key), "expected a number");
    const double x = v->get<double>();
    if (!std::isfinite(x)) r_.fail(field(key), "must be finite");
    return x;
  }

  int integer(const std::string& key, int fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_number_integer()) r_.fail(field(key), "expected an integer");
    return v->get<int>();
  }

  bool boolean(const std::string& key, bool fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_boolean()) r_.fail(field(key), "expected true or false");
    return v->get<bool>();
  }

  std::string text(const std::string& key, const std::string& fallback, std::initializer_list<std::string_view> allowed) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_string()) r_.fail(field(key), "expected a string");
    std::string s = v->get<std::string>();
    check_choice(field(key), s, allowed);
    return s;
  }

  cplx complex(const std::string& key, cplx fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (v->is_number()) return {v->get<double>(), 0.0};
    if (v->is_array() && v->size() == 2 && (*v)[0].is_number() && (*v)[1].is_number()) {
      return {(*v)[0].get<double>(), (*v)[1].get<double>()};
    }
    r_.fail(field(key), "expected a number or [re, im]");
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_array()) r_.fail(field(key), "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v->size(); ++i) {
      if (!(*v)[i].is_number()) r_.fail(fmt::format("{}[{}]", field(key), i), "expected a number");
      out.push_back((*v)[i].get<double>());
      if (!std::isfinite(out.back())) r_.fail(fmt::format("{}[{}]", field(key), i), "must be finite");
    }
    return out;
  }

  std::vector<std::string> strings(const std::string& key, std::vector<std::string> fallback,
                                   std::initializer_list<std::string_view> allowed) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_array()) r_.fail(field(key), "expected an array of strings");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < v->size(); ++i) {
      const std::string f = fmt::format("{}[{}]", field(key), i);
      if (!(*v)[i].is_string()) r_.fail(f, "expected a string");
      out.push_back((*v)[i].get<std::string>());
      check_choice(f, out.back(), allowed);
    }
    return out;
  }

  Section child(const std::string& key) {
    static const json empty = json::object();
    const json* v = find(key);
    return Section(r_, v ? *v : empty, field(key));
  }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) r_.fail(field(item.key()), "unknown field");
    }
  }

  const Reader& reader() const { return r_; }

 private:
  void check_choice(const std::string& f, const std::string& s, std::initializer_list<std::string_view> allowed) const {
    if (allowed.size() == 0) return;
    if (std::find(allowed.begin(), allowed.end(), s) != allowed.end()) return;
    std::string list;
    for (std::string_view a : allowed) list += (list.empty() ? "" : ", ") + std::string(a);
    r_.fail(f, fmt::format("'{}' is not one of {}", s, list));
  }

  const Reader& r_;
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

json parse_json(std::string_view text, std::string_view origin) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const std::size_t at = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    const int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(at), '\n'));
    std::string msg = e.what();
    if (const auto p = msg.find("parse error"); p != std::string::npos) msg = msg.substr(p);
    throw ConfigError(fmt::format("{}:{}", origin, line), fmt::format("malformed JSON ({})", msg));
  }
}

}  // namespace

std::string_view to_string(Experiment e) {
  switch (e) {
    case Experiment::spectrum: return "spectrum";
    case Experiment::evolve: return "evolve";
    case Experiment::husimi: return "husimi";
    case Experiment::sweep: return "sweep";
    case Experiment::verify: return "verify";
  }
  return "unknown";
}

std::optional<Experiment> parse_experiment(std::string_view name) {
  for (Experiment e : {Experiment::spectrum, Experiment::evolve, Experiment::husimi, Experiment::sweep, Experiment::verify}) {
    if (to_string(e) == name) return e;
  }
  return std::nullopt;
}

SystemParams RunConfig::effective_params() const { return match_kerr ? params.with_matched_kerr() : params; }

std::optional<std::string> preset_json(std::string_view name) {
  if (name == "fig1") return std::string(kFig1);
  return std::nullopt;
}

RunConfig parse_config(std::string_view text, std::string_view origin, std::string_view base) {
  json root = parse_json(text, origin);
  if (!base.empty()) {
    json merged = parse_json(base, "<preset>");
    merged.merge_patch(root);
    root = std::move(merged);
  }
  const Reader reader(origin, text);
  Section top(reader, root, "");
  RunConfig c;

  const std::string exp = top.text("experiment", "verify", {"spectrum", "evolve", "husimi", "sweep", "verify"});
  c.experiment = *parse_experiment(exp);

  {
    Section p = top.child("params");
    c.params.detuning = p.number("detuning", c.params.detuning);
    c.params.omega_m = p.number("omega_m", c.params.omega_m);
    c.params.g0 = p.number("g0", c.params.g0);
    c.params.xi = p.number("xi", c.params.xi);
    if (const json* chi = p.find("chi")) {
      if (chi->is_string()) {
        if (chi->get<std::string>() != "matched") reader.fail("params.chi", "expected a number or \"matched\"");
        c.match_kerr = true;
      } else if (chi->is_number()) {
        c.match_kerr = false;
        c.params.chi = chi->get<double>();
      } else {
        reader.fail("params.chi", "expected a number or \"matched\"");
      }
    }
    p.finish();
    if (c.match_kerr) c.params = c.params.with_matched_kerr();
    try {
      c.params.validate();
    } catch (const Error& e) {
      reader.fail("params", e.what());
    }
  }
  {
    Section t = top.child("truncation");
    c.truncation.dim_cavity = t.integer("dim_cavity", c.truncation.dim_cavity);
    c.truncation.dim_mirror = t.integer("dim_mirror", c.truncation.dim_mirror);
    c.truncation.tail_tol = t.number("tail_tol", c.truncation.tail_tol);
    t.finish();
    const bool automatic = c.truncation.dim_cavity == 0 && c.truncation.dim_mirror == 0;
    if (!automatic) {
      if (c.truncation.dim_cavity < 2 || c.truncation.dim_mirror < 2) {
        reader.fail("truncation", "dims must both be 0 (planned) or both >= 2");
      }
    }
    if (!(c.truncation.tail_tol > 0.0 && c.truncation.tail_tol < 1.0)) reader.fail("truncation.tail_tol", "must lie in (0, 1)");
  }
  {
    Section s = top.child("spectrum");
    auto& o = c.spectrum;
    o.hamiltonian = s.text("hamiltonian", o.hamiltonian, {"full", "displaced", "ion_laser", "rwa", "coupled"});
    o.sideband = s.integer("sideband", o.sideband);
    o.count = s.integer("count", o.count);
    o.max_top_population = s.number("max_top_population", o.max_top_population);
    s.finish();
    if (o.count < 1) reader.fail("spectrum.count", "must be >= 1");
    if (!(o.max_top_population > 0.0 && o.max_top_population < 1.0)) reader.fail("spectrum.max_top_population", "must lie in (0, 1)");
  }
  {
    Section s = top.child("evolve");
    auto& o = c.evolve;
    o.alpha = s.complex("alpha", o.alpha);
    o.gamma = s.complex("gamma", o.gamma);
    o.scaled_times = s.numbers("scaled_times", o.scaled_times);
    o.compare = s.text("compare", o.compare, {"none", "structured", "full", "ion_laser"});
    o.min_fidelity = s.number("min_fidelity", o.min_fidelity);
    s.finish();
    for (std::size_t i = 0; i < o.scaled_times.size(); ++i) {
      if (o.scaled_times[i] < 0.0) reader.fail(fmt::format("evolve.scaled_times[{}]", i), "must be >= 0");
    }
  }
  {
    Section s = top.child("husimi");
    auto& o = c.husimi;
    o.alpha = s.complex("alpha", o.alpha);
    o.gamma = s.complex("gamma", o.gamma);
    o.scaled_time = s.number("scaled_time", o.scaled_time);
    o.modes = s.strings("modes", o.modes, {"mirror", "cavity"});
    o.etas = s.numbers("etas", o.etas);
    {
      Section g = s.child("grid");
      if (const json* hw = g.find("half_width"); hw && !hw->is_null()) {
        if (!hw->is_number() || !(hw->get<double>() > 0.0)) reader.fail("husimi.grid.half_width", "expected a positive number or null");
        o.grid.half_width = hw->get<double>();
      }
      o.grid.points = g.integer("points", o.grid.points);
      g.finish();
      if (o.grid.points < 3) reader.fail("husimi.grid.points", "must be >= 3");
    }
    o.threshold = s.number("threshold", o.threshold);
    o.max_residual = s.number("max_residual", o.max_residual);
    o.gnuplot = s.boolean("gnuplot", o.gnuplot);
    o.normalize_to_first = s.boolean("normalize_to_first", o.normalize_to_first);
    s.finish();
    if (o.scaled_time < 0.0) reader.fail("husimi.scaled_time", "must be >= 0");
    if (o.modes.empty()) reader.fail("husimi.modes", "needs at least one mode");
    for (std::size_t i = 0; i < o.etas.size(); ++i) {
      if (o.etas[i] < 0.0) reader.fail(fmt::format("husimi.etas[{}]", i), "must be >= 0");
    }
    if (!(o.threshold > 0.0 && o.threshold < 1.0)) reader.fail("husimi.threshold", "must lie in (0, 1)");
  }
  {
    Section s = top.child("sweep");
    auto& o = c.sweep;
    o.parameter = s.text("parameter", o.parameter, {"eta", "chi", "scaled_time", "detuning", "xi"});
    o.values = s.numbers("values", o.values);
    if (s.has("range")) {
      if (s.has("values")) reader.fail("sweep.range", "give either values or range, not both");
      Section r = s.child("range");
      const double start = r.number("start", 0.0);
      const double stop = r.number("stop", 0.0);
      const int count = r.integer("count", 0);
      r.finish();
      if (count < 0) reader.fail("sweep.range.count", "must be >= 0");
      if (stop < start) reader.fail("sweep.range", "stop must not be below start");
      if (count == 1 && stop != start) reader.fail("sweep.range.count", "a single point needs start == stop");
      o.values.clear();
      for (int i = 0; i < count; ++i) o.values.push_back(count == 1 ? start : start + (stop - start) * i / (count - 1));
    }
    o.model = s.text("model", o.model, {"analytic", "ion_laser", "coupled", "full"});
    o.observables = s.strings("observables", o.observables, {"maxima_count", "norm_integral", "peak", "fidelity", "purity"});
    o.mode = s.text("mode", o.mode, {"mirror", "cavity"});
    o.alpha = s.complex("alpha", o.alpha);
    o.gamma = s.complex("gamma", o.gamma);
    o.scaled_time = s.number("scaled_time", o.scaled_time);
    o.threshold = s.number("threshold", o.threshold);
    o.grid_points = s.integer("grid_points", o.grid_points);
    if (const json* hw = s.find("half_width"); hw && !hw->is_null()) {
      if (!hw->is_number() || !(hw->get<double>() > 0.0)) reader.fail("sweep.half_width", "expected a positive number or null");
      o.half_width = hw->get<double>();
    }
    s.finish();
    if (o.observables.empty()) reader.fail("sweep.observables", "needs at least one observable");
    for (std::size_t i = 1; i < o.values.size(); ++i) {
      if (!(o.values[i] > o.values[i - 1])) reader.fail("sweep.values", "must be strictly increasing");
    }
    if (o.grid_points < 3) reader.fail("sweep.grid_points", "must be >= 3");
    if (!(o.threshold > 0.0 && o.threshold < 1.0)) reader.fail("sweep.threshold", "must lie in (0, 1)");
  }
  {
    Section s = top.child("verify");
    c.verify.fault = s.text("fault", c.verify.fault, {"none", "flip_coupling_sign"});
    s.finish();
  }
  top.finish();
  return c;
}

RunConfig load_config(const std::filesystem::path& path, std::string_view base) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string(), "cannot open config file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string(), base);
}

std::string serialize_config(const RunConfig& c) {
  json j = json::object();
  j["experiment"] = std::string(to_string(c.experiment));
  j["params"] = {{"detuning", c.params.detuning},
                 {"omega_m", c.params.omega_m},
                 {"g0", c.params.g0},
                 {"chi", c.match_kerr ? json("matched") : json(c.params.chi)},
                 {"xi", c.params.xi}};
  j["truncation"] = {{"dim_cavity", c.truncation.dim_cavity},
                     {"dim_mirror", c.truncation.dim_mirror},
                     {"tail_tol", c.truncation.tail_tol}};
  j["spectrum"] = {{"hamiltonian", c.spectrum.hamiltonian},
                   {"sideband", c.spectrum.sideband},
                   {"count", c.spectrum.count},
                   {"max_top_population", c.spectrum.max_top_population}};
  j["evolve"] = {{"alpha", complex_json(c.evolve.alpha)},
                 {"gamma", complex_json(c.evolve.gamma)},
                 {"scaled_times", c.evolve.scaled_times},
                 {"compare", c.evolve.compare},
                 {"min_fidelity", c.evolve.min_fidelity}};
  j["husimi"] = {{"alpha", complex_json(c.husimi.alpha)},
                 {"gamma", complex_json(c.husimi.gamma)},
                 {"scaled_time", c.husimi.scaled_time},
                 {"modes", c.husimi.modes},
                 {"etas", c.husimi.etas},
                 {"grid", {{"half_width", c.husimi.grid.half_width ? json(*c.husimi.grid.half_width) : json(nullptr)},
                           {"points", c.husimi.grid.points}}},
                 {"threshold", c.husimi.threshold},
                 {"max_residual", c.husimi.max_residual},
                 {"gnuplot", c.husimi.gnuplot},
                 {"normalize_to_first", c.husimi.normalize_to_first}};
  j["sweep"] = {{"parameter", c.sweep.parameter},
                {"values", c.sweep.values},
                {"model", c.sweep.model},
                {"observables", c.sweep.observables},
                {"mode", c.sweep.mode},
                {"alpha", complex_json(c.sweep.alpha)},
                {"gamma", complex_json(c.sweep.gamma)},
                {"scaled_time", c.sweep.scaled_time},
                {"threshold", c.sweep.threshold},
                {"grid_points", c.sweep.grid_points},
                {"half_width", c.sweep.half_width ? json(*c.sweep.half_width) : json(nullptr)}};
  j["verify"] = {{"fault", c.verify.fault}};
  return j.dump(2) + "\n";
}

}  // namespace optomech::cli
