#include "doctest.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

#include "optomech/cli/commands.hpp"
#include "optomech/cli/config.hpp"

using namespace optomech;
namespace cli = optomech::cli;
namespace fs = std::filesystem;

namespace {

std::string fig1() { return *cli::preset_json("fig1"); }

cli::RunConfig with_fig1(const std::string& patch) { return cli::parse_config(patch, "test.json", fig1()); }

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("optomech_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string config_error(const std::string& text) {
  try {
    cli::parse_config(text, "cfg.json");
  } catch (const cli::ConfigError& e) {
    CHECK(exit_code_for(e.kind()) == exit_code::config_error);
    return e.what();
  }
  FAIL("expected a ConfigError");
  return {};
}

}  // namespace

TEST_CASE("config round trip") {
  const cli::RunConfig a = cli::parse_config(fig1(), "fig1");
  const std::string text = cli::serialize_config(a);
  const cli::RunConfig b = cli::parse_config(text, "round-trip");
  CHECK(a == b);
  CHECK(cli::serialize_config(b) == text);

  const cli::RunConfig c = with_fig1(R"({"params": {"g0": 0.5, "chi": 0.1}, "sweep": {"half_width": 9}})");
  CHECK(cli::parse_config(cli::serialize_config(c), "again") == c);
}

TEST_CASE("fig1 preset contents") {
  const cli::RunConfig c = cli::parse_config(fig1(), "fig1");
  CHECK(c.experiment == cli::Experiment::husimi);
  CHECK(c.husimi.etas == std::vector<double>{0.25, 0.5, 0.75, 1.0});
  CHECK(c.husimi.alpha == cplx(2.0, 0.0));
  CHECK(c.effective_params().chi == doctest::Approx(0.0625));
  CHECK_FALSE(cli::preset_json("nope").has_value());
}

TEST_CASE("config errors name the line and field") {
  const std::string syntax = config_error("{\n  \"params\": {\n    \"xi\": ,\n  }\n}");
  CHECK(syntax.find("cfg.json:3") != std::string::npos);

  const std::string unknown = config_error("{\n  \"params\": {\n    \"omega\": 1.0\n  }\n}");
  CHECK(unknown.find("params.omega") != std::string::npos);
  CHECK(unknown.find("cfg.json:3") != std::string::npos);

  CHECK(config_error(R"({"params": {"omega_m": -1}})").find("omega_m") != std::string::npos);
  CHECK(config_error(R"({"truncation": {"dim_cavity": 4}})").find("truncation") != std::string::npos);
  CHECK(config_error(R"({"sweep": {"values": [0.5, 0.2]}})").find("strictly increasing") != std::string::npos);
  CHECK(config_error(R"({"sweep": {"parameter": "mass"}})").find("sweep.parameter") != std::string::npos);
  CHECK_THROWS_AS(cli::load_config("/nonexistent/config.json"), cli::ConfigError);
}

TEST_CASE("sweep range expands to evenly spaced values") {
  const cli::RunConfig c = with_fig1(R"({"sweep": {"range": {"start": 0.2, "stop": 0.8, "count": 4}}})");
  REQUIRE(c.sweep.values.size() == 4);
  CHECK(c.sweep.values[1] == doctest::Approx(0.4));
  CHECK(c.sweep.values[3] == doctest::Approx(0.8));
  CHECK(with_fig1(R"({"sweep": {"range": {"start": 0, "stop": 1, "count": 0}}})").sweep.values.empty());
}

TEST_CASE("empty sweep succeeds with a header-only table") {
  const fs::path out = scratch("empty_sweep");
  const cli::RunConfig c = with_fig1(R"({"sweep": {"values": []}})");
  const cli::CommandResult r = cli::run_command(cli::Experiment::sweep, c, {out});
  CHECK(r.exit_code == exit_code::success);
  CHECK(slurp(out / "sweep.csv") == "eta,status,maxima_count\n");
}

TEST_CASE("coupled sweep across resonance records the failing row") {
  const fs::path out = scratch("coupled_sweep");
  const cli::RunConfig c = with_fig1(R"({"params": {"xi": 0.05},
    "sweep": {"parameter": "detuning", "values": [-0.2, 0.0, 0.2], "model": "coupled",
              "observables": ["fidelity"], "alpha": [0.5, 0], "gamma": [0.5, 0], "scaled_time": 0.5}})");
  const cli::CommandResult r = cli::run_command(cli::Experiment::sweep, c, {out});
  CHECK(r.exit_code == exit_code::numerical_failure);
  const std::string csv = slurp(out / "sweep.csv");
  CHECK(csv.find("-0.2,ok,") != std::string::npos);
  CHECK(csv.find("0,\"error:") != std::string::npos);
  CHECK(csv.find("\n0.2,ok,") != std::string::npos);
}

TEST_CASE("verify passes by default and the fault hook breaks it") {
  const cli::RunConfig c = cli::parse_config(fig1(), "fig1");
  for (const cli::VerifyRecord& r : cli::run_invariants(c)) {
    INFO(r.name << ": " << r.detail);
    CHECK(r.pass);
  }
  const cli::RunConfig faulty = with_fig1(R"({"verify": {"fault": "flip_coupling_sign"}})");
  bool spectrum_failed = false;
  for (const cli::VerifyRecord& r : cli::run_invariants(faulty)) {
    if (r.name == "spectrum_preservation") spectrum_failed = !r.pass && r.measured > 1.0;
    if (r.name == "kerr_ladder") CHECK(r.pass);
  }
  CHECK(spectrum_failed);
  const fs::path out = scratch("fault");
  CHECK(cli::run_command(cli::Experiment::verify, faulty, {out}).exit_code == exit_code::numerical_failure);
  CHECK(slurp(out / "verify.json").find("\"pass\": false") != std::string::npos);
}

TEST_CASE("a 4x4 truncation is reported as inadequate") {
  const cli::RunConfig c = with_fig1(R"({"truncation": {"dim_cavity": 4, "dim_mirror": 4}})");
  const fs::path out = scratch("tiny");
  CHECK(cli::run_command(cli::Experiment::verify, c, {out}).exit_code == exit_code::truncation_inadequate);
  const std::string report = slurp(out / "verify.json");
  CHECK(report.find("truncation_adequacy") != std::string::npos);
  CHECK(report.find("try") != std::string::npos);

  try {
    cli::run_command(cli::Experiment::husimi, c, {out});
    FAIL("expected a TruncationError");
  } catch (const TruncationError& e) {
    CHECK(exit_code_for(e.kind()) == exit_code::truncation_inadequate);
    CHECK(e.suggested() > 4);
  }
}

TEST_CASE("undriven spectrum lies on the ladder") {
  const fs::path out = scratch("spectrum");
  const cli::RunConfig c = with_fig1(R"({"params": {"xi": 0, "detuning": 0.7, "g0": 0.3},
    "truncation": {"dim_cavity": 20, "dim_mirror": 40}, "spectrum": {"count": 40}})");
  const cli::CommandResult r = cli::run_command(cli::Experiment::spectrum, c, {out, true});
  CHECK(r.exit_code == exit_code::success);
  const std::string csv = slurp(out / "spectrum.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 41);

  const cli::RunConfig tiny = with_fig1(R"({"params": {"xi": 0}, "truncation": {"dim_cavity": 3, "dim_mirror": 3}})");
  CHECK_THROWS_AS(cli::run_command(cli::Experiment::spectrum, tiny, {out}), TruncationError);
}

TEST_CASE("repeated husimi runs write identical files") {
  const cli::RunConfig c = with_fig1(R"({"husimi": {"alpha": [1, 0], "gamma": [1, 0], "scaled_time": 1.0,
    "etas": [0.5], "modes": ["mirror", "cavity"], "grid": {"half_width": 10, "points": 41}}})");
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  const cli::CommandResult ra = cli::run_command(cli::Experiment::husimi, c, {a});
  const cli::CommandResult rb = cli::run_command(cli::Experiment::husimi, c, {b});
  REQUIRE(ra.files.size() == rb.files.size());
  for (const fs::path& f : ra.files) {
    if (f.extension() != ".csv") continue;
    CHECK(slurp(f) == slurp(b / f.filename()));
  }
  CHECK(slurp(a / "husimi_mirror_eta0.5.csv").rfind("re,im,q\n", 0) == 0);
}
