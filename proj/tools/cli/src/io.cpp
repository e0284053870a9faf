#include <fstream>
#include <ostream>
#include <system_error>

#include <fmt/format.h>

#include "internal.hpp"

namespace optomech::cli::detail {

void write_atomic(const std::filesystem::path& path, std::string_view content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::wiring, fmt::format("cannot write {}", tmp.string()));
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error(ErrorKind::wiring, fmt::format("write to {} failed", tmp.string()));
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error(ErrorKind::wiring, fmt::format("cannot move {} into place: {}", path.string(), ec.message()));
  }
}

std::string format_number(double x) { return fmt::format("{}", x); }

std::string grid_csv(const HusimiGrid& grid) {
  const GridGeometry& g = grid.geometry;
  std::string out = "re,im,q\n";
  out.reserve(out.size() + static_cast<std::size_t>(g.n_re) * g.n_im * 48);
  auto it = std::back_inserter(out);
  for (int i = 0; i < g.n_re; ++i) {
    for (int j = 0; j < g.n_im; ++j) fmt::format_to(it, "{},{},{}\n", g.re(i), g.im(j), grid.values(i, j));
  }
  return out;
}

json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

json params_json(const SystemParams& p) {
  return {{"detuning", p.detuning}, {"omega_m", p.omega_m}, {"g0", p.g0}, {"chi", p.chi}, {"xi", p.xi},
          {"eta", p.eta()}, {"kerr_matched", p.kerr_matched()}};
}

json truncation_json(const TruncationSpec& tr) {
  return {{"dim_cavity", tr.dim_cavity}, {"dim_mirror", tr.dim_mirror}, {"tail_tol", tr.tail_tol}};
}

json geometry_json(const GridGeometry& g) {
  return {{"re_min", g.re_min}, {"re_max", g.re_max}, {"im_min", g.im_min},
          {"im_max", g.im_max}, {"n_re", g.n_re},     {"n_im", g.n_im}};
}

void log_line(const CommandOptions& opts, std::string_view line) {
  if (opts.log) *opts.log << line << '\n' << std::flush;
}

}  // namespace optomech::cli::detail
