#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <ostream>

#include "slowconv/error.hpp"
#include "slowconv/harness.hpp"

namespace slowconv {

std::string format_number(double x) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  if (ec != std::errc{}) throw Error("number formatting failed");
  return std::string(buf, end);
}

namespace {

std::string optional_field(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error("write failed for " + path.string());
}

}  // namespace

void emit_csv(const RunReport& report, std::ostream& out) {
  out << kCsvHeader << '\n';
  for (const auto& c : report.certificates) {
    const auto& x = c.context;
    out << c.k << ',' << c.n << ',' << format_number(c.lhs) << ',' << format_number(c.rhs) << ','
        << format_number(c.margin()) << ',' << (c.pass ? 1 : 0) << ',' << c.kind << ','
        << optional_field(x.L) << ',' << optional_field(x.eps_k) << ',' << optional_field(x.height) << ','
        << optional_field(x.measure_v) << ',' << optional_field(x.measure_core) << ','
        << optional_field(x.measure_a) << ',' << optional_field(x.residual) << ','
        << (x.weight_id ? std::to_string(*x.weight_id) : std::string()) << '\n';
  }
}

void emit_csv(const RunReport& report, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  emit_csv(report, out);
  finish(out, path);
}

void emit_rate_plotdata(std::span<const PlotRow> rows, std::ostream& out) {
  const bool with_rate = !rows.empty() && std::all_of(rows.begin(), rows.end(), [](const PlotRow& r) {
    return r.rate.has_value();
  });
  out << (with_rate ? "# index l1_dev a_n\n" : "# index l1_dev\n");
  for (const auto& r : rows) {
    out << r.index << ' ' << format_number(r.deviation);
    if (with_rate) out << ' ' << format_number(*r.rate);
    out << '\n';
  }
}

void emit_rate_plotdata(std::span<const PlotRow> rows, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  emit_rate_plotdata(rows, out);
  finish(out, path);
}

void emit_report(const RunReport& report, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  out << report.to_json().dump(2) << '\n';
  finish(out, path);
}

std::filesystem::path resolve_out_dir(const std::optional<std::string>& cli_override,
                                      const ExperimentConfig& config) {
  if (cli_override && !cli_override->empty()) return *cli_override;
  if (const char* env = std::getenv("SLOWCONV_OUT_DIR"); env != nullptr && *env != '\0') return env;
  if (!config.out_dir.empty()) return config.out_dir;
  return ".";
}

void write_artifacts(const RunReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
  const std::string stem = report.config.stem();
  emit_csv(report, dir / (stem + ".csv"));
  emit_rate_plotdata(report.plot, dir / (stem + ".plot.dat"));
  emit_report(report, dir / (stem + ".report.json"));
}

}  // namespace slowconv
