#pragma once

// Experiment configuration, pipeline execution and report artifacts.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "slowconv/adversary.hpp"
#include "slowconv/certificate.hpp"
#include "slowconv/rates.hpp"

namespace slowconv {

enum class Pipeline { core_checks, theorem1, theorem2, theorem3, rate_scan };

std::string to_string(Pipeline p);
Pipeline parse_pipeline(const std::string& name);

struct SystemSpec {
  std::string model = "cyclic";  // cyclic | odometer | torus | special-flow
  std::size_t n = 1000;          // cyclic size, or special-flow base size
  double delta = 1.0;
  std::size_t base = 2;
  std::size_t digits = 10;
  std::size_t side = 100;
  std::size_t dim = 1;
  std::vector<IntVec> shifts;    // empty: unit vectors
  std::string roof = "constant:1";
};

struct RateSpec {
  std::string kind = "power";  // power | logpow | table
  double alpha = 0.5;
  std::vector<double> values;

  RateSeq build() const;
};

struct Theorem1Section {
  double eps = 0.2;
  std::size_t K = 3;
  std::string aprime = "lower-half";
  std::string time_measure = "uniform-integers";  // uniform-integers | point-mass
  int max_doublings = 1;
};

struct Theorem2Section {
  double eps = 0.3;
  double c = 0.5;
  std::size_t J = 5;
  std::size_t random_weights = 8;
  std::string aprime = "lower-half";
};

struct Theorem3Section {
  double eps = 0.2;
  std::size_t K = 2;
  std::string observable = "one-plus-coordinate";
  DeviationMode mode = DeviationMode::two_sided;
  bool allow_signed = false;
  double budget_shrink = 0.999;
  double tower_measure_factor = 3.0;
  double height_factor = 1.0;
  double height_growth = 10.0;
  int max_escalations = 3;
  double grid_ratio = 1.5;
};

struct CoreSection {
  std::vector<std::size_t> sizes;  // empty: the [system] cycle length
  std::size_t observables = 20;
  std::int64_t max_index = 50;
  double tolerance = 1e-10;
};

struct ScanSection {
  std::string family = "cesaro";  // cesaro | flow-uniform | kernel-uniform
  std::string observable = "indicator:lower-half";
  std::int64_t from = 1;
  std::int64_t to = 100;
  std::int64_t step = 1;
  std::size_t kernel_cells = 64;
  bool with_rates = true;
};

struct ExperimentConfig {
  Pipeline pipeline = Pipeline::core_checks;
  std::optional<Pipeline> declared_pipeline;  // [run] pipeline, when present
  std::string name;  // artifact stem; defaults to the pipeline name
  std::uint64_t seed = 1;
  double eta = kDefaultEta;
  std::string out_dir;
  double verify_fraction = 0.1;
  SystemSpec system;
  RateSpec rates;
  Theorem1Section theorem1;
  Theorem2Section theorem2;
  Theorem3Section theorem3;
  CoreSection core;
  ScanSection scan;

  std::string stem() const { return name.empty() ? to_string(pipeline) : name; }
  nlohmann::json to_json() const;
};

// INI text with sections [run], [system], [rates], [theorem1], [theorem2],
// [theorem3], [core], [scan]. Unknown keys are errors. Throws ConfigError.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);

// Range checks for the selected pipeline. Throws ConfigError naming the
// violated constraint.
void validate(const ExperimentConfig& config);

struct PlotRow {
  std::int64_t index = 0;
  double deviation = 0;
  std::optional<double> rate;
};

struct SpotCheck {
  std::size_t row = 0;
  double reported = 0;
  double recomputed = 0;
  bool agree = false;
};

struct RunReport {
  ExperimentConfig config;
  nlohmann::json plan;
  std::vector<Certificate> certificates;
  std::size_t exceedances = 0;
  std::vector<std::string> violations;
  std::vector<PlotRow> plot;
  std::vector<SpotCheck> spot_checks;
  double wall_seconds = 0;
  bool pass = false;

  nlohmann::json to_json() const;
};

// Runs the selected pipeline. Deterministic given the config; spot checks
// re-verify a seeded random fraction of certificate rows by direct
// evaluation. Throws ConfigError, InvalidArgument or Infeasible.
RunReport run(const ExperimentConfig& config);

// Fixed header, one row per certificate, 17 significant digits.
inline constexpr const char* kCsvHeader =
    "k,n,lhs,rhs,margin,pass,kind,L,eps_k,h,measure_v,measure_core,measure_a,residual,weights";

void emit_csv(const RunReport& report, std::ostream& out);
void emit_csv(const RunReport& report, const std::filesystem::path& path);

// Columns "index l1_dev a_n"; the third is omitted when no rate applies.
void emit_rate_plotdata(std::span<const PlotRow> rows, std::ostream& out);
void emit_rate_plotdata(std::span<const PlotRow> rows, const std::filesystem::path& path);

void emit_report(const RunReport& report, const std::filesystem::path& path);

// 17 significant digits, '.' separator, locale independent.
std::string format_number(double x);

// Output directory: explicit override, then $SLOWCONV_OUT_DIR, then the
// config value, then ".".
std::filesystem::path resolve_out_dir(const std::optional<std::string>& cli_override,
                                      const ExperimentConfig& config);

// Writes <stem>.csv, <stem>.plot.dat and <stem>.report.json.
void write_artifacts(const RunReport& report, const std::filesystem::path& dir);

// Process exit codes.
inline constexpr int kExitPass = 0;
inline constexpr int kExitCertificateFailure = 1;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitInfeasible = 3;

}  // namespace slowconv
