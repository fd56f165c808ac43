// slowconv: run one certified experiment and write its artifacts.
//
//   slowconv theorem1 --config configs/theorem1.ini --out out/
//
// Exit status: 0 pass, 1 certificate failure, 2 config error, 3 model too small.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "slowconv/error.hpp"
#include "slowconv/harness.hpp"

namespace {

struct Options {
  std::optional<std::string> config;
  std::optional<std::string> out;
  std::optional<double> verify_fraction;
  bool quiet = false;
};

void print_summary(const slowconv::RunReport& r, const std::filesystem::path& dir) {
  const auto passed = slowconv::exceedance_count(r.certificates);
  std::cout << "pipeline      " << slowconv::to_string(r.config.pipeline) << '\n'
            << "certificates  " << passed << " / " << r.certificates.size() << " pass\n"
            << "exceedances   " << r.exceedances << '\n'
            << "spot checks   " << r.spot_checks.size() << '\n'
            << "wall time     " << r.wall_seconds << " s\n";
  std::size_t shown = 0;
  for (const auto& c : r.certificates) {
    if (c.pass) continue;
    if (shown++ == 20) {
      std::cout << "  ...\n";
      break;
    }
    std::cout << "  FAIL " << c.kind << " k=" << c.k << " n=" << c.n << " lhs=" << slowconv::format_number(c.lhs)
              << " rhs=" << slowconv::format_number(c.rhs) << '\n';
  }
  for (const auto& v : r.violations) std::cout << "  violation: " << v << '\n';
  std::cout << "artifacts     " << (dir / r.config.stem()).string() << ".{csv,plot.dat,report.json}\n"
            << "result        " << (r.pass ? "PASS" : "FAIL") << '\n';
}

int execute(slowconv::Pipeline pipeline, const Options& opt) {
  using namespace slowconv;
  try {
    ExperimentConfig cfg = opt.config ? load_config(*opt.config) : ExperimentConfig{};
    if (cfg.declared_pipeline && *cfg.declared_pipeline != pipeline) {
      throw ConfigError("config declares pipeline '" + to_string(*cfg.declared_pipeline) +
                        "' but subcommand is '" + to_string(pipeline) + "'");
    }
    cfg.pipeline = pipeline;
    if (opt.verify_fraction) cfg.verify_fraction = *opt.verify_fraction;
    const RunReport report = run(cfg);
    const auto dir = resolve_out_dir(opt.out, cfg);
    write_artifacts(report, dir);
    if (!opt.quiet) print_summary(report, dir);
    return report.pass ? kExitPass : kExitCertificateFailure;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const InvalidArgument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const Infeasible& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitCertificateFailure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Certified slow-convergence experiments on finite measure-preserving systems"};
  app.require_subcommand(1);
  Options opt;
  const std::pair<const char*, slowconv::Pipeline> commands[] = {
      {"core-checks", slowconv::Pipeline::core_checks},
      {"theorem1", slowconv::Pipeline::theorem1},
      {"theorem2", slowconv::Pipeline::theorem2},
      {"theorem3", slowconv::Pipeline::theorem3},
      {"rate-scan", slowconv::Pipeline::rate_scan},
  };
  const char* help[] = {
      "telescoping identity on cyclic systems",
      "slow set for a flow and a family of time measures",
      "slow set for a Z^d action, uniform and random weights",
      "slow pointwise Birkhoff averages via Rokhlin towers",
      "deviation curve of one operator family against a_n",
  };
  std::optional<slowconv::Pipeline> chosen;
  for (std::size_t i = 0; i < std::size(commands); ++i) {
    auto* sub = app.add_subcommand(commands[i].first, help[i]);
    sub->add_option("--config", opt.config, "INI experiment config")->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "output directory (overrides SLOWCONV_OUT_DIR and [run] out_dir)");
    sub->add_option("--verify-fraction", opt.verify_fraction, "fraction of rows to re-verify independently")
        ->check(CLI::Range(0.0, 1.0));
    sub->add_flag("-q,--quiet", opt.quiet, "suppress the summary");
    sub->callback([&chosen, p = commands[i].second] { chosen = p; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : slowconv::kExitConfigError;
  }
  return execute(*chosen, opt);
}
