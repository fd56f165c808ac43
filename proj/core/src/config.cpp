#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "slowconv/error.hpp"
#include "slowconv/harness.hpp"

namespace slowconv {

namespace pt = boost::property_tree;

std::string to_string(Pipeline p) {
  switch (p) {
    case Pipeline::core_checks:
      return "core-checks";
    case Pipeline::theorem1:
      return "theorem1";
    case Pipeline::theorem2:
      return "theorem2";
    case Pipeline::theorem3:
      return "theorem3";
    case Pipeline::rate_scan:
      return "rate-scan";
  }
  return "?";
}

Pipeline parse_pipeline(const std::string& name) {
  static const std::map<std::string, Pipeline> names{
      {"core-checks", Pipeline::core_checks}, {"theorem1", Pipeline::theorem1}, {"t1", Pipeline::theorem1},
      {"theorem2", Pipeline::theorem2},       {"t2", Pipeline::theorem2},       {"theorem3", Pipeline::theorem3},
      {"t3", Pipeline::theorem3},             {"rate-scan", Pipeline::rate_scan}};
  const auto it = names.find(name);
  if (it == names.end()) throw ConfigError("unknown pipeline '" + name + "'");
  return it->second;
}

RateSeq RateSpec::build() const {
  if (kind == "power") return RateSeq::power(alpha);
  if (kind == "logpow") return RateSeq::logpow(alpha);
  if (kind == "table") return RateSeq::table(values);
  throw ConfigError("[rates] kind must be power, logpow or table, got '" + kind + "'");
}

namespace {

template <class T>
T parse_number(const std::string& text, const std::string& where) {
  const std::string s = boost::trim_copy(text);
  T value{};
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || s.empty()) {
    throw ConfigError(where + ": cannot parse '" + text + "' as a number");
  }
  return value;
}

bool parse_bool(const std::string& text, const std::string& where) {
  const std::string s = boost::to_lower_copy(boost::trim_copy(text));
  if (s == "true" || s == "yes" || s == "1" || s == "on") return true;
  if (s == "false" || s == "no" || s == "0" || s == "off") return false;
  throw ConfigError(where + ": expected a boolean, got '" + text + "'");
}

std::vector<std::string> split_list(const std::string& text, const char* seps) {
  std::vector<std::string> parts;
  const std::string s = boost::trim_copy(text);
  if (s.empty()) return parts;
  boost::split(parts, s, boost::is_any_of(seps));
  for (auto& p : parts) boost::trim(p);
  return parts;
}

// Reads one section, rejecting keys outside `allowed`.
class Section {
 public:
  Section(const pt::ptree& root, std::string name, std::set<std::string> allowed)
      : name_(std::move(name)) {
    if (const auto child = root.get_child_optional(pt::ptree::path_type(name_, '\0'))) {
      for (const auto& [key, value] : *child) {
        if (!allowed.contains(key)) throw ConfigError("unknown key '" + key + "' in [" + name_ + "]");
        values_[key] = value.data();
      }
    }
  }

  template <class T>
  void number(const std::string& key, T& out) const {
    if (auto it = values_.find(key); it != values_.end()) out = parse_number<T>(it->second, where(key));
  }
  void text(const std::string& key, std::string& out) const {
    if (auto it = values_.find(key); it != values_.end()) out = boost::trim_copy(it->second);
  }
  void flag(const std::string& key, bool& out) const {
    if (auto it = values_.find(key); it != values_.end()) out = parse_bool(it->second, where(key));
  }
  template <class T>
  void list(const std::string& key, std::vector<T>& out) const {
    if (auto it = values_.find(key); it != values_.end()) {
      out.clear();
      for (const auto& p : split_list(it->second, ",")) out.push_back(parse_number<T>(p, where(key)));
    }
  }
  std::string where(const std::string& key) const { return "[" + name_ + "] " + key; }
  bool has(const std::string& key) const { return values_.contains(key); }
  const std::string& raw(const std::string& key) const { return values_.at(key); }

 private:
  std::string name_;
  std::map<std::string, std::string> values_;
};

}  // namespace

ExperimentConfig parse_config(std::istream& in) {
  pt::ptree root;
  try {
    pt::read_ini(in, root);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  static const std::set<std::string> sections{"run",      "system",   "rates", "theorem1",
                                              "theorem2", "theorem3", "core",  "scan"};
  for (const auto& [name, child] : root) {
    if (!sections.contains(name)) throw ConfigError("unknown section [" + name + "]");
    if (!child.data().empty()) throw ConfigError("key '" + name + "' outside any section");
  }

  ExperimentConfig cfg;
  const Section run(root, "run", {"pipeline", "name", "seed", "eta", "out_dir", "verify_fraction"});
  if (run.has("pipeline")) {
    cfg.pipeline = parse_pipeline(boost::trim_copy(run.raw("pipeline")));
    cfg.declared_pipeline = cfg.pipeline;
  }
  run.text("name", cfg.name);
  run.number("seed", cfg.seed);
  run.number("eta", cfg.eta);
  run.text("out_dir", cfg.out_dir);
  run.number("verify_fraction", cfg.verify_fraction);

  auto& sys = cfg.system;
  const Section system(root, "system",
                       {"model", "n", "delta", "base", "digits", "side", "dim", "shifts", "roof"});
  system.text("model", sys.model);
  system.number("n", sys.n);
  system.number("delta", sys.delta);
  system.number("base", sys.base);
  system.number("digits", sys.digits);
  system.number("side", sys.side);
  system.number("dim", sys.dim);
  system.text("roof", sys.roof);
  if (system.has("shifts")) {
    for (const auto& vec : split_list(system.raw("shifts"), ";")) {
      IntVec v;
      for (const auto& c : split_list(vec, ",")) v.push_back(parse_number<std::int64_t>(c, system.where("shifts")));
      sys.shifts.push_back(std::move(v));
    }
  }

  const Section rates(root, "rates", {"kind", "alpha", "values"});
  rates.text("kind", cfg.rates.kind);
  rates.number("alpha", cfg.rates.alpha);
  rates.list("values", cfg.rates.values);

  auto& t1 = cfg.theorem1;
  const Section s1(root, "theorem1", {"eps", "K", "aprime", "time_measure", "max_doublings"});
  s1.number("eps", t1.eps);
  s1.number("K", t1.K);
  s1.text("aprime", t1.aprime);
  s1.text("time_measure", t1.time_measure);
  s1.number("max_doublings", t1.max_doublings);

  auto& t2 = cfg.theorem2;
  const Section s2(root, "theorem2", {"eps", "c", "J", "random_weights", "aprime"});
  s2.number("eps", t2.eps);
  s2.number("c", t2.c);
  s2.number("J", t2.J);
  s2.number("random_weights", t2.random_weights);
  s2.text("aprime", t2.aprime);

  auto& t3 = cfg.theorem3;
  const Section s3(root, "theorem3",
                   {"eps", "K", "observable", "deviation", "allow_signed", "budget_shrink",
                    "tower_measure_factor", "height_factor", "height_growth", "max_escalations",
                    "grid_ratio"});
  s3.number("eps", t3.eps);
  s3.number("K", t3.K);
  s3.text("observable", t3.observable);
  if (s3.has("deviation")) {
    const auto mode = boost::trim_copy(s3.raw("deviation"));
    if (mode == "two-sided") {
      t3.mode = DeviationMode::two_sided;
    } else if (mode == "one-sided") {
      t3.mode = DeviationMode::one_sided;
    } else {
      throw ConfigError("[theorem3] deviation must be two-sided or one-sided");
    }
  }
  s3.flag("allow_signed", t3.allow_signed);
  s3.number("budget_shrink", t3.budget_shrink);
  s3.number("tower_measure_factor", t3.tower_measure_factor);
  s3.number("height_factor", t3.height_factor);
  s3.number("height_growth", t3.height_growth);
  s3.number("max_escalations", t3.max_escalations);
  s3.number("grid_ratio", t3.grid_ratio);

  const Section core(root, "core", {"sizes", "observables", "max_index", "tolerance"});
  core.list("sizes", cfg.core.sizes);
  core.number("observables", cfg.core.observables);
  core.number("max_index", cfg.core.max_index);
  core.number("tolerance", cfg.core.tolerance);

  auto& sc = cfg.scan;
  const Section scan(root, "scan", {"family", "observable", "from", "to", "step", "kernel_cells", "with_rates"});
  scan.text("family", sc.family);
  scan.text("observable", sc.observable);
  scan.number("from", sc.from);
  scan.number("to", sc.to);
  scan.number("step", sc.step);
  scan.number("kernel_cells", sc.kernel_cells);
  scan.flag("with_rates", sc.with_rates);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse_config(in);
}

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

void validate_system(const SystemSpec& s, Pipeline p) {
  static const std::set<std::string> models{"cyclic", "odometer", "torus", "special-flow"};
  require(models.contains(s.model), "[system] model must be cyclic, odometer, torus or special-flow");
  require(s.delta > 0.0 && std::isfinite(s.delta), "[system] delta must be positive");
  if (s.model == "cyclic" || s.model == "special-flow") require(s.n >= 1, "[system] n must be at least 1");
  if (s.model == "odometer") {
    require(s.base >= 2, "[system] odometer base must be at least 2");
    require(s.digits >= 1, "[system] odometer digits must be at least 1");
  }
  if (s.model == "torus") {
    require(s.side >= 2 && s.dim >= 1, "[system] torus needs side >= 2 and dim >= 1");
    require(s.shifts.empty() || s.shifts.size() == s.dim, "[system] shifts must list one vector per generator");
    for (const auto& v : s.shifts) require(v.size() == s.dim, "[system] each shift vector needs dim entries");
  }
  switch (p) {
    case Pipeline::theorem1:
      require(s.model != "torus", "theorem1 needs a flow model: cyclic, odometer or special-flow");
      break;
    case Pipeline::theorem2:
      require(s.model == "torus", "theorem2 needs the torus model");
      break;
    case Pipeline::theorem3:
    case Pipeline::rate_scan:
      require(s.model != "torus", "this pipeline needs a single automorphism, not a torus action");
      break;
    case Pipeline::core_checks:
      break;
  }
}

}  // namespace

void validate(const ExperimentConfig& c) {
  require(c.eta >= 0.0 && std::isfinite(c.eta), "[run] eta must be non-negative");
  require(c.verify_fraction >= 0.0 && c.verify_fraction <= 1.0, "[run] verify_fraction must lie in [0, 1]");
  validate_system(c.system, c.pipeline);
  const bool needs_rates = c.pipeline != Pipeline::core_checks;
  if (needs_rates) {
    try {
      (void)c.rates.build();
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("[rates] ") + e.what());
    }
  }
  switch (c.pipeline) {
    case Pipeline::theorem1: {
      const auto& t = c.theorem1;
      require(t.eps > 0.0 && t.eps < 1.0 / 3.0, "[theorem1] eps must satisfy 0 < eps < 1/3");
      require(t.max_doublings >= 0, "[theorem1] max_doublings must be non-negative");
      require(t.time_measure == "uniform-integers" || t.time_measure == "point-mass",
              "[theorem1] time_measure must be uniform-integers or point-mass");
      break;
    }
    case Pipeline::theorem2: {
      const auto& t = c.theorem2;
      require(t.eps > 0.0 && t.eps < 1.0, "[theorem2] eps must lie in (0, 1)");
      require(t.c > 0.0 && t.c < 1.0, "[theorem2] c must lie in (0, 1)");
      break;
    }
    case Pipeline::theorem3: {
      const auto& t = c.theorem3;
      require(t.eps > 0.0 && t.eps < 1.0, "[theorem3] eps must lie in (0, 1)");
      require(t.budget_shrink > 0.0 && t.budget_shrink < 1.0, "[theorem3] budget_shrink must lie in (0, 1)");
      require(t.tower_measure_factor > 0.0, "[theorem3] tower_measure_factor must be positive");
      require(t.height_factor >= 1.0, "[theorem3] height_factor must be at least 1");
      require(t.height_growth > 1.0, "[theorem3] height_growth must exceed 1");
      require(t.max_escalations >= 0, "[theorem3] max_escalations must be non-negative");
      require(t.grid_ratio > 1.0, "[theorem3] grid_ratio must exceed 1");
      break;
    }
    case Pipeline::core_checks: {
      require(c.core.max_index >= 1, "[core] max_index must be at least 1");
      require(c.core.tolerance > 0.0, "[core] tolerance must be positive");
      for (auto n : c.core.sizes) require(n >= 2, "[core] sizes must be at least 2");
      break;
    }
    case Pipeline::rate_scan: {
      const auto& s = c.scan;
      require(s.family == "cesaro" || s.family == "flow-uniform" || s.family == "kernel-uniform",
              "[scan] family must be cesaro, flow-uniform or kernel-uniform");
      require(s.from >= 1 && s.to >= s.from, "[scan] needs 1 <= from <= to");
      require(s.step >= 1, "[scan] step must be at least 1");
      require(s.kernel_cells >= 1, "[scan] kernel_cells must be at least 1");
      break;
    }
  }
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["run"] = {{"pipeline", to_string(pipeline)}, {"name", stem()},  {"seed", seed},
              {"eta", eta},                      {"out_dir", out_dir}, {"verify_fraction", verify_fraction}};
  j["system"] = {{"model", system.model}, {"n", system.n},         {"delta", system.delta},
                 {"base", system.base},   {"digits", system.digits}, {"side", system.side},
                 {"dim", system.dim},     {"shifts", system.shifts}, {"roof", system.roof}};
  j["rates"] = {{"kind", rates.kind}, {"alpha", rates.alpha}, {"values", rates.values}};
  switch (pipeline) {
    case Pipeline::theorem1:
      j["theorem1"] = {{"eps", theorem1.eps},
                       {"K", theorem1.K},
                       {"aprime", theorem1.aprime},
                       {"time_measure", theorem1.time_measure},
                       {"max_doublings", theorem1.max_doublings}};
      break;
    case Pipeline::theorem2:
      j["theorem2"] = {{"eps", theorem2.eps},
                       {"c", theorem2.c},
                       {"J", theorem2.J},
                       {"random_weights", theorem2.random_weights},
                       {"aprime", theorem2.aprime}};
      break;
    case Pipeline::theorem3:
      j["theorem3"] = {{"eps", theorem3.eps},
                       {"K", theorem3.K},
                       {"observable", theorem3.observable},
                       {"deviation", theorem3.mode == DeviationMode::two_sided ? "two-sided" : "one-sided"},
                       {"allow_signed", theorem3.allow_signed},
                       {"budget_shrink", theorem3.budget_shrink},
                       {"tower_measure_factor", theorem3.tower_measure_factor},
                       {"height_factor", theorem3.height_factor},
                       {"height_growth", theorem3.height_growth},
                       {"max_escalations", theorem3.max_escalations},
                       {"grid_ratio", theorem3.grid_ratio}};
      break;
    case Pipeline::core_checks:
      j["core"] = {{"sizes", core.sizes},
                   {"observables", core.observables},
                   {"max_index", core.max_index},
                   {"tolerance", core.tolerance}};
      break;
    case Pipeline::rate_scan:
      j["scan"] = {{"family", scan.family}, {"observable", scan.observable},     {"from", scan.from},
                   {"to", scan.to},         {"step", scan.step},                 {"kernel_cells", scan.kernel_cells},
                   {"with_rates", scan.with_rates}};
      break;
  }
  return j;
}

}  // namespace slowconv
