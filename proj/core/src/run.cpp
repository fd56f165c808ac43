#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include <boost/algorithm/string.hpp>

#include "slowconv/error.hpp"
#include "slowconv/harness.hpp"

namespace slowconv {

namespace {

constexpr double kSpotTolerance = 1e-10;

double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double parse_double(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::logic_error&) {
    throw ConfigError(where + ": cannot parse '" + s + "'");
  }
}

// lower-half | upper-half | full | arc:a:b (atoms a..b-1) | fraction:p
MSet make_set(const std::string& spec, const SpacePtr& space) {
  const std::size_t n = space->size();
  if (spec == "lower-half") return MSet::range(space, 0, n / 2);
  if (spec == "upper-half") return MSet::range(space, n / 2, n);
  if (spec == "full") return MSet::full(space);
  std::vector<std::string> parts;
  boost::split(parts, spec, boost::is_any_of(":"));
  if (parts.size() == 3 && parts[0] == "arc") {
    const auto a = static_cast<std::size_t>(parse_double(parts[1], "set arc"));
    const auto b = static_cast<std::size_t>(parse_double(parts[2], "set arc"));
    if (!(a < b && b <= n)) throw ConfigError("set '" + spec + "' must satisfy a < b <= N");
    return MSet::range(space, a, b);
  }
  if (parts.size() == 2 && parts[0] == "fraction") {
    const double p = parse_double(parts[1], "set fraction");
    if (!(p > 0.0 && p <= 1.0)) throw ConfigError("set '" + spec + "' needs 0 < p <= 1");
    return MSet::range(space, 0, atoms_for_measure(p, n));
  }
  throw ConfigError("unknown set '" + spec + "'");
}

// Fractional position of each atom: radical inverse on the odometer, x/N
// otherwise.
Obs coordinate(const ExperimentConfig& cfg, const SpacePtr& space) {
  if (cfg.system.model == "odometer") return odometer_coordinate(space, cfg.system.base, cfg.system.digits);
  std::vector<double> v(space->size());
  for (Atom x = 0; x < v.size(); ++x) v[x] = static_cast<double>(x) / static_cast<double>(v.size());
  return Obs::from_values(space, std::move(v));
}

// indicator:<set> | constant:c | coordinate | one-plus-coordinate
Obs make_observable(const std::string& spec, const ExperimentConfig& cfg, const SpacePtr& space) {
  if (spec == "coordinate") return coordinate(cfg, space);
  if (spec == "one-plus-coordinate") return add(Obs::constant(space, 1.0), coordinate(cfg, space));
  if (spec.starts_with("indicator:")) return Obs::indicator(make_set(spec.substr(10), space));
  if (spec.starts_with("constant:")) return Obs::constant(space, parse_double(spec.substr(9), "observable"));
  throw ConfigError("unknown observable '" + spec + "'");
}

// constant:r | pattern:r0,r1,... (repeated over the base atoms)
Obs make_roof(const std::string& spec, const SpacePtr& base) {
  std::vector<double> values(base->size());
  if (spec.starts_with("constant:")) {
    std::fill(values.begin(), values.end(), parse_double(spec.substr(9), "[system] roof"));
  } else if (spec.starts_with("pattern:")) {
    std::vector<std::string> parts;
    boost::split(parts, spec.substr(8), boost::is_any_of(","));
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = parse_double(parts[i % parts.size()], "[system] roof");
  } else {
    throw ConfigError("[system] roof must be constant:r or pattern:r0,r1,...");
  }
  return Obs::from_values(base, std::move(values));
}

DiscreteFlow make_flow(const ExperimentConfig& cfg) {
  const auto& s = cfg.system;
  if (s.model == "special-flow") {
    const auto base = cyclic_system(s.n);
    return special_flow(base, make_roof(s.roof, base.space()), s.delta);
  }
  if (s.model == "odometer") return DiscreteFlow(odometer_system(s.base, s.digits), s.delta);
  return DiscreteFlow(cyclic_system(s.n), s.delta);
}

Automorphism make_automorphism(const ExperimentConfig& cfg) { return make_flow(cfg).step_map(); }

// Atoms of the cycle through atom 0, walked with T itself.
std::vector<Atom> walk_cycle(const Automorphism& t) {
  std::vector<Atom> seq{0};
  for (Atom x = t(0); x != 0; x = t(x)) seq.push_back(x);
  return seq;
}

// sum_{i=a..b} g(seq[i mod L]) for any integers a <= b, via prefix sums.
class CircularSums {
 public:
  CircularSums(const std::vector<Atom>& seq, const Obs& g) : prefix_(seq.size() + 1, 0.0L) {
    for (std::size_t i = 0; i < seq.size(); ++i) prefix_[i + 1] = prefix_[i] + g[seq[i]];
  }
  long double sum(std::int64_t a, std::int64_t b) const {
    const auto len = static_cast<std::int64_t>(prefix_.size() - 1);
    auto at = [&](std::int64_t i) {  // sum of positions 0..i-1, any i
      const std::int64_t q = i >= 0 ? i / len : -((-i + len - 1) / len);
      const std::int64_t r = i - q * len;
      return static_cast<long double>(q) * prefix_[len] + prefix_[r];
    };
    return at(b + 1) - at(a);
  }

 private:
  std::vector<long double> prefix_;
};

// sum_k w_k g(T^{s_k} x), either by a sliding window (equal weights on a
// contiguous run of powers) or by direct per-atom summation.
std::vector<double> direct_combination(const Automorphism& t, const Obs& g,
                                       const std::map<std::int64_t, long double>& terms) {
  const std::size_t n = g.size();
  std::vector<double> out(n, 0.0);
  const auto lo = terms.begin()->first;
  const auto hi = terms.rbegin()->first;
  const long double w0 = terms.begin()->second;
  const bool contiguous = static_cast<std::int64_t>(terms.size()) == hi - lo + 1 &&
                          std::all_of(terms.begin(), terms.end(), [&](const auto& kv) { return kv.second == w0; });
  if (contiguous && t.is_single_cycle()) {
    const auto seq = walk_cycle(t);
    const CircularSums sums(seq, g);
    for (std::size_t p = 0; p < seq.size(); ++p) {
      const auto ip = static_cast<std::int64_t>(p);
      out[seq[p]] = static_cast<double>(w0 * sums.sum(ip + lo, ip + hi));
    }
    return out;
  }
  for (Atom x = 0; x < n; ++x) {
    long double acc = 0;
    for (const auto& [s, w] : terms) acc += w * g[t.apply_power(x, s)];
    out[x] = static_cast<double>(acc);
  }
  return out;
}

double l1_dev_of(const SpacePtr& space, const std::vector<double>& v, double c) {
  long double acc = 0;
  for (Atom x = 0; x < v.size(); ++x) acc += std::fabs(static_cast<long double>(v[x]) - c) * space->weight(x);
  return static_cast<double>(acc);
}

std::vector<IntVec> default_shifts(std::size_t d) {
  std::vector<IntVec> shifts(d, IntVec(d, 0));
  for (std::size_t i = 0; i < d; ++i) shifts[i][i] = 1;
  return shifts;
}

struct PipelineOutput {
  nlohmann::json plan;
  std::vector<Certificate> certificates;
  std::vector<std::string> violations;
  std::vector<PlotRow> plot;
  std::size_t exceedances = 0;
  // Measured quantity of a certificate row, recomputed by another route.
  std::function<double(std::size_t row, const Certificate& cert)> recompute;
  std::function<double(const Certificate&)> measured = [](const Certificate& c) { return c.lhs; };
};

nlohmann::json context_json(const CertContext& c) {
  nlohmann::json j = nlohmann::json::object();
  auto put = [&](const char* key, const auto& v) {
    if (v) j[key] = *v;
  };
  put("L", c.L);
  put("eps_k", c.eps_k);
  put("h", c.height);
  put("measure_v", c.measure_v);
  put("measure_core", c.measure_core);
  put("measure_a", c.measure_a);
  put("residual", c.residual);
  put("weights", c.weight_id);
  for (const auto& [k, v] : c.extra) j[k] = v;
  return j;
}

// ---------------------------------------------------------------------------

PipelineOutput run_core_checks(const ExperimentConfig& cfg) {
  PipelineOutput out;
  std::vector<std::size_t> sizes = cfg.core.sizes;
  if (sizes.empty()) sizes.push_back(make_automorphism(cfg).size());

  struct Case {
    Automorphism t;
    Obs f;
  };
  std::vector<Case> cases;
  std::vector<std::size_t> row_case;
  std::mt19937_64 rng(cfg.seed);
  const double tol = cfg.core.tolerance;
  for (std::size_t n : sizes) {
    const auto t = cyclic_system(n);
    for (std::size_t i = 0; i < cfg.core.observables; ++i) {
      std::vector<double> v(n);
      for (auto& x : v) x = 2.0 * unit_uniform(rng) - 1.0;
      cases.push_back(Case{t, Obs::from_values(t.space(), std::move(v))});
      const auto& c = cases.back();
      const double norm = l1_norm(c.f);
      const std::int64_t top = std::min<std::int64_t>(cfg.core.max_index, static_cast<std::int64_t>(n) - 1);
      for (std::int64_t N = 1; N <= top; ++N) {
        const double gap = telescope_gap(c.t, c.f, N);
        const double diff = std::fabs(gap * static_cast<double>(N + 1) - norm);
        CertContext ctx;
        ctx.extra = {{"cycle", static_cast<double>(n)}, {"l1_norm", norm}, {"gap", gap}};
        out.certificates.push_back(
            Certificate::make("telescope", static_cast<int>(cases.size()), N, tol, diff, 0.0, std::move(ctx)));
        row_case.push_back(cases.size() - 1);
      }
    }
  }
  out.plan = {{"sizes", sizes}, {"observables", cfg.core.observables}, {"max_index", cfg.core.max_index}};
  out.measured = [](const Certificate& c) { return c.rhs; };
  out.recompute = [cases = std::move(cases), row_case = std::move(row_case)](std::size_t row,
                                                                            const Certificate& cert) {
    const auto& c = cases[row_case[row]];
    const std::int64_t N = cert.n;
    // (N/(N+1)) P_N f - P_{N+1} f summed directly from the orbit
    const auto seq = walk_cycle(c.t);
    std::vector<double> diff(seq.size());
    for (std::size_t p = 0; p < seq.size(); ++p) {
      long double a = 0, b = 0;
      for (std::int64_t i = 1; i <= N; ++i) a += c.f[seq[(p + static_cast<std::size_t>(i)) % seq.size()]];
      b = a + c.f[seq[(p + static_cast<std::size_t>(N) + 1) % seq.size()]];
      diff[seq[p]] = static_cast<double>(a / (N + 1) - b / (N + 1));
    }
    const double gap = l1_dev_of(c.f.space(), diff, 0.0);
    return std::fabs(gap * static_cast<double>(N + 1) - l1_norm(c.f));
  };
  return out;
}

PipelineOutput run_theorem1(const ExperimentConfig& cfg) {
  PipelineOutput out;
  const auto flow = make_flow(cfg);
  const auto rates = cfg.rates.build();
  const MSet aprime = make_set(cfg.theorem1.aprime, flow.space());
  const bool uniform = cfg.theorem1.time_measure == "uniform-integers";
  TimeMeasureFamily nus = [uniform](std::int64_t n) {
    return uniform ? TimeMeasure::uniform_integers(n) : TimeMeasure::point_mass(0.0);
  };
  Theorem1Options opts{cfg.theorem1.eps, cfg.theorem1.K, cfg.eta, cfg.theorem1.max_doublings};
  auto result = std::make_shared<Theorem1Result>(theorem1_construct(flow, nus, rates, aprime, opts));

  nlohmann::json stages = nlohmann::json::array();
  for (const auto& st : result->stages) {
    stages.push_back({{"n", st.n},
                      {"a_n", st.a},
                      {"L", st.L},
                      {"residual", st.residual},
                      {"band_measure", st.band_measure},
                      {"band_atoms", st.band.arc_length},
                      {"shrink", st.band.shrink},
                      {"core_ratio", st.band.cert.ratio},
                      {"doublings", st.doublings},
                      {"chain_bound", st.chain_bound},
                      {"truncation_gap", st.truncation_gap}});
  }
  out.plan = {{"eps", cfg.theorem1.eps},
              {"K", cfg.theorem1.K},
              {"m_a_floor", result->m_a_floor},
              {"measure_aprime", result->measure_aprime},
              {"measure_a", result->measure_a},
              {"measure_sym_diff", result->measure_sym_diff},
              {"stages", stages}};
  out.certificates = result->certificates;
  out.violations = result->violations;
  out.exceedances = exceedance_count(out.certificates);
  for (const auto& c : out.certificates) out.plot.push_back(PlotRow{c.n, c.lhs, c.rhs});

  out.recompute = [flow, nus, result](std::size_t, const Certificate& cert) {
    const auto nu = nus(cert.n);
    std::map<std::int64_t, long double> terms;
    for (std::size_t i = 0; i < nu.times.size(); ++i) terms[flow.steps(nu.times[i])] += nu.probs[i];
    const auto avg = direct_combination(flow.step_map(), Obs::indicator(result->A), terms);
    return l1_dev_of(flow.space(), avg, measure(result->A));
  };
  return out;
}

PipelineOutput run_theorem2(const ExperimentConfig& cfg) {
  PipelineOutput out;
  const auto& s = cfg.system;
  const auto rates = cfg.rates.build();
  Theorem2Options opts{cfg.theorem2.c, cfg.theorem2.eps, cfg.theorem2.J, cfg.theorem2.random_weights, cfg.seed, cfg.eta};

  std::size_t atoms = 1;
  for (std::size_t i = 0; i < s.dim; ++i) atoms *= s.side;
  if (atoms > kMaxAtoms) throw ConfigError("[system] torus has more than 2^24 atoms");
  // plan first: the action's box must cover the largest selected window
  const auto probe = ProbSpace::uniform(atoms);
  const auto plan = plan_theorem2(rates, measure(make_set(cfg.theorem2.aprime, probe)), opts);
  std::int64_t radius = 1;
  for (auto j : plan.j) radius = std::max(radius, j);

  const auto action = std::make_shared<ZdAction>(
      torus_shift_action(s.dim, s.side, s.shifts.empty() ? default_shifts(s.dim) : s.shifts, radius));
  const MSet aprime = make_set(cfg.theorem2.aprime, action->space());
  const std::size_t d = s.dim;
  WindowFamily windows = [d](std::int64_t j) { return box(d, j); };
  auto result = std::make_shared<Theorem2Result>(theorem2_run(*action, windows, rates, aprime, opts));

  nlohmann::json stages = nlohmann::json::array();
  for (std::size_t i = 0; i < result->plan.j.size(); ++i) {
    const auto& st = result->lemma.stages[i];
    stages.push_back({{"j", result->plan.j[i]},
                      {"a_j", result->plan.a[i]},
                      {"target_measure", result->plan.target_measure[i]},
                      {"measure_v", measure(result->sets[i].set)},
                      {"cube_side", result->sets[i].cube_side},
                      {"cubes", result->sets[i].cubes},
                      {"invariance_ratio", st.invariance.ratio},
                      {"measure_vanishing", st.measure_vanishing},
                      {"vanishing_exact", st.vanishing_exact}});
  }
  out.plan = {{"eps", opts.eps},
              {"c", opts.c},
              {"J", opts.J},
              {"random_weights", opts.random_weights},
              {"box_radius", radius},
              {"m_a_floor", result->plan.m_a_floor},
              {"total_measure", result->plan.total_measure},
              {"measure_a", result->lemma.measure_a},
              {"measure_sym_diff", result->lemma.measure_sym_diff},
              {"exceedances", result->exceedances},
              {"stages", stages}};
  out.certificates = result->certificates;
  out.violations = result->lemma.violations;
  for (const auto& lc : result->lemma.certificates) {
    if (!lc.pass) {
      out.violations.push_back("lemma bound fails at j = " + std::to_string(lc.n) + ", weights " +
                               std::to_string(lc.context.weight_id.value_or(-1)));
    }
  }
  out.exceedances = result->exceedances;
  for (const auto& c : out.certificates) {
    if (c.context.weight_id == 0) out.plot.push_back(PlotRow{c.n, c.lhs, c.rhs});
  }

  out.recompute = [action, result](std::size_t, const Certificate& cert) {
    const auto& w = result->weights[static_cast<std::size_t>(cert.k - 1)]
                                   [static_cast<std::size_t>(cert.context.weight_id.value_or(0))];
    const MSet& a = result->A();
    std::vector<double> avg(a.universe(), 0.0);
    for (Atom x = 0; x < avg.size(); ++x) {
      long double acc = 0;
      for (std::size_t i = 0; i < w.support.size(); ++i) {
        acc += w.weights[i] * (a.contains(action->apply(x, w.support[i])) ? 1.0L : 0.0L);
      }
      avg[x] = static_cast<double>(acc);
    }
    return l1_dev_of(a.space(), avg, measure(a));
  };
  return out;
}

PipelineOutput run_theorem3(const ExperimentConfig& cfg) {
  PipelineOutput out;
  const auto t = make_automorphism(cfg);
  const auto rates = cfg.rates.build();
  const Obs f = make_observable(cfg.theorem3.observable, cfg, t.space());
  const auto& s3 = cfg.theorem3;
  Theorem3Options opts{s3.eps,           s3.K,
                       s3.mode,          s3.allow_signed,
                       s3.budget_shrink, s3.tower_measure_factor,
                       s3.height_factor, s3.height_growth,
                       s3.max_escalations, s3.grid_ratio,
                       cfg.eta};
  auto result = std::make_shared<Theorem3Result>(theorem3_construct(t, f, rates, opts));

  nlohmann::json stages = nlohmann::json::array();
  for (const auto& st : result->stages) {
    stages.push_back({{"n", st.n},
                      {"a_n", st.a},
                      {"eps_k", st.eps_k},
                      {"grid", st.grid},
                      {"grid_fraction", st.grid_fraction},
                      {"height", st.tower.height},
                      {"columns", st.tower.columns},
                      {"measure_v", measure(st.tower.body)},
                      {"escalations", st.escalations},
                      {"provisional_fraction", st.provisional_fraction},
                      {"one_sided_fraction", st.one_sided_fraction},
                      {"two_sided_fraction", st.two_sided_fraction}});
  }
  const auto& sum = result->summary;
  out.plan = {{"eps", s3.eps},
              {"K", s3.K},
              {"deviation", s3.mode == DeviationMode::two_sided ? "two-sided" : "one-sided"},
              {"measure_y", result->measure_y},
              {"exceedance_all", sum.measure_all},
              {"exceedance_threshold", sum.threshold},
              {"exceedance_at_least", sum.measure_at_least},
              {"stages", stages}};
  out.certificates = result->certificates;
  out.violations = result->violations;
  out.exceedances = exceedance_count(out.certificates);
  const double mean = integral(result->f_tilde);
  for (const auto& st : result->stages) {
    out.plot.push_back(PlotRow{st.n, l1_dev(cesaro(t, result->f_tilde, st.n), mean), st.a});
  }

  out.recompute = [t, result, mode = s3.mode](std::size_t, const Certificate& cert) {
    if (cert.kind == "theorem3_measure_y") {
      MSet removed(t.space());
      for (const auto& st : result->stages) {
        for (std::size_t i = 1; i <= st.tower.height; ++i) removed = removed | st.tower.level(i);
      }
      return 1.0 - measure(removed);
    }
    const auto& st = result->stages[static_cast<std::size_t>(cert.k - 1)];
    const auto seq = walk_cycle(t);
    const CircularSums sums(seq, result->f_tilde);
    const double mean = integral(result->f_tilde);
    long double frac = 0;
    for (std::size_t p = 0; p < seq.size(); ++p) {
      const auto ip = static_cast<std::int64_t>(p);
      const double d = static_cast<double>(sums.sum(ip + 1, ip + st.n) / st.n) - mean;
      const bool hit = mode == DeviationMode::two_sided ? std::fabs(d) > st.eps_k : d > st.eps_k;
      if (hit) frac += t.space()->weight(seq[p]);
    }
    return static_cast<double>(frac);
  };
  return out;
}

PipelineOutput run_rate_scan(const ExperimentConfig& cfg) {
  PipelineOutput out;
  const auto flow = make_flow(cfg);
  const auto& sc = cfg.scan;
  const Obs f = make_observable(sc.observable, cfg, flow.space());
  const double mean = integral(f);
  std::optional<RateSeq> rates;
  if (sc.with_rates) rates = cfg.rates.build();
  const auto kernel = Kernel::uniform(0.0, 1.0, sc.kernel_cells);
  for (std::int64_t n = sc.from; n <= sc.to; n += sc.step) {
    double dev = 0;
    if (sc.family == "cesaro") {
      dev = l1_dev(cesaro(flow.step_map(), f, n), mean);
    } else if (sc.family == "flow-uniform") {
      dev = l1_dev(flow_measure_average(flow, TimeMeasure::uniform_integers(n), f), mean);
    } else {
      dev = l1_dev(kernel_average(flow, kernel, static_cast<double>(n), f), mean);
    }
    out.plot.push_back(PlotRow{n, dev, rates ? std::optional<double>((*rates)(n)) : std::nullopt});
  }
  out.plan = {{"family", sc.family}, {"observable", sc.observable}, {"points", out.plot.size()}};
  out.recompute = [](std::size_t, const Certificate& cert) { return cert.lhs; };
  return out;
}

}  // namespace

RunReport run(const ExperimentConfig& config) {
  validate(config);
  const auto start = std::chrono::steady_clock::now();
  PipelineOutput out;
  switch (config.pipeline) {
    case Pipeline::core_checks:
      out = run_core_checks(config);
      break;
    case Pipeline::theorem1:
      out = run_theorem1(config);
      break;
    case Pipeline::theorem2:
      out = run_theorem2(config);
      break;
    case Pipeline::theorem3:
      out = run_theorem3(config);
      break;
    case Pipeline::rate_scan:
      out = run_rate_scan(config);
      break;
  }

  RunReport report;
  report.config = config;
  report.plan = std::move(out.plan);
  report.certificates = std::move(out.certificates);
  report.exceedances = out.exceedances;
  report.violations = std::move(out.violations);
  report.plot = std::move(out.plot);

  const std::size_t rows = report.certificates.size();
  if (rows > 0 && config.verify_fraction > 0.0) {
    const auto want = std::min(rows, static_cast<std::size_t>(std::ceil(config.verify_fraction * static_cast<double>(rows))));
    std::vector<std::size_t> all(rows);
    std::iota(all.begin(), all.end(), 0);
    std::vector<std::size_t> picked;
    std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
    std::sample(all.begin(), all.end(), std::back_inserter(picked), want, rng);
    for (std::size_t row : picked) {
      const auto& cert = report.certificates[row];
      const double reported = out.measured(cert);
      const double again = out.recompute(row, cert);
      const bool agree = std::fabs(reported - again) <= kSpotTolerance;
      report.spot_checks.push_back(SpotCheck{row, reported, again, agree});
      if (!agree) {
        report.violations.push_back("spot check of row " + std::to_string(row) + " disagrees: " +
                                    format_number(reported) + " vs " + format_number(again));
      }
    }
  }

  report.pass = all_pass(report.certificates) && report.violations.empty();
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

nlohmann::json RunReport::to_json() const {
  nlohmann::json certs = nlohmann::json::array();
  for (const auto& c : certificates) {
    certs.push_back({{"kind", c.kind},
                     {"k", c.k},
                     {"n", c.n},
                     {"lhs", c.lhs},
                     {"rhs", c.rhs},
                     {"eta", c.eta},
                     {"margin", c.margin()},
                     {"pass", c.pass},
                     {"context", context_json(c.context)}});
  }
  nlohmann::json spots = nlohmann::json::array();
  for (const auto& s : spot_checks) {
    spots.push_back({{"row", s.row}, {"reported", s.reported}, {"recomputed", s.recomputed}, {"agree", s.agree}});
  }
  return {{"config", config.to_json()},
          {"plan", plan},
          {"certificates", certs},
          {"exceedances", exceedances},
          {"violations", violations},
          {"spot_checks", spots},
          {"wall_seconds", wall_seconds},
          {"pass", pass}};
}

}  // namespace slowconv
