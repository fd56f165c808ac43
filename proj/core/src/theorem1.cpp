#include <algorithm>
#include <cmath>
#include <string>

#include "slowconv/adversary.hpp"
#include "slowconv/error.hpp"

namespace slowconv {

std::vector<std::int64_t> select_budget_indices(const RateSeq& rates, double eps, std::size_t count,
                                                std::int64_t from) {
  if (!(eps > 0.0)) throw InvalidArgument("budget eps must be positive");
  std::vector<std::int64_t> out;
  out.reserve(count);
  long double spent = 0;
  std::int64_t next = std::max<std::int64_t>(from, 1);
  for (std::size_t k = 0; k < count; ++k) {
    const double room = static_cast<double>((static_cast<long double>(eps) - spent) / 2);
    const std::int64_t n = rates.first_below(room, next);
    out.push_back(n);
    spent += rates(n);
    next = n + 1;
  }
  return out;
}

double truncation_radius(const TimeMeasure& nu, double mass) {
  std::vector<double> radii{0.0};
  for (double t : nu.times) radii.push_back(std::fabs(t));
  std::sort(radii.begin(), radii.end());
  radii.erase(std::unique(radii.begin(), radii.end()), radii.end());
  // nu([-L, L]) is non-decreasing in L
  std::size_t lo = 0;
  std::size_t hi = radii.size() - 1;
  if (!(nu.mass_within(radii[hi]) > mass)) {
    throw Infeasible("time measure never exceeds mass " + std::to_string(mass));
  }
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (nu.mass_within(radii[mid]) > mass) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return radii[lo];
}

namespace {

// First atom, in cycle order, of the longest run of atoms outside `s`.
Atom longest_gap_start(const Automorphism& t, const MSet& s) {
  const auto orbit = t.orbit_order();
  const std::size_t n = orbit.size();
  std::size_t first_in = n;
  for (std::size_t p = 0; p < n; ++p) {
    if (s.contains(orbit[p])) {
      first_in = p;
      break;
    }
  }
  if (first_in == n) return orbit[0];
  std::size_t best_len = 0, best_start = 0, run = 0, run_start = 0;
  for (std::size_t i = 1; i <= n; ++i) {
    const std::size_t p = (first_in + i) % n;
    if (!s.contains(orbit[p])) {
      if (run == 0) run_start = p;
      ++run;
    } else {
      if (run > best_len) {
        best_len = run;
        best_start = run_start;
      }
      run = 0;
    }
  }
  return best_len == 0 ? orbit[0] : orbit[best_start];
}

}  // namespace

Theorem1Result theorem1_construct(const DiscreteFlow& flow, const TimeMeasureFamily& nus,
                                  const RateSeq& rates, const MSet& aprime,
                                  const Theorem1Options& options) {
  require_same_space(flow.space(), aprime.space());
  const double eps = options.eps;
  if (!(eps > 0.0 && eps < 1.0 / 3.0)) {
    throw InvalidArgument("theorem 1 needs 0 < eps < 1/3 so that (1 - eps) 2a - eps a > a");
  }
  if (!flow.step_map().is_single_cycle()) {
    throw InvalidArgument("theorem 1 needs a single-cycle (ergodic) step map");
  }
  if (options.max_doublings < 0) throw InvalidArgument("max_doublings must be non-negative");
  const double m_aprime = measure(aprime);
  if (!(m_aprime > 0.0)) throw InvalidArgument("A' must have positive measure");

  Theorem1Result result{.A = aprime,
                        .plan = BudgetPlan{.eps = eps, .n = {}, .a = {}, .eps_k = {}, .L = {}},
                        .stages = {},
                        .certificates = {},
                        .m_a_floor = m_aprime - eps,
                        .measure_aprime = m_aprime,
                        .measure_a = m_aprime,
                        .measure_sym_diff = 0,
                        .violations = {}};
  if (options.K == 0) return result;
  if (!(result.m_a_floor > 0.0)) {
    throw Infeasible("m(A') = " + std::to_string(m_aprime) + " must exceed eps for the band budget");
  }

  auto& plan = result.plan;
  plan.n = select_budget_indices(rates, eps, options.K);
  std::vector<TimeMeasure> measures;
  long double budget = 0;
  for (std::int64_t n : plan.n) {
    const double a = rates(n);
    budget += a;
    plan.a.push_back(a);
    measures.push_back(nus(n));
    plan.L.push_back(truncation_radius(measures.back(), 1.0 - eps * a));
  }
  if (!(budget < eps)) result.violations.push_back("sum of a_n(k) is not below eps");

  const Atom anchor = longest_gap_start(flow.step_map(), aprime);
  std::vector<double> band_measure(options.K);
  std::vector<int> doublings(options.K, 0);
  for (std::size_t k = 0; k < options.K; ++k) band_measure[k] = 2.0 * plan.a[k] / result.m_a_floor;

  while (true) {
    result.stages.clear();
    result.certificates.clear();
    MSet removed(flow.space());
    for (std::size_t k = 0; k < options.K; ++k) {
      if (band_measure[k] > 1.0) {
        throw Infeasible("band " + std::to_string(k + 1) + " would need measure " +
                         std::to_string(band_measure[k]) + " > 1");
      }
      auto band = build_flow_band(flow, plan.L[k], band_measure[k], eps, anchor, options.eta);
      removed = removed | band.set;
      const double residual = 1.0 - measures[k].mass_within(plan.L[k]);
      result.stages.push_back(Theorem1Stage{.n = plan.n[k],
                                            .a = plan.a[k],
                                            .L = plan.L[k],
                                            .residual = residual,
                                            .band_measure = band_measure[k],
                                            .doublings = doublings[k],
                                            .band = std::move(band),
                                            .chain_bound = 0,
                                            .truncation_gap = 0});
    }
    result.A = aprime - removed;
    result.measure_a = measure(result.A);
    result.measure_sym_diff = measure(aprime ^ result.A);
    if (result.A.empty()) throw Infeasible("the bands swallow A'");

    const Obs ind = Obs::indicator(result.A);
    bool retry = false;
    for (std::size_t k = 0; k < options.K; ++k) {
      auto& st = result.stages[k];
      const Obs p = flow_measure_average(flow, measures[k], ind);
      const auto trunc = truncated_average(flow, measures[k], st.L, ind);
      const double lhs = l1_dev(p, result.measure_a);
      const double m_core = measure(st.band.cert.core);
      st.chain_bound = m_core * result.measure_a - st.residual;
      st.truncation_gap = l1_norm(add(p, scale(trunc.q, -1.0)));

      CertContext ctx;
      ctx.L = st.L;
      ctx.measure_v = measure(st.band.set);
      ctx.measure_core = m_core;
      ctx.measure_a = result.measure_a;
      ctx.residual = st.residual;
      ctx.extra = {{"chain_bound", st.chain_bound},
                   {"truncation_gap", st.truncation_gap},
                   {"band_measure", st.band_measure},
                   {"doublings", static_cast<double>(st.doublings)}};
      auto cert = Certificate::make("theorem1", static_cast<int>(k + 1), st.n, lhs, st.a, options.eta,
                                    std::move(ctx));
      if (!cert.pass && doublings[k] < options.max_doublings && 2.0 * band_measure[k] <= 1.0) {
        band_measure[k] *= 2.0;
        ++doublings[k];
        retry = true;
      }
      result.certificates.push_back(std::move(cert));
    }
    if (!retry) break;
  }

  long double band_total = 0;
  bool escalated = false;
  for (const auto& st : result.stages) {
    band_total += measure(st.band.set);
    escalated = escalated || st.doublings > 0;
  }
  if (!escalated && static_cast<double>(band_total) > 2.0 * static_cast<double>(budget) / result.m_a_floor + 1e-12) {
    result.violations.push_back("band measures exceed (2 / m_A_floor) sum a_n(k)");
  }
  if (!(result.measure_sym_diff < eps)) result.violations.push_back("m(A' ^ A) is not below eps");
  for (std::size_t k = 0; k < result.stages.size(); ++k) {
    const auto& st = result.stages[k];
    if (result.certificates[k].lhs < st.chain_bound - 1e-10) {
      result.violations.push_back("index " + std::to_string(k + 1) + " breaks lhs >= m(core) m(A) - residual");
    }
    if (st.residual > eps * st.a) {
      result.violations.push_back("index " + std::to_string(k + 1) + " residual exceeds eps a_n");
    }
  }
  return result;
}

}  // namespace slowconv
