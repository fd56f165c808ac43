#include "slowconv/averaging.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "slowconv/error.hpp"

namespace slowconv {

namespace {

constexpr double kMassTol = 1e-12;
constexpr double kKernelTol = 1e-9;

std::int64_t floor_mod(std::int64_t a, std::int64_t m) {
  const std::int64_t r = a % m;
  return r < 0 ? r + m : r;
}

void check_probability(std::span<const double> p, double tol, const char* what) {
  long double total = 0;
  for (double x : p) {
    if (!std::isfinite(x) || x < 0.0) throw InvalidArgument(std::string(what) + " must be non-negative");
    total += x;
  }
  if (std::fabs(static_cast<double>(total) - 1.0) > tol) {
    throw InvalidArgument(std::string(what) + " must sum to 1");
  }
}

}  // namespace

DiscreteWeights DiscreteWeights::make(std::vector<IntVec> support, std::vector<double> weights) {
  if (support.empty()) throw InvalidArgument("weights need a non-empty support");
  if (support.size() != weights.size()) throw InvalidArgument("support and weights differ in length");
  check_probability(weights, kMassTol, "group weights");
  std::set<IntVec> seen(support.begin(), support.end());
  if (seen.size() != support.size()) throw InvalidArgument("support entries must be distinct");
  return DiscreteWeights{std::move(support), std::move(weights)};
}

DiscreteWeights DiscreteWeights::uniform(std::vector<IntVec> support) {
  const double w = support.empty() ? 0.0 : 1.0 / static_cast<double>(support.size());
  std::vector<double> ws(support.size(), w);
  return make(std::move(support), std::move(ws));
}

std::vector<IntVec> box(std::size_t d, std::int64_t radius) {
  if (d == 0 || radius < 0) throw InvalidArgument("box needs d >= 1 and radius >= 0");
  std::vector<IntVec> out;
  IntVec g(d, -radius);
  while (true) {
    out.push_back(g);
    std::size_t i = 0;
    while (i < d && g[i] == radius) g[i++] = -radius;
    if (i == d) break;
    ++g[i];
  }
  return out;
}

TimeMeasure TimeMeasure::make(std::vector<double> times, std::vector<double> probs) {
  if (times.empty()) throw InvalidArgument("time measure needs a non-empty support");
  if (times.size() != probs.size()) throw InvalidArgument("times and probabilities differ in length");
  for (double t : times) {
    if (!std::isfinite(t)) throw InvalidArgument("support times must be finite");
  }
  check_probability(probs, kMassTol, "time-measure probabilities");
  std::set<double> seen(times.begin(), times.end());
  if (seen.size() != times.size()) throw InvalidArgument("support times must be distinct");
  return TimeMeasure{std::move(times), std::move(probs)};
}

TimeMeasure TimeMeasure::point_mass(double t) { return make({t}, {1.0}); }

TimeMeasure TimeMeasure::uniform_integers(std::int64_t n) {
  if (n < 0) throw InvalidArgument("uniform window needs n >= 0");
  std::vector<double> t;
  for (std::int64_t i = -n; i <= n; ++i) t.push_back(static_cast<double>(i));
  const double p = 1.0 / static_cast<double>(2 * n + 1);
  return make(std::move(t), std::vector<double>(static_cast<std::size_t>(2 * n + 1), p));
}

double TimeMeasure::mass_within(double L) const {
  long double m = 0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (std::fabs(times[i]) <= L) m += probs[i];
  }
  return static_cast<double>(m);
}

Kernel Kernel::make(double r0, double dr, std::vector<double> values) {
  if (!(dr > 0.0) || !std::isfinite(r0)) throw InvalidArgument("kernel grid needs dr > 0");
  if (values.empty()) throw InvalidArgument("kernel needs at least one grid cell");
  long double mass = 0;
  for (double h : values) {
    if (!std::isfinite(h) || h < 0.0) throw InvalidArgument("kernel values must be non-negative");
    mass += static_cast<long double>(h) * dr;
  }
  if (std::fabs(static_cast<double>(mass) - 1.0) > kKernelTol) {
    throw InvalidArgument("kernel quadrature mass must be 1");
  }
  return Kernel{r0, dr, std::move(values)};
}

Kernel Kernel::uniform(double a, double b, std::size_t cells) {
  if (!(b > a) || cells == 0) throw InvalidArgument("uniform kernel needs a < b and cells > 0");
  const double dr = (b - a) / static_cast<double>(cells);
  return make(a, dr, std::vector<double>(cells, 1.0 / (b - a)));
}

Obs power_combination(const Automorphism& t, const Obs& f,
                      std::span<const std::pair<std::int64_t, double>> terms) {
  require_same_space(t.space(), f.space());
  const auto orbit = t.orbit_order();
  const std::size_t n = orbit.size();
  std::vector<double> src(n), acc(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) src[i] = f[orbit[i]];

  for (const auto& [k, w] : terms) {
    if (w == 0.0) continue;
    for (const auto& c : t.cycles()) {
      const auto shift = static_cast<std::size_t>(floor_mod(k, static_cast<std::int64_t>(c.length)));
      const double* s = src.data() + c.start;
      double* a = acc.data() + c.start;
      const std::size_t head = c.length - shift;
      for (std::size_t i = 0; i < head; ++i) a[i] += w * s[i + shift];
      for (std::size_t i = head; i < c.length; ++i) a[i] += w * s[i - head];
    }
  }
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[orbit[i]] = acc[i];
  return Obs::from_values(f.space(), std::move(out));
}

Obs cesaro(const Automorphism& t, const Obs& f, std::int64_t n) {
  require_same_space(t.space(), f.space());
  if (n < 1) throw InvalidArgument("Cesaro average needs N >= 1");
  const auto orbit = t.orbit_order();
  std::vector<double> out(orbit.size());
  std::vector<long double> prefix;
  for (const auto& c : t.cycles()) {
    const std::size_t len = c.length;
    prefix.assign(len + 1, 0.0L);
    for (std::size_t i = 0; i < len; ++i) prefix[i + 1] = prefix[i] + f[orbit[c.start + i]];
    const long double total = prefix[len];
    const auto q = static_cast<long double>(n / static_cast<std::int64_t>(len));
    const auto r = static_cast<std::size_t>(n % static_cast<std::int64_t>(len));
    for (std::size_t p = 0; p < len; ++p) {
      // sum of positions p+1 .. p+r (circular)
      const std::size_t a = p + 1;
      const std::size_t b = p + r;
      long double partial;
      if (b < len) {
        partial = prefix[b + 1] - prefix[a];
      } else if (a >= len) {
        partial = prefix[b - len + 1] - prefix[a - len];
      } else {
        partial = (total - prefix[a]) + prefix[b - len + 1];
      }
      out[orbit[c.start + p]] = static_cast<double>((q * total + partial) / static_cast<long double>(n));
    }
  }
  return Obs::from_values(f.space(), std::move(out));
}

double telescope_gap(const Automorphism& t, const Obs& f, std::int64_t n) {
  const Obs pn = cesaro(t, f, n);
  const Obs pn1 = cesaro(t, f, n + 1);
  const double a = static_cast<double>(n) / static_cast<double>(n + 1);
  std::vector<double> diff(pn.size());
  for (Atom x = 0; x < diff.size(); ++x) diff[x] = a * pn[x] - pn1[x];
  return l1_norm(Obs::from_values(f.space(), std::move(diff)));
}

Obs weighted_group_average(const ZdAction& action, const DiscreteWeights& w, const Obs& f) {
  require_same_space(action.space(), f.space());
  std::vector<double> out(f.size(), 0.0);
  for (std::size_t k = 0; k < w.support.size(); ++k) {
    if (w.weights[k] == 0.0) continue;
    const auto m = action.map(w.support[k]);
    const double wk = w.weights[k];
    for (Atom x = 0; x < out.size(); ++x) out[x] += wk * f[m[x]];
  }
  return Obs::from_values(f.space(), std::move(out));
}

namespace {

// Merge support points that round to the same step power.
std::vector<std::pair<std::int64_t, double>> step_terms(const DiscreteFlow& flow,
                                                        const TimeMeasure& nu, double L,
                                                        bool truncate) {
  std::map<std::int64_t, long double> acc;
  for (std::size_t i = 0; i < nu.times.size(); ++i) {
    if (truncate && !(std::fabs(nu.times[i]) <= L)) continue;
    acc[flow.steps(nu.times[i])] += nu.probs[i];
  }
  std::vector<std::pair<std::int64_t, double>> terms;
  terms.reserve(acc.size());
  for (const auto& [s, p] : acc) terms.emplace_back(s, static_cast<double>(p));
  return terms;
}

}  // namespace

Obs flow_measure_average(const DiscreteFlow& flow, const TimeMeasure& nu, const Obs& f) {
  const auto terms = step_terms(flow, nu, 0.0, false);
  return power_combination(flow.step_map(), f, terms);
}

Truncated truncated_average(const DiscreteFlow& flow, const TimeMeasure& nu, double L, const Obs& f) {
  const auto terms = step_terms(flow, nu, L, true);
  return Truncated{power_combination(flow.step_map(), f, terms), 1.0 - nu.mass_within(L)};
}

Obs kernel_average(const DiscreteFlow& flow, const Kernel& h, double t, const Obs& f) {
  require_same_space(flow.space(), f.space());
  if (t == 0.0) return f;
  std::map<std::int64_t, long double> acc;
  for (std::size_t j = 0; j < h.values.size(); ++j) {
    const double r = h.r0 + static_cast<double>(j) * h.dr;
    acc[flow.steps(r * t)] += static_cast<long double>(h.values[j]) * h.dr;
  }
  std::vector<std::pair<std::int64_t, double>> terms;
  for (const auto& [s, w] : acc) terms.emplace_back(s, static_cast<double>(w));
  return power_combination(flow.step_map(), f, terms);
}

}  // namespace slowconv
