#include <algorithm>
#include <cmath>
#include <string>

#include "slowconv/adversary.hpp"
#include "slowconv/error.hpp"

namespace slowconv {

namespace {

template <class Pred>
double fraction_where(const Automorphism& t, const Obs& g, std::int64_t n, Pred pred) {
  const Obs avg = cesaro(t, g, n);
  const double mean = integral(g);
  const auto w = g.space()->weights();
  long double m = 0;
  for (Atom x = 0; x < avg.size(); ++x) {
    if (pred(avg[x] - mean)) m += w[x];
  }
  return static_cast<double>(m);
}

std::vector<std::int64_t> geometric_grid(std::int64_t start, std::int64_t stop, double ratio) {
  std::vector<std::int64_t> grid{start};
  while (grid.back() < stop) {
    const auto next = static_cast<std::int64_t>(std::ceil(static_cast<double>(grid.back()) * ratio));
    grid.push_back(std::min(stop, std::max(grid.back() + 1, next)));
  }
  return grid;
}

bool exceeds(double d, double bound, DeviationMode mode) {
  return mode == DeviationMode::two_sided ? std::fabs(d) > bound : d > bound;
}

}  // namespace

double concentration_fraction(const Automorphism& t, const Obs& g, std::int64_t n, double eps) {
  require_same_space(t.space(), g.space());
  return fraction_where(t, g, n, [eps](double d) { return std::fabs(d) < eps; });
}

double deviation_fraction(const Automorphism& t, const Obs& g, std::int64_t n, double eps,
                          DeviationMode mode) {
  require_same_space(t.space(), g.space());
  return fraction_where(t, g, n, [eps, mode](double d) { return exceeds(d, eps, mode); });
}

Theorem3Result theorem3_construct(const Automorphism& system, const Obs& f, const RateSeq& rates,
                                  const Theorem3Options& options) {
  require_same_space(system.space(), f.space());
  const double eps = options.eps;
  if (!(eps > 0.0 && eps < 1.0)) throw InvalidArgument("eps must lie in (0, 1)");
  if (!system.is_single_cycle()) throw InvalidArgument("theorem 3 needs a single-cycle (ergodic) map");
  if (!(options.budget_shrink > 0.0 && options.budget_shrink < 1.0)) {
    throw InvalidArgument("budget_shrink must lie in (0, 1)");
  }
  if (!(options.tower_measure_factor > 0.0)) throw InvalidArgument("tower_measure_factor must be positive");
  if (!(options.height_factor >= 1.0)) throw InvalidArgument("height_factor must be at least 1");
  if (!(options.height_growth > 1.0)) throw InvalidArgument("height_growth must exceed 1");
  if (!(options.grid_ratio > 1.0)) throw InvalidArgument("grid_ratio must exceed 1");
  if (options.max_escalations < 0) throw InvalidArgument("max_escalations must be non-negative");
  if (sup_norm(f) == 0.0) throw InvalidArgument("f must not vanish identically");
  if (!options.allow_signed) {
    for (double v : f.values()) {
      if (v < 0.0) throw InvalidArgument("f must be non-negative unless signed observables are enabled");
    }
  }

  const SpacePtr& space = system.space();
  const std::size_t n_atoms = system.size();
  const auto cycle = static_cast<std::int64_t>(n_atoms);
  const std::size_t K = options.K;

  Theorem3Result result{.Y = MSet::full(space),
                        .f_tilde = f,
                        .plan = BudgetPlan{.eps = eps, .n = {}, .a = {}, .eps_k = {}, .L = {}},
                        .stages = {},
                        .certificates = {},
                        .summary = {},
                        .measure_y = 1.0,
                        .violations = {}};
  if (K == 0) return result;

  MSet towers(space);
  MSet bases(space);
  std::int64_t prev_n = 0;
  for (std::size_t k = 0; k < K; ++k) {
    const double eps_k = options.budget_shrink * eps / static_cast<double>(K);
    const Obs g = multiply(f, complement(towers));

    const std::int64_t start = std::max(prev_n + 1, rates.first_below(eps_k));
    if (start > cycle) {
      throw Infeasible("Birkhoff search exhausts the grid: a_n < " + std::to_string(eps_k) +
                       " needs n beyond the cycle length " + std::to_string(cycle));
    }
    auto grid = geometric_grid(start, cycle, options.grid_ratio);
    std::vector<double> fractions;
    for (std::int64_t n : grid) fractions.push_back(concentration_fraction(system, g, n, eps_k));
    std::size_t pick = grid.size();
    for (std::size_t i = grid.size(); i-- > 0;) {
      if (!(fractions[i] > 1.0 - eps_k)) break;
      pick = i;
    }
    if (pick == grid.size()) {
      throw Infeasible("Birkhoff search exhausts the grid at eps_k = " + std::to_string(eps_k));
    }
    const std::int64_t n_k = grid[pick];

    const double mu = options.tower_measure_factor * eps_k;
    if (!(mu < 1.0)) throw Infeasible("tower measure " + std::to_string(mu) + " is not below 1");
    const std::size_t total = atoms_for_measure(mu, n_atoms);
    const auto un_k = static_cast<std::size_t>(n_k);
    if (total < un_k) {
      throw Infeasible("tower escalation exhausts N: measure " + std::to_string(mu) +
                       " holds fewer than n(k) = " + std::to_string(n_k) + " atoms");
    }
    auto h_min = std::max(un_k, static_cast<std::size_t>(std::ceil(options.height_factor * static_cast<double>(n_k))));

    TowerOptions topts{TowerLayout::spread, bases};
    std::optional<Tower> tower;
    double frac = 0;
    int escalations = 0;
    while (true) {
      h_min = std::min(h_min, total);
      const std::size_t cols = total / h_min;
      const std::size_t h = total / cols;
      tower = build_tower(system, h, static_cast<double>(cols * h) / static_cast<double>(n_atoms), topts);
      const Obs provisional = multiply(f, complement(towers | tower->body));
      frac = deviation_fraction(system, provisional, n_k, eps_k, options.mode);
      if (frac > 1.0 - eps_k + options.eta) break;
      if (h == total || escalations == options.max_escalations) break;
      h_min = static_cast<std::size_t>(std::ceil(options.height_growth * static_cast<double>(h)));
      ++escalations;
    }

    towers = towers | tower->body;
    bases = bases | tower->base;
    result.plan.n.push_back(n_k);
    result.plan.a.push_back(rates(n_k));
    result.plan.eps_k.push_back(eps_k);
    result.stages.push_back(Theorem3Stage{.n = n_k,
                                          .a = rates(n_k),
                                          .eps_k = eps_k,
                                          .grid = std::move(grid),
                                          .grid_fraction = std::move(fractions),
                                          .tower = std::move(*tower),
                                          .escalations = escalations,
                                          .provisional_fraction = frac,
                                          .one_sided_fraction = 0,
                                          .two_sided_fraction = 0});
    prev_n = n_k;
  }

  result.Y = complement(towers);
  result.f_tilde = multiply(f, result.Y);
  result.measure_y = measure(result.Y);

  auto& summary = result.summary;
  summary.counts.assign(n_atoms, 0);
  long double eps_total = 0;
  for (std::size_t k = 0; k < K; ++k) {
    auto& st = result.stages[k];
    eps_total += st.eps_k;
    const Obs avg = cesaro(system, result.f_tilde, st.n);
    const double mean = integral(result.f_tilde);
    const auto w = space->weights();
    long double one = 0, two = 0;
    for (Atom x = 0; x < n_atoms; ++x) {
      const double d = avg[x] - mean;
      if (d > st.eps_k) one += w[x];
      if (std::fabs(d) > st.eps_k) two += w[x];
      if (exceeds(d, st.a, options.mode)) ++summary.counts[x];
    }
    st.one_sided_fraction = static_cast<double>(one);
    st.two_sided_fraction = static_cast<double>(two);
    const double lhs = options.mode == DeviationMode::two_sided ? st.two_sided_fraction : st.one_sided_fraction;

    CertContext ctx;
    ctx.eps_k = st.eps_k;
    ctx.height = static_cast<double>(st.tower.height);
    ctx.measure_v = measure(st.tower.body);
    ctx.measure_a = result.measure_y;
    ctx.extra = {{"a_n", st.a},
                 {"columns", static_cast<double>(st.tower.columns)},
                 {"escalations", static_cast<double>(st.escalations)},
                 {"provisional_fraction", st.provisional_fraction},
                 {"one_sided_fraction", st.one_sided_fraction},
                 {"two_sided_fraction", st.two_sided_fraction},
                 {"grid_ratio", options.grid_ratio}};
    result.certificates.push_back(Certificate::make("theorem3", static_cast<int>(k + 1), st.n, lhs,
                                                    1.0 - st.eps_k, options.eta, std::move(ctx)));
    if (!(st.eps_k > st.a)) {
      result.violations.push_back("eps_k <= a_n(k) at index " + std::to_string(k + 1));
    }
  }
  if (!(eps_total < eps)) result.violations.push_back("sum of eps_k is not below eps");

  CertContext yctx;
  yctx.measure_a = result.measure_y;
  yctx.extra = {{"eps", eps}};
  result.certificates.push_back(Certificate::make("theorem3_measure_y", 0, 0, result.measure_y, 1.0 - eps,
                                                  options.eta, std::move(yctx)));

  summary.threshold = K - std::min<std::size_t>(
                              K, static_cast<std::size_t>(std::ceil(static_cast<double>(eps_total) * static_cast<double>(K))));
  const auto w = space->weights();
  long double all = 0, at_least = 0;
  for (Atom x = 0; x < n_atoms; ++x) {
    if (summary.counts[x] == K) all += w[x];
    if (summary.counts[x] >= summary.threshold) at_least += w[x];
  }
  summary.measure_all = static_cast<double>(all);
  summary.measure_at_least = static_cast<double>(at_least);
  return result;
}

}  // namespace slowconv
