#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "slowconv/adversary.hpp"
#include "slowconv/error.hpp"

namespace slowconv {

std::vector<double> sample_simplex(std::size_t k, std::mt19937_64& rng) {
  if (k == 0) throw InvalidArgument("simplex needs at least one vertex");
  std::vector<double> cuts(k + 1);
  cuts[0] = 0.0;
  cuts[k] = 1.0;
  for (std::size_t i = 1; i < k; ++i) cuts[i] = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  std::sort(cuts.begin() + 1, cuts.end() - 1);
  std::vector<double> w(k);
  for (std::size_t i = 0; i < k; ++i) w[i] = cuts[i + 1] - cuts[i];
  return w;
}

LemmaResult lemma_construct(const ZdAction& action, std::span<const LemmaIndex> indices,
                            const MSet& aprime, const LemmaOptions& options) {
  require_same_space(action.space(), aprime.space());
  if (!(options.c > 0.0 && options.c < 1.0)) throw InvalidArgument("c must lie in (0, 1)");
  if (!(options.eps > 0.0 && options.eps < 1.0)) throw InvalidArgument("eps must lie in (0, 1)");
  const IntVec identity(action.dimension(), 0);

  std::vector<InvarianceCert> invariance;
  MSet removed(action.space());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const auto& idx = indices[k];
    require_same_space(action.space(), idx.set.space());
    if (std::find(idx.window.begin(), idx.window.end(), identity) == idx.window.end()) {
      throw InvalidArgument("window F_" + std::to_string(k + 1) + " must contain the identity");
    }
    auto cert = check_invariance(action, idx.set, idx.window, options.c, options.eta);
    if (!cert.pass) {
      throw InvalidArgument("V_" + std::to_string(k + 1) + " is not (F, c)-invariant: ratio " +
                            std::to_string(cert.ratio));
    }
    invariance.push_back(std::move(cert));
    removed = removed | idx.set;
  }

  LemmaResult result{.A = aprime - removed,
                     .stages = {},
                     .certificates = {},
                     .measure_a = 0,
                     .measure_sym_diff = 0,
                     .violations = {}};
  if (result.A.empty()) throw Infeasible("A = A' minus the union of V_k is empty");
  result.measure_a = measure(result.A);
  result.measure_sym_diff = measure(aprime ^ result.A);
  if (!(result.measure_sym_diff < options.eps)) result.violations.push_back("m(A' ^ A) is not below eps");

  const Obs ind = Obs::indicator(result.A);
  const std::size_t n = ind.size();
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const auto& idx = indices[k];
    std::vector<std::uint8_t> hit(n, 0);
    for (const auto& g : idx.window) {
      const auto m = action.map(g);
      for (Atom x = 0; x < n; ++x) hit[x] |= result.A.contains(m[x]) ? 1 : 0;
    }
    const MSet u = MSet::from_mask(action.space(), std::move(hit));
    LemmaStage stage{.label = idx.label,
                     .invariance = std::move(invariance[k]),
                     .vanishing = idx.set - u,
                     .measure_vanishing = 0,
                     .vanishing_exact = true,
                     .lhs = {}};
    stage.measure_vanishing = measure(stage.vanishing);
    if (!((stage.invariance.core - stage.vanishing).empty())) {
      result.violations.push_back("core of V_" + std::to_string(k + 1) + " meets U");
    }

    const std::set<IntVec> window(idx.window.begin(), idx.window.end());
    const auto vanishing_atoms = stage.vanishing.atoms();
    const double m_v = measure(idx.set);
    const double m_core = measure(stage.invariance.core);
    const double rhs = options.c * m_v * result.measure_a;
    for (std::size_t w = 0; w < idx.weights.size(); ++w) {
      const auto& wt = idx.weights[w];
      for (const auto& g : wt.support) {
        if (!window.contains(g)) throw InvalidArgument("weight support must lie in F_k");
      }
      const Obs avg = weighted_group_average(action, wt, ind);
      for (Atom x : vanishing_atoms) stage.vanishing_exact = stage.vanishing_exact && avg[x] == 0.0;
      const double lhs = l1_dev(avg, result.measure_a);
      stage.lhs.push_back(lhs);
      if (lhs < stage.measure_vanishing * result.measure_a - 1e-12) {
        result.violations.push_back("index " + std::to_string(k + 1) + " breaks lhs >= m(V minus U) m(A)");
      }
      CertContext ctx;
      ctx.measure_v = m_v;
      ctx.measure_core = m_core;
      ctx.measure_a = result.measure_a;
      ctx.weight_id = static_cast<int>(w);
      ctx.extra = {{"measure_vanishing", stage.measure_vanishing}};
      result.certificates.push_back(Certificate::make("lemma", static_cast<int>(k + 1), idx.label, lhs, rhs,
                                                      options.eta, std::move(ctx)));
    }
    if (!stage.vanishing_exact) {
      result.violations.push_back("weighted average of 1_A is not identically 0 on V_" +
                                  std::to_string(k + 1) + " minus U");
    }
    result.stages.push_back(std::move(stage));
  }
  return result;
}

Theorem2Plan plan_theorem2(const RateSeq& rates, double measure_aprime, const Theorem2Options& options) {
  if (!(options.c > 0.0 && options.c < 1.0)) throw InvalidArgument("c must lie in (0, 1)");
  if (!(options.eps > 0.0 && options.eps < 1.0)) throw InvalidArgument("eps must lie in (0, 1)");
  Theorem2Plan plan;
  plan.m_a_floor = measure_aprime - options.eps;
  if (options.J == 0) return plan;
  if (!(plan.m_a_floor > 0.0)) {
    throw Infeasible("m(A') = " + std::to_string(measure_aprime) + " must exceed eps");
  }
  // target(j) = 2 a_j / (c m_floor) < room  <=>  a_j < room c m_floor / 2
  const double scale = options.c * plan.m_a_floor / 2.0;
  long double spent = 0;
  std::int64_t next = 1;
  for (std::size_t i = 0; i < options.J; ++i) {
    const double room = std::min(static_cast<double>((options.eps - spent) / 2), 1.0);
    const std::int64_t j = rates.first_below(room * scale, next);
    const double a = rates(j);
    plan.j.push_back(j);
    plan.a.push_back(a);
    plan.target_measure.push_back(a / scale);
    spent += a / scale;
    next = j + 1;
  }
  plan.total_measure = static_cast<double>(spent);
  if (!(plan.total_measure < options.eps)) throw Infeasible("set measures exceed the eps budget");
  return plan;
}

Theorem2Result theorem2_run(const ZdAction& action, const WindowFamily& windows,
                            const RateSeq& rates, const MSet& aprime,
                            const Theorem2Options& options) {
  require_same_space(action.space(), aprime.space());
  if (!action.geometry()) throw InvalidArgument("theorem 2 needs a torus action");
  const auto& geo = *action.geometry();
  Theorem2Result result{.plan = plan_theorem2(rates, measure(aprime), options),
                        .sets = {},
                        .weights = {},
                        .lemma = LemmaResult{.A = aprime,
                                             .stages = {},
                                             .certificates = {},
                                             .measure_a = 0,
                                             .measure_sym_diff = 0,
                                             .violations = {}},
                        .certificates = {},
                        .exceedances = 0};
  if (result.plan.j.empty()) {
    result.lemma.measure_a = measure(aprime);
    return result;
  }

  IntVec origin(geo.dim, 0);
  for (Atom x = 0; x < aprime.universe(); ++x) {
    if (!aprime.contains(x)) {
      origin = geo.coords(x);
      break;
    }
  }

  std::mt19937_64 rng(options.seed);
  std::vector<LemmaIndex> indices;
  for (std::size_t i = 0; i < result.plan.j.size(); ++i) {
    const std::int64_t j = result.plan.j[i];
    auto window = windows(j);
    auto fc = build_fc_invariant(action, window, options.c, result.plan.target_measure[i], origin, options.eta);
    std::vector<DiscreteWeights> weights{DiscreteWeights::uniform(window)};
    for (std::size_t r = 0; r < options.random_weights; ++r) {
      weights.push_back(DiscreteWeights::make(window, sample_simplex(window.size(), rng)));
    }
    result.weights.push_back(weights);
    indices.push_back(LemmaIndex{j, std::move(window), fc.set, std::move(weights)});
    result.sets.push_back(std::move(fc));
  }

  result.lemma = lemma_construct(action, indices,
                                 aprime, LemmaOptions{options.c, options.eps, options.eta});
  std::vector<bool> index_pass(indices.size(), true);
  for (const auto& lc : result.lemma.certificates) {
    const auto i = static_cast<std::size_t>(lc.k - 1);
    CertContext ctx = lc.context;
    ctx.extra.emplace_back("lemma_rhs", lc.rhs);
    auto cert = Certificate::make("theorem2", lc.k, lc.n, lc.lhs, result.plan.a[i], options.eta, std::move(ctx));
    index_pass[i] = index_pass[i] && cert.pass && lc.pass;
    result.certificates.push_back(std::move(cert));
  }
  result.exceedances = static_cast<std::size_t>(std::count(index_pass.begin(), index_pass.end(), true));
  return result;
}

}  // namespace slowconv
