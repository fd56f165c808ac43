#pragma once

// Constructions of slowly converging sets and observables, with one
// certificate per index showing that the prescribed rate is beaten.
//
// Certificate failures are reported through the result (pass() == false,
// with the failing certificates flagged); Infeasible and InvalidArgument are
// thrown when a construction cannot be carried out at all.

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "slowconv/averaging.hpp"
#include "slowconv/certificate.hpp"
#include "slowconv/measure.hpp"
#include "slowconv/rates.hpp"
#include "slowconv/systems.hpp"
#include "slowconv/towers.hpp"

namespace slowconv {

struct BudgetPlan {
  double eps = 0;
  std::vector<std::int64_t> n;  // n(1) < n(2) < ...
  std::vector<double> a;        // a_{n(k)}
  std::vector<double> eps_k;    // Theorem 3 only
  std::vector<double> L;        // flow case only
};

// Greedy-minimal indices: n(k) is the smallest n > n(k-1) (n >= from) with
// a_n < (eps - sum_{i<k} a_{n(i)}) / 2, so the partial sums stay below eps.
std::vector<std::int64_t> select_budget_indices(const RateSeq& rates, double eps, std::size_t count,
                                                std::int64_t from = 1);

// Smallest L among 0 and the support radii |t_i| with nu([-L, L]) > mass.
double truncation_radius(const TimeMeasure& nu, double mass);

// ---------------------------------------------------------------------------
// Flow construction

using TimeMeasureFamily = std::function<TimeMeasure(std::int64_t n)>;

struct Theorem1Options {
  double eps = 0.2;
  std::size_t K = 3;
  double eta = kDefaultEta;
  int max_doublings = 1;  // band-measure doublings per failing index
};

struct Theorem1Stage {
  std::int64_t n = 0;
  double a = 0;
  double L = 0;
  double residual = 0;       // 1 - nu_n([-L, L])
  double band_measure = 0;   // requested
  int doublings = 0;
  FlowBand band;
  double chain_bound = 0;    // m(core) m(A) - residual
  double truncation_gap = 0; // || P 1_A - Q 1_A ||_1
};

struct Theorem1Result {
  MSet A;
  BudgetPlan plan;
  std::vector<Theorem1Stage> stages;
  std::vector<Certificate> certificates;
  double m_a_floor = 0;
  double measure_aprime = 0;
  double measure_a = 0;
  double measure_sym_diff = 0;  // m(A' ^ A)
  std::vector<std::string> violations;

  bool pass() const { return violations.empty() && all_pass(certificates); }
};

// Needs a single-cycle step map, 0 < eps < 1/3 and m(A') > eps.
Theorem1Result theorem1_construct(const DiscreteFlow& flow, const TimeMeasureFamily& nus,
                                  const RateSeq& rates, const MSet& aprime,
                                  const Theorem1Options& options);

// ---------------------------------------------------------------------------
// Group actions

struct LemmaIndex {
  std::int64_t label = 0;        // reported as the index n of the certificate
  std::vector<IntVec> window;    // F_k, must contain the identity
  MSet set;                      // V_k
  std::vector<DiscreteWeights> weights;  // each supported on F_k
};

struct LemmaOptions {
  double c = 0.5;
  double eps = 0.3;
  double eta = kDefaultEta;
};

struct LemmaStage {
  std::int64_t label = 0;
  InvarianceCert invariance;
  MSet vanishing;             // V_k minus U, U = {x : T_g x in A for some g in F_k}
  double measure_vanishing = 0;
  bool vanishing_exact = true;  // every weighted average is exactly 0 there
  std::vector<double> lhs;      // one per weight vector
};

struct LemmaResult {
  MSet A;
  std::vector<LemmaStage> stages;
  std::vector<Certificate> certificates;
  double measure_a = 0;
  double measure_sym_diff = 0;
  std::vector<std::string> violations;

  bool pass() const { return violations.empty() && all_pass(certificates); }
};

LemmaResult lemma_construct(const ZdAction& action, std::span<const LemmaIndex> indices,
                            const MSet& aprime, const LemmaOptions& options);

using WindowFamily = std::function<std::vector<IntVec>(std::int64_t j)>;

struct Theorem2Options {
  double c = 0.5;
  double eps = 0.3;
  std::size_t J = 5;
  std::size_t random_weights = 8;
  std::uint64_t seed = 1;
  double eta = kDefaultEta;
};

struct Theorem2Plan {
  std::vector<std::int64_t> j;
  std::vector<double> a;
  std::vector<double> target_measure;  // 2 a_j / (c m_A_floor)
  double m_a_floor = 0;
  double total_measure = 0;
};

// Selects j(1) < ... < j(J) greedily with sum of target measures below eps.
Theorem2Plan plan_theorem2(const RateSeq& rates, double measure_aprime, const Theorem2Options& options);

struct Theorem2Result {
  Theorem2Plan plan;
  std::vector<FcInvariantSet> sets;
  std::vector<std::vector<DiscreteWeights>> weights;  // uniform first, then the random draws
  LemmaResult lemma;
  std::vector<Certificate> certificates;  // rhs = a_j
  std::size_t exceedances = 0;            // indices whose certificates all pass

  const MSet& A() const { return lemma.A; }
  bool pass() const {
    return lemma.pass() && all_pass(certificates) && exceedances == plan.j.size();
  }
};

Theorem2Result theorem2_run(const ZdAction& action, const WindowFamily& windows,
                            const RateSeq& rates, const MSet& aprime,
                            const Theorem2Options& options);

// Uniform sample from the probability simplex with k vertices.
std::vector<double> sample_simplex(std::size_t k, std::mt19937_64& rng);

// ---------------------------------------------------------------------------
// Pointwise construction

enum class DeviationMode { two_sided, one_sided };

struct Theorem3Options {
  double eps = 0.2;
  std::size_t K = 2;
  DeviationMode mode = DeviationMode::two_sided;
  bool allow_signed = false;
  double budget_shrink = 0.999;  // eps_k = budget_shrink * eps / K
  double tower_measure_factor = 3.0;
  double height_factor = 1.0;    // starting height = height_factor * n(k)
  double height_growth = 10.0;
  int max_escalations = 3;
  double grid_ratio = 1.5;
  double eta = kDefaultEta;
};

struct Theorem3Stage {
  std::int64_t n = 0;
  double a = 0;
  double eps_k = 0;
  std::vector<std::int64_t> grid;
  std::vector<double> grid_fraction;  // concentration fraction per grid point
  Tower tower;
  int escalations = 0;
  double provisional_fraction = 0;
  double one_sided_fraction = 0;
  double two_sided_fraction = 0;
};

struct ExceedanceSummary {
  std::vector<std::uint32_t> counts;  // per atom
  double measure_all = 0;             // count == K
  std::size_t threshold = 0;          // K - ceil(K * sum eps_k)
  double measure_at_least = 0;        // count >= threshold
};

struct Theorem3Result {
  MSet Y;
  Obs f_tilde;
  BudgetPlan plan;
  std::vector<Theorem3Stage> stages;
  std::vector<Certificate> certificates;
  ExceedanceSummary summary;
  double measure_y = 0;
  std::vector<std::string> violations;

  bool pass() const { return violations.empty() && all_pass(certificates); }
};

// m{x : |P_n g(x) - int g| < eps}.
double concentration_fraction(const Automorphism& t, const Obs& g, std::int64_t n, double eps);

// m{x : D(x) > eps} with D = |P_n g - int g| or P_n g - int g.
double deviation_fraction(const Automorphism& t, const Obs& g, std::int64_t n, double eps,
                          DeviationMode mode);

Theorem3Result theorem3_construct(const Automorphism& system, const Obs& f, const RateSeq& rates,
                                  const Theorem3Options& options);

}  // namespace slowconv
