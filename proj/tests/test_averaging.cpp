#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <random>

#include "oracle.hpp"
#include "slowconv/averaging.hpp"
#include "slowconv/error.hpp"

using namespace slowconv;

namespace {

std::vector<double> vals(const Obs& f) { return {f.values().begin(), f.values().end()}; }

Obs random_obs(const SpacePtr& s, std::mt19937_64& rng) {
  std::vector<double> v(s->size());
  for (auto& x : v) x = 2.0 * oracle::uniform01(rng) - 1.0;
  return Obs::from_values(s, std::move(v));
}

}  // namespace

TEST(Cesaro, Examples) {
  const auto t = cyclic_system(8);
  const auto f = Obs::indicator(MSet::range(t.space(), 0, 4));
  const auto p = cesaro(t, f, 2);
  EXPECT_EQ(vals(p), (std::vector<double>{1, 1, .5, 0, 0, 0, .5, 1}));
  EXPECT_EQ(vals(p), oracle::cesaro(t, f, 2));
  EXPECT_NEAR(l1_dev(p, 0.5), 0.375, 1e-15);

  const auto c = cesaro(t, Obs::constant(t.space(), 0.7), 5);
  for (double x : c.values()) EXPECT_NEAR(x, 0.7, 1e-15);
  const auto full = cesaro(t, f, 8);
  for (double x : full.values()) EXPECT_NEAR(x, 0.5, 1e-15);
  EXPECT_THROW(cesaro(t, f, 0), InvalidArgument);
}

TEST(Cesaro, MatchesNaiveOracle) {
  std::mt19937_64 rng(31);
  const auto t = odometer_system(3, 4);
  for (int trial = 0; trial < 10; ++trial) {
    const auto f = random_obs(t.space(), rng);
    const std::int64_t n = 1 + static_cast<std::int64_t>(rng() % 200);
    const auto p = cesaro(t, f, n);
    const auto q = oracle::cesaro(t, f, n);
    for (Atom x = 0; x < t.size(); ++x) EXPECT_NEAR(p[x], q[x], 1e-12);
  }
}

TEST(Telescope, Examples) {
  const auto t = cyclic_system(8);
  EXPECT_EQ(telescope_gap(t, Obs::constant(t.space(), 0.0), 3), 0.0);
  const auto f = Obs::indicator(MSet::range(t.space(), 0, 4));
  EXPECT_NEAR(telescope_gap(t, f, 2), 0.5 / 3.0, 1e-15);
}

TEST(Telescope, IdentityOnRandomObservables) {
  std::mt19937_64 rng(32);
  for (std::size_t n : {7u, 8u, 97u}) {
    const auto t = cyclic_system(n);
    for (int trial = 0; trial < 5; ++trial) {
      const auto f = random_obs(t.space(), rng);
      for (std::int64_t k = 1; k < static_cast<std::int64_t>(std::min<std::size_t>(n, 30)); ++k) {
        EXPECT_NEAR(telescope_gap(t, f, k) * static_cast<double>(k + 1), l1_norm(f), 1e-10);
      }
    }
  }
}

TEST(GroupAverage, Examples) {
  const auto a = torus_shift_action(1, 4, {{1}}, 2);
  const auto f = Obs::indicator(MSet::range(a.space(), 0, 1));
  const auto single = weighted_group_average(a, DiscreteWeights::make({{0}}, {1.0}), f);
  EXPECT_EQ(vals(single), vals(f));
  const auto avg = weighted_group_average(a, DiscreteWeights::make({{1}, {2}}, {0.5, 0.5}), f);
  EXPECT_EQ(vals(avg), (std::vector<double>{0, 0, 0.5, 0.5}));
}

TEST(GroupAverage, UniformBoxMatchesOracle) {
  std::mt19937_64 rng(33);
  const auto a = torus_shift_action(2, 9, {{1, 0}, {1, 1}}, 2);
  const auto w = DiscreteWeights::uniform(box(2, 2));
  EXPECT_EQ(w.support.size(), 25u);
  for (int trial = 0; trial < 5; ++trial) {
    const auto f = random_obs(a.space(), rng);
    const auto p = weighted_group_average(a, w, f);
    const auto q = oracle::group_average(a, w, f);
    for (Atom x = 0; x < 81; ++x) EXPECT_NEAR(p[x], q[x], 1e-12);
  }
}

TEST(DiscreteWeights, Validation) {
  EXPECT_THROW(DiscreteWeights::make({{0}, {1}}, {0.5, 0.4}), InvalidArgument);
  EXPECT_THROW(DiscreteWeights::make({{0}, {0}}, {0.5, 0.5}), InvalidArgument);
  EXPECT_THROW(DiscreteWeights::make({{0}, {1}}, {1.5, -0.5}), InvalidArgument);
  EXPECT_THROW(DiscreteWeights::make({{0}}, {0.5, 0.5}), InvalidArgument);
  EXPECT_THROW(DiscreteWeights::uniform({}), InvalidArgument);
  const auto a = torus_shift_action(1, 10, {{1}}, 1);
  EXPECT_THROW(weighted_group_average(a, DiscreteWeights::uniform({{2}}), Obs::constant(a.space(), 1.0)),
               InvalidArgument);
}

TEST(Box, Ordering) {
  const auto b = box(2, 1);
  ASSERT_EQ(b.size(), 9u);
  EXPECT_EQ(b.front(), (IntVec{-1, -1}));
  EXPECT_EQ(b[1], (IntVec{0, -1}));
  EXPECT_EQ(b.back(), (IntVec{1, 1}));
}

TEST(FlowAverage, PointMasses) {
  const DiscreteFlow flow(cyclic_system(12), 0.5);
  std::mt19937_64 rng(34);
  const auto f = random_obs(flow.space(), rng);
  EXPECT_EQ(vals(flow_measure_average(flow, TimeMeasure::point_mass(0.0), f)), vals(f));
  EXPECT_EQ(vals(flow_measure_average(flow, TimeMeasure::point_mass(1.5), f)), vals(flow.koopman(f, 1.5)));
}

TEST(FlowAverage, TwoPointMeasureMatchesEnumeration) {
  const DiscreteFlow flow(cyclic_system(100), 1.0);
  const auto f = Obs::indicator(MSet::range(flow.space(), 10, 20));
  const auto nu = TimeMeasure::make({-1.0, 1.0}, {0.5, 0.5});
  const auto p = flow_measure_average(flow, nu, f);
  for (Atom x = 0; x < 100; ++x) {
    const double lo = (x + 99) % 100 >= 10 && (x + 99) % 100 < 20 ? 1.0 : 0.0;
    const double hi = (x + 1) % 100 >= 10 && (x + 1) % 100 < 20 ? 1.0 : 0.0;
    EXPECT_EQ(p[x], 0.5 * lo + 0.5 * hi);
  }
  // 0.5 on {9, 10, 19, 20}, 1 on 11..18, 0 elsewhere
  EXPECT_NEAR(l1_dev(p, 0.1), oracle::l1_dev(vals(p), flow.space()->weights(), 0.1), 1e-15);
  EXPECT_NEAR(l1_dev(p, 0.1), 0.176, 1e-12);
}

TEST(FlowAverage, UniformIntegersMatchesWindowOracle) {
  std::mt19937_64 rng(35);
  const DiscreteFlow flow(odometer_system(2, 9), 1.0);
  const auto f = random_obs(flow.space(), rng);
  for (std::int64_t n : {0, 1, 5, 40}) {
    const auto p = flow_measure_average(flow, TimeMeasure::uniform_integers(n), f);
    const auto q = oracle::window_average(flow.step_map(), vals(f), -n, n);
    for (Atom x = 0; x < 512; ++x) EXPECT_NEAR(p[x], q[x], 1e-12);
  }
}

TEST(Truncation, Examples) {
  const DiscreteFlow flow(cyclic_system(50), 1.0);
  std::mt19937_64 rng(36);
  const auto f = random_obs(flow.space(), rng);
  const auto nu = TimeMeasure::uniform_integers(3);
  const auto t = truncated_average(flow, nu, 3.0, f);
  EXPECT_EQ(t.residual, 0.0);
  EXPECT_EQ(vals(t.q), vals(flow_measure_average(flow, nu, f)));

  const auto far = truncated_average(flow, TimeMeasure::point_mass(8.0), 4.0, f);
  EXPECT_EQ(far.residual, 1.0);
  for (double x : far.q.values()) EXPECT_EQ(x, 0.0);

  const double L = 2.0;
  const auto mix = TimeMeasure::make({0.0, 10.0 * L}, {0.75, 0.25});
  const auto m = truncated_average(flow, mix, L, f);
  EXPECT_EQ(m.residual, 0.25);
  for (Atom x = 0; x < 50; ++x) EXPECT_NEAR(m.q[x], 0.75 * f[x], 1e-15);
  // ||P f - Q f||_1 <= residual * sup|f|
  const auto p = flow_measure_average(flow, mix, f);
  EXPECT_LE(l1_norm(add(p, scale(m.q, -1.0))), m.residual * sup_norm(f) + 1e-15);
}

TEST(TimeMeasure, Validation) {
  EXPECT_THROW(TimeMeasure::make({0.0, 1.0}, {0.5, 0.6}), InvalidArgument);
  EXPECT_THROW(TimeMeasure::make({0.0}, {}), InvalidArgument);
  EXPECT_THROW(TimeMeasure::uniform_integers(-1), InvalidArgument);
  const auto nu = TimeMeasure::uniform_integers(2);
  EXPECT_NEAR(nu.mass_within(1.0), 0.6, 1e-15);
  EXPECT_NEAR(nu.mass_within(2.0), 1.0, 1e-15);
}

TEST(KernelAverage, Examples) {
  const DiscreteFlow flow(cyclic_system(64), 1.0);
  std::mt19937_64 rng(37);
  const auto f = random_obs(flow.space(), rng);
  const auto h = Kernel::uniform(0.0, 1.0, 16);
  EXPECT_EQ(vals(kernel_average(flow, h, 0.0, f)), vals(f));

  const auto spike = Kernel::make(1.0, 1.0, {1.0});
  EXPECT_EQ(vals(kernel_average(flow, spike, 5.0, f)), vals(flow.koopman(f, 5.0)));

  // 64 cells over a full cycle of 64 steps visit every atom once
  const auto smear = kernel_average(flow, Kernel::uniform(0.0, 1.0, 64), 64.0, f);
  for (double x : smear.values()) EXPECT_NEAR(x, integral(f), 1.0 / 64.0);
  EXPECT_THROW(Kernel::make(0.0, 0.5, {1.0}), InvalidArgument);
}

TEST(KernelAverage, MatchesOracle) {
  const DiscreteFlow flow(cyclic_system(40), 0.5);
  std::mt19937_64 rng(38);
  const auto f = random_obs(flow.space(), rng);
  const auto h = Kernel::make(0.0, 0.25, {0.5, 1.5, 1.0, 1.0});
  const double t = 6.0;
  const auto p = kernel_average(flow, h, t, f);
  for (Atom x = 0; x < 40; ++x) {
    long double s = 0;
    for (std::size_t j = 0; j < h.values.size(); ++j) {
      const double r = h.r0 + static_cast<double>(j) * h.dr;
      s += h.values[j] * h.dr * f[oracle::step_power(flow.step_map(), x, flow.steps(r * t))];
    }
    EXPECT_NEAR(p[x], static_cast<double>(s), 1e-12);
  }
}

TEST(PowerCombination, MatchesStepping) {
  std::mt19937_64 rng(39);
  std::vector<Atom> perm(30);
  for (Atom i = 0; i < 30; ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  const auto t = Automorphism::from_permutation(ProbSpace::uniform(30), perm);  // several cycles
  const auto f = random_obs(t.space(), rng);
  const std::vector<std::pair<std::int64_t, double>> terms{{-3, 0.25}, {0, 0.5}, {17, -1.0}, {100, 2.0}};
  const auto p = power_combination(t, f, terms);
  for (Atom x = 0; x < 30; ++x) {
    long double s = 0;
    for (const auto& [k, w] : terms) s += w * f[oracle::step_power(t, x, k)];
    EXPECT_NEAR(p[x], static_cast<double>(s), 1e-12);
  }
}

// Linearity, positivity and mass preservation for each operator family.
TEST(OperatorProperties, AllFamilies) {
  std::mt19937_64 rng(40);
  const auto cyc = cyclic_system(60);
  const DiscreteFlow flow(cyc, 1.0);
  const auto act = torus_shift_action(1, 60, {{1}}, 4);
  const auto nu = TimeMeasure::make({-2.0, 0.0, 3.0}, {0.2, 0.3, 0.5});
  const auto ker = Kernel::uniform(0.0, 1.0, 10);
  const auto w = DiscreteWeights::make({{-1}, {0}, {4}}, {0.1, 0.6, 0.3});

  using Op = std::function<Obs(const Obs&)>;
  const std::vector<std::pair<SpacePtr, Op>> ops{
      {cyc.space(), [&](const Obs& f) { return cesaro(cyc, f, 7); }},
      {act.space(), [&](const Obs& f) { return weighted_group_average(act, w, f); }},
      {flow.space(), [&](const Obs& f) { return flow_measure_average(flow, nu, f); }},
      {flow.space(), [&](const Obs& f) { return kernel_average(flow, ker, 13.0, f); }},
  };
  for (const auto& [space, op] : ops) {
    for (int trial = 0; trial < 10; ++trial) {
      const auto f = random_obs(space, rng);
      const auto g = random_obs(space, rng);
      const double a = 3.0 * oracle::uniform01(rng) - 1.5;
      const auto lhs = op(add(scale(f, a), g));
      const auto rhs = add(scale(op(f), a), op(g));
      for (Atom x = 0; x < 60; ++x) EXPECT_NEAR(lhs[x], rhs[x], 1e-12);

      std::vector<double> pos(60);
      for (auto& v : pos) v = oracle::uniform01(rng);
      const auto p = Obs::from_values(space, pos);
      const auto q = op(p);
      for (double v : q.values()) EXPECT_GE(v, 0.0);
      EXPECT_NEAR(integral(q), integral(p), 1e-12);
    }
  }
}
