#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "oracle.hpp"
#include "slowconv/error.hpp"
#include "slowconv/towers.hpp"

using namespace slowconv;

TEST(BuildTower, GreedyPackedExample) {
  const auto t = cyclic_system(100);
  const auto tower = build_tower(t, 10, 0.2);
  EXPECT_EQ(tower.base.atoms(), (std::vector<Atom>{0, 10}));
  EXPECT_EQ(tower.body.count(), 20u);
  EXPECT_EQ(tower.columns, 2u);
  EXPECT_TRUE(levels_disjoint(tower));
  EXPECT_EQ(tower.level(1).atoms(), (std::vector<Atom>{1, 11}));
  EXPECT_THROW(tower.level(11), InvalidArgument);
}

TEST(BuildTower, HeightOneAndInfeasible) {
  const auto t = cyclic_system(50);
  const auto tower = build_tower(t, 1, 0.3);
  EXPECT_EQ(tower.base.count(), 15u);
  EXPECT_EQ(tower.body, t.image(tower.base));
  EXPECT_THROW(build_tower(cyclic_system(10), 20, 0.5), Infeasible);
  EXPECT_THROW(build_tower(cyclic_system(10), 2, 0.0), InvalidArgument);
  EXPECT_THROW(build_tower(Automorphism::identity(ProbSpace::uniform(4)), 1, 0.5), InvalidArgument);
}

TEST(BuildTower, SpreadLayoutAvoidsSet) {
  const auto t = odometer_system(2, 10);
  const MSet avoid = MSet::range(t.space(), 0, 64);
  const auto tower = build_tower(t, 16, 0.1, {TowerLayout::spread, avoid});
  EXPECT_TRUE(levels_disjoint(tower));
  EXPECT_TRUE((tower.base & avoid).empty());
  EXPECT_EQ(tower.body.count(), tower.columns * 16);
  EXPECT_GE(measure(tower.body), 0.1);
  EXPECT_LT(measure(tower.body), 0.1 + 16.0 / 1024.0);
}

TEST(BuildTower, RandomDrawsHaveDisjointLevels) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 50 + rng() % 2000;
    const std::size_t h = 1 + rng() % 40;
    const double mu = std::min(1.0, (static_cast<double>(h) + oracle::uniform01(rng) * 0.4 * static_cast<double>(n)) /
                                        static_cast<double>(n));
    const auto layout = rng() % 2 ? TowerLayout::packed : TowerLayout::spread;
    try {
      const auto tower = build_tower(cyclic_system(n), h, mu, {layout, std::nullopt});
      EXPECT_TRUE(levels_disjoint(tower));
      EXPECT_GE(measure(tower.body) + 1e-9, mu);
      EXPECT_LT(measure(tower.body), mu + static_cast<double>(h) / static_cast<double>(n) + 1e-12);
    } catch (const Infeasible&) {
      // columns did not fit; acceptable for the larger draws
    }
  }
}

TEST(FlowBand, Example) {
  const DiscreteFlow flow(cyclic_system(100), 1.0);
  const auto band = build_flow_band(flow, 2.0, 0.4, 0.2);
  EXPECT_EQ(band.arc_length, 40u);
  EXPECT_EQ(band.shrink, 2);
  EXPECT_EQ(band.cert.core.count(), 36u);
  EXPECT_DOUBLE_EQ(band.cert.ratio, 0.9);
  EXPECT_TRUE(band.cert.pass);

  const auto again = check_invariance(flow, band.set, 2.0, 0.8);
  EXPECT_DOUBLE_EQ(again.ratio, 0.9);
  EXPECT_EQ(again.core, band.cert.core);
  EXPECT_DOUBLE_EQ(oracle::flow_invariance_ratio(flow.step_map(), band.set, 2), 0.9);
}

TEST(FlowBand, ZeroWindowAndWidthCheck) {
  const DiscreteFlow flow(cyclic_system(100), 1.0);
  const auto band = build_flow_band(flow, 0.0, 0.25, 0.2, 7);
  EXPECT_EQ(band.cert.core, band.set);
  EXPECT_EQ(band.cert.ratio, 1.0);
  EXPECT_TRUE(band.set.contains(7));
  // 2L/delta = 4 >= eps * 20 = 4
  EXPECT_THROW(build_flow_band(flow, 2.0, 0.2, 0.2), Infeasible);
  EXPECT_THROW(build_flow_band(flow, -1.0, 0.2, 0.2), InvalidArgument);
}

TEST(FlowBand, FinerStepAndSpecialFlow) {
  const auto base = cyclic_system(40);
  std::vector<double> roof(40);
  for (std::size_t i = 0; i < 40; ++i) roof[i] = 2.0 + static_cast<double>(i % 2);
  const auto flow = special_flow(base, Obs::from_values(base.space(), roof), 0.5);
  const auto band = build_flow_band(flow, 1.0, 0.5, 0.1, 3);
  EXPECT_EQ(band.shrink, 2);
  const double ratio = oracle::flow_invariance_ratio(flow.step_map(), band.set, 2);
  EXPECT_NEAR(band.cert.ratio, ratio, 1e-12);
}

TEST(CheckInvariance, TrivialCases) {
  const DiscreteFlow flow(cyclic_system(20), 1.0);
  const auto full = MSet::full(flow.space());
  EXPECT_EQ(check_invariance(flow, full, 5.0, 0.5).ratio, 1.0);
  const std::vector<Atom> one{4};
  const auto single = MSet::from_atoms(flow.space(), one);
  EXPECT_EQ(check_invariance(flow, single, 1.0, 0.5).ratio, 0.0);
  EXPECT_FALSE(check_invariance(flow, single, 1.0, 0.5).pass);
  EXPECT_THROW(check_invariance(flow, MSet(flow.space()), 1.0, 0.5), InvalidArgument);

  const auto a = torus_shift_action(1, 30, {{1}}, 5);
  const std::vector<IntVec> identity_only{{0}};
  const auto v = MSet::range(a.space(), 3, 9);
  const auto cert = check_invariance(a, v, identity_only, 0.99);
  EXPECT_EQ(cert.core, v);
  EXPECT_TRUE(cert.pass);
  const std::vector<IntVec> shift{{0}, {1}};
  EXPECT_EQ(check_invariance(a, MSet::from_atoms(a.space(), one), shift, 0.5).ratio, 0.0);
}

TEST(CheckInvariance, RandomSetsMatchOracle) {
  std::mt19937_64 rng(22);
  const auto a = torus_shift_action(2, 12, {{1, 0}, {0, 1}}, 3);
  const auto window = box(2, 1);
  const DiscreteFlow flow(odometer_system(2, 8), 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    MSet v(a.space());
    for (Atom x = 0; x < 144; ++x) {
      if (oracle::uniform01(rng) < 0.7) v.insert(x);
    }
    if (v.empty()) continue;
    EXPECT_NEAR(check_invariance(a, v, window, 0.1).ratio, oracle::torus_invariance_ratio(a, v, window), 1e-12);

    MSet w(flow.space());
    const Atom start = rng() % 256;
    const std::size_t len = 1 + rng() % 200;
    for (std::size_t i = 0; i < len; ++i) w.insert(flow.step_map().apply_power(start, static_cast<std::int64_t>(i)));
    const std::int64_t r = static_cast<std::int64_t>(rng() % 6);
    EXPECT_NEAR(check_invariance(flow, w, static_cast<double>(r), 0.1).ratio,
                oracle::flow_invariance_ratio(flow.step_map(), w, r), 1e-12);
  }
}

TEST(FcInvariant, OneDimensionalExample) {
  const auto a = torus_shift_action(1, 1000, {{1}}, 10);
  const auto window = box(1, 2);
  const auto fc = build_fc_invariant(a, window, 0.9, 0.1);
  EXPECT_EQ(fc.cube_side, 100u);
  EXPECT_EQ(fc.cubes, 1u);
  EXPECT_EQ(fc.set.count(), 100u);
  EXPECT_EQ(fc.cert.core.count(), 96u);
  EXPECT_DOUBLE_EQ(fc.cert.ratio, 0.96);
  EXPECT_NEAR(oracle::torus_invariance_ratio(a, fc.set, window), 0.96, 1e-12);
}

TEST(FcInvariant, TwoDimensionalExample) {
  const auto a = torus_shift_action(2, 100, {{1, 0}, {0, 1}}, 3);
  const auto window = box(2, 1);
  const auto fc = build_fc_invariant(a, window, 0.8, 0.04);
  EXPECT_EQ(fc.cube_side, 20u);
  EXPECT_EQ(fc.cert.core.count(), 324u);
  EXPECT_DOUBLE_EQ(fc.cert.ratio, 0.81);
  EXPECT_NEAR(oracle::torus_invariance_ratio(a, fc.set, window), 0.81, 1e-12);
}

TEST(FcInvariant, MeasureMonotoneAndErrors) {
  const auto a = torus_shift_action(1, 2000, {{1}}, 10);
  const auto window = box(1, 3);
  double prev = 0;
  for (double eps : {0.01, 0.02, 0.05, 0.1, 0.2}) {
    const auto fc = build_fc_invariant(a, window, 0.5, eps);
    EXPECT_GT(measure(fc.set), prev);
    EXPECT_LE(measure(fc.set), eps + 1e-12);
    prev = measure(fc.set);
  }
  // cube of side 5 against a window of width 6
  EXPECT_THROW(build_fc_invariant(a, window, 0.5, 0.0025), Infeasible);
  EXPECT_THROW(build_fc_invariant(a, window, 1.5, 0.1), InvalidArgument);
  const auto plain = ZdAction({cyclic_system(10)}, 2);
  EXPECT_THROW(build_fc_invariant(plain, window, 0.5, 0.1), InvalidArgument);
}

TEST(AtomsForMeasure, SnapsNearIntegers) {
  EXPECT_EQ(atoms_for_measure(0.4, 100), 40u);
  EXPECT_EQ(atoms_for_measure(0.1 * 3, 10), 3u);
  EXPECT_EQ(atoms_for_measure(0.349, 10), 3u);
}
