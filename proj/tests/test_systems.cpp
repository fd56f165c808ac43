#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "oracle.hpp"
#include "slowconv/error.hpp"
#include "slowconv/systems.hpp"

using namespace slowconv;

TEST(Cyclic, SmallCases) {
  const auto one = cyclic_system(1);
  EXPECT_EQ(one, Automorphism::identity(one.space()));

  const auto t = cyclic_system(8);
  EXPECT_EQ(t.power(8), Automorphism::identity(t.space()));
  EXPECT_TRUE(t.is_single_cycle());
  EXPECT_EQ(oracle::cycle_from_zero(t).size(), 8u);
  EXPECT_THROW(cyclic_system(0), InvalidArgument);
}

TEST(Automorphism, RejectsNonBijections) {
  const auto s = ProbSpace::uniform(3);
  EXPECT_THROW(Automorphism::from_permutation(s, {0, 0, 1}), InvalidArgument);
  EXPECT_THROW(Automorphism::from_permutation(s, {0, 1}), InvalidArgument);
  const auto w = ProbSpace::weighted({0.5, 0.25, 0.25});
  EXPECT_THROW(Automorphism::from_permutation(w, {1, 0, 2}), InvalidArgument);
  EXPECT_NO_THROW(Automorphism::from_permutation(w, {0, 2, 1}));
}

TEST(Automorphism, PowersMatchStepping) {
  std::mt19937_64 rng(3);
  std::vector<Atom> perm(50);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  const auto t = Automorphism::from_permutation(ProbSpace::uniform(50), perm);
  for (std::int64_t k : {-120, -7, -1, 0, 1, 2, 49, 50, 333}) {
    for (Atom x = 0; x < 50; ++x) EXPECT_EQ(t.apply_power(x, k), oracle::step_power(t, x, k));
  }
  EXPECT_EQ(t.compose(t.inverse()), Automorphism::identity(t.space()));
  EXPECT_EQ(t.power(3).compose(t.power(-5)), t.power(-2));
}

TEST(Automorphism, KoopmanAndPreimage) {
  const auto t = cyclic_system(4);
  const auto f = Obs::indicator(MSet::range(t.space(), 0, 1));
  const auto g = t.koopman(f, 1);
  // (f o T)(x) = 1 iff x + 1 == 0 mod 4
  EXPECT_EQ(std::vector<double>(g.values().begin(), g.values().end()), (std::vector<double>{0, 0, 0, 1}));
  EXPECT_EQ(t.preimage(MSet::range(t.space(), 0, 1), 1).atoms(), std::vector<Atom>{3});
  EXPECT_EQ(t.image(MSet::range(t.space(), 0, 1), 1).atoms(), std::vector<Atom>{1});
}

TEST(Odometer, SmallCases) {
  const auto two = odometer_system(2, 1);
  EXPECT_EQ(two(0), 1u);
  EXPECT_EQ(two(1), 0u);

  // oracle: add one with carry on a little-endian digit vector
  const auto t = odometer_system(2, 3);
  std::vector<std::size_t> digits(3, 0);
  Atom x = 0;
  for (int step = 0; step < 8; ++step) {
    EXPECT_EQ(odometer_digits(x, 2, 3), digits);
    std::size_t i = 0;
    while (i < 3 && digits[i] == 1) digits[i++] = 0;
    if (i < 3) digits[i] = 1;
    x = t(x);
  }
  EXPECT_EQ(x, 0u);
  EXPECT_EQ(oracle::cycle_from_zero(t).size(), 8u);

  const auto big = odometer_system(3, 4);
  EXPECT_EQ(big.power(81), Automorphism::identity(big.space()));
  EXPECT_TRUE(big.is_single_cycle());
  EXPECT_THROW(odometer_system(2, 25), InvalidArgument);
  EXPECT_THROW(odometer_system(1, 3), InvalidArgument);
}

TEST(Odometer, CoordinateIsRadicalInverse) {
  const auto t = odometer_system(2, 3);
  const auto c = odometer_coordinate(t.space(), 2, 3);
  // atom 1 = digits (1,0,0) -> 0.5; atom 6 = (0,1,1) -> 0.25 + 0.125
  EXPECT_EQ(c[1], 0.5);
  EXPECT_EQ(c[6], 0.375);
  EXPECT_EQ(c[0], 0.0);
}

TEST(Torus, ReducesToCyclic) {
  const auto a = torus_shift_action(1, 12, {{1}}, 3);
  const auto c = cyclic_system(12);
  for (Atom x = 0; x < 12; ++x) EXPECT_EQ(a.apply(x, {1}), c(x));
}

TEST(Torus, TwoDimensionalMoves) {
  const auto a = torus_shift_action(2, 4, {{1, 0}, {0, 1}}, 2);
  const auto& geo = *a.geometry();
  EXPECT_EQ(a.apply(geo.atom({0, 0}), {1, 1}), geo.atom({1, 1}));
  EXPECT_EQ(geo.coords(geo.atom({3, 2})), (IntVec{3, 2}));
}

TEST(Torus, FreenessOnDeclaredBox) {
  // 25 atoms x 24 nonzero elements of [-2, 2]^2, checked by brute force
  const auto a = torus_shift_action(2, 5, {{1, 0}, {0, 1}}, 2);
  const auto& geo = *a.geometry();
  std::size_t checked = 0;
  for (std::int64_t g0 = -2; g0 <= 2; ++g0) {
    for (std::int64_t g1 = -2; g1 <= 2; ++g1) {
      if (g0 == 0 && g1 == 0) continue;
      for (Atom x = 0; x < 25; ++x) {
        EXPECT_NE(oracle::torus_apply(geo, x, {g0, g1}), x);
        EXPECT_EQ(a.apply(x, {g0, g1}), oracle::torus_apply(geo, x, {g0, g1}));
        ++checked;
      }
    }
  }
  EXPECT_EQ(checked, 600u);
  // a box reaching the period has fixed points
  EXPECT_THROW(torus_shift_action(2, 5, {{1, 0}, {0, 1}}, 5), InvalidArgument);
  EXPECT_THROW(a.check_bounds({3, 0}), InvalidArgument);
  EXPECT_THROW(a.check_bounds({1}), InvalidArgument);
}

TEST(Torus, RightActionOnObservables) {
  const auto a = torus_shift_action(2, 7, {{1, 0}, {2, 1}}, 3);
  std::mt19937_64 rng(5);
  std::vector<double> v(49);
  for (auto& x : v) x = oracle::uniform01(rng);
  const auto f = Obs::from_values(a.space(), v);
  EXPECT_EQ(apply_group(a, {0, 0}, f).values()[10], f[10]);
  const IntVec g{1, -2}, h{-1, 1}, gh{0, -1};
  const auto lhs = apply_group(a, g, apply_group(a, h, f));
  const auto rhs = apply_group(a, gh, f);
  for (Atom x = 0; x < 49; ++x) EXPECT_EQ(lhs[x], rhs[x]);
  const auto back = apply_group(a, {-1, 2}, apply_group(a, g, f));
  for (Atom x = 0; x < 49; ++x) EXPECT_EQ(back[x], f[x]);
}

TEST(SpecialFlow, RoofOneIsTheBase) {
  const auto base = cyclic_system(6);
  const auto flow = special_flow(base, Obs::constant(base.space(), 1.0), 1.0);
  EXPECT_EQ(flow.step_map().size(), 6u);
  for (Atom x = 0; x < 6; ++x) EXPECT_EQ(flow.step_map()(x), base(x));
}

TEST(SpecialFlow, TwoCycleWithRoofTwoThree) {
  const auto base = cyclic_system(2);
  const auto flow = special_flow(base, Obs::from_values(base.space(), {2, 3}), 0.5);
  const auto& t = flow.step_map();
  ASSERT_EQ(t.size(), 5u);
  // atoms (0,0) (0,1) (1,0) (1,1) (1,2)
  const std::vector<Atom> expected{1, 2, 3, 4, 0};
  for (Atom x = 0; x < 5; ++x) EXPECT_EQ(t(x), expected[x]);
  EXPECT_TRUE(t.is_single_cycle());
}

TEST(SpecialFlow, TwoValuedRoofAndErrors) {
  const auto base = cyclic_system(5);
  EXPECT_NO_THROW(special_flow(base, Obs::from_values(base.space(), {2, 3, 2, 3, 3}), 1.0));
  EXPECT_THROW(special_flow(base, Obs::from_values(base.space(), {2, 0, 2, 3, 3}), 1.0), InvalidArgument);
  EXPECT_THROW(special_flow(base, Obs::from_values(base.space(), {2, 1.5, 2, 3, 3}), 1.0), InvalidArgument);
  const auto w = Automorphism::identity(ProbSpace::weighted({0.5, 0.5 - 1e-3, 1e-3}));
  EXPECT_THROW(special_flow(w, Obs::constant(w.space(), 1.0), 1.0), InvalidArgument);
}

TEST(DiscreteFlow, RoundingAndGroupLaw) {
  const DiscreteFlow flow(cyclic_system(30), 0.5);
  EXPECT_EQ(flow.steps(0.25), 1);   // 0.5 rounds away from zero
  EXPECT_EQ(flow.steps(-0.25), -1);
  EXPECT_EQ(flow.steps(0.74), 1);
  EXPECT_EQ(flow.steps(-3.0), -6);
  EXPECT_EQ(flow.at(0.0), Automorphism::identity(flow.space()));
  for (double s : {-2.5, 0.5, 4.0}) {
    for (double t : {-1.0, 1.5, 7.5}) EXPECT_EQ(flow.at(s).compose(flow.at(t)), flow.at(s + t));
  }
  EXPECT_THROW(DiscreteFlow(cyclic_system(3), 0.0), InvalidArgument);
}

TEST(Systems, MeasurePreservationOnWeightedSpace) {
  std::mt19937_64 rng(8);
  // swap atoms of equal weight only
  const auto s = ProbSpace::weighted({0.25, 0.25, 0.125, 0.125, 0.25});
  const auto t = Automorphism::from_permutation(s, {1, 4, 3, 2, 0});
  for (int trial = 0; trial < 30; ++trial) {
    MSet a(s);
    for (Atom x = 0; x < 5; ++x) {
      if (rng() % 2) a.insert(x);
    }
    EXPECT_NEAR(measure(t.image(a)), measure(a), 1e-12);
    EXPECT_NEAR(measure(t.preimage(a, 3)), measure(a), 1e-12);
  }
}
