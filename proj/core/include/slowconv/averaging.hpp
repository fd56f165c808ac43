#pragma once

// Weighted ergodic-average operators. Every operator is linear and, for
// mass-one weights, positive and integral-preserving.

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "slowconv/measure.hpp"
#include "slowconv/systems.hpp"

namespace slowconv {

// Non-negative weights on distinct group elements, summing to 1.
struct DiscreteWeights {
  std::vector<IntVec> support;
  std::vector<double> weights;

  static DiscreteWeights make(std::vector<IntVec> support, std::vector<double> weights);
  static DiscreteWeights uniform(std::vector<IntVec> support);
};

// The box {-r..r}^d, listed with coordinate 0 varying fastest.
std::vector<IntVec> box(std::size_t d, std::int64_t radius);

// Finitely supported probability measure on the time axis.
struct TimeMeasure {
  std::vector<double> times;
  std::vector<double> probs;

  static TimeMeasure make(std::vector<double> times, std::vector<double> probs);
  static TimeMeasure point_mass(double t);
  // Uniform on the integer points of [-n, n].
  static TimeMeasure uniform_integers(std::int64_t n);

  double mass_within(double L) const;  // nu([-L, L])
};

// Density h sampled at the left endpoints r_j = r0 + j*dr of a uniform grid;
// sum_j h_j dr = 1 within 1e-9.
struct Kernel {
  double r0 = 0;
  double dr = 1;
  std::vector<double> values;

  static Kernel make(double r0, double dr, std::vector<double> values);
  static Kernel uniform(double a, double b, std::size_t cells);
};

// sum_k w_k (f o T^{s_k}) for (s_k, w_k) pairs; the shared engine behind
// the flow averages. Runs along the cycle decomposition of T.
Obs power_combination(const Automorphism& t, const Obs& f,
                      std::span<const std::pair<std::int64_t, double>> terms);

// (1/N) sum_{i=1..N} f o T^i.
Obs cesaro(const Automorphism& t, const Obs& f, std::int64_t n);

// || (N/(N+1)) P_N f - P_{N+1} f ||_1, which equals ||f||_1 / (N+1).
double telescope_gap(const Automorphism& t, const Obs& f, std::int64_t n);

// sum_g w_g (f o T_g).
Obs weighted_group_average(const ZdAction& action, const DiscreteWeights& w, const Obs& f);

// sum_i p_i (f o T_{t_i}).
Obs flow_measure_average(const DiscreteFlow& flow, const TimeMeasure& nu, const Obs& f);

struct Truncated {
  Obs q;            // sum over |t_i| <= L only, not renormalized
  double residual;  // 1 - nu([-L, L])
};

Truncated truncated_average(const DiscreteFlow& flow, const TimeMeasure& nu, double L, const Obs& f);

// Left-endpoint quadrature of int h(r) f(T_{r t} x) dr; t == 0 returns f.
Obs kernel_average(const DiscreteFlow& flow, const Kernel& h, double t, const Obs& f);

}  // namespace slowconv
