#pragma once

// Reference evaluations for the tests. Each one walks the dynamics one step
// at a time through Automorphism::operator() or the torus coordinates and
// never calls the library's averaging engine, so a shared bug cannot make
// both sides agree.

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "slowconv/averaging.hpp"
#include "slowconv/measure.hpp"
#include "slowconv/systems.hpp"

namespace oracle {

using slowconv::Atom;

inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// T^k x by k single steps (or steps of the inverse for k < 0).
inline Atom step_power(const slowconv::Automorphism& t, Atom x, std::int64_t k) {
  if (k >= 0) {
    for (std::int64_t i = 0; i < k; ++i) x = t(x);
    return x;
  }
  std::vector<Atom> inv(t.size());
  for (Atom y = 0; y < t.size(); ++y) inv[t(y)] = y;
  for (std::int64_t i = 0; i < -k; ++i) x = inv[x];
  return x;
}

// Cycle through atom 0 in forward order.
inline std::vector<Atom> cycle_from_zero(const slowconv::Automorphism& t) {
  std::vector<Atom> seq{0};
  for (Atom x = t(0); x != 0; x = t(x)) seq.push_back(x);
  return seq;
}

inline double l1_dev(const std::vector<double>& v, std::span<const double> w, double c) {
  long double s = 0;
  for (std::size_t i = 0; i < v.size(); ++i) s += std::fabs(static_cast<long double>(v[i]) - c) * w[i];
  return static_cast<double>(s);
}

inline double integral(const std::vector<double>& v, std::span<const double> w) {
  long double s = 0;
  for (std::size_t i = 0; i < v.size(); ++i) s += static_cast<long double>(v[i]) * w[i];
  return static_cast<double>(s);
}

// (1/N) sum_{i=1..N} f(T^i x) by walking the single cycle.
inline std::vector<double> cesaro(const slowconv::Automorphism& t, const slowconv::Obs& f, std::int64_t n) {
  const auto seq = cycle_from_zero(t);
  const std::size_t len = seq.size();
  std::vector<double> out(len);
  for (std::size_t p = 0; p < len; ++p) {
    long double s = 0;
    for (std::int64_t i = 1; i <= n; ++i) s += f[seq[(p + static_cast<std::size_t>(i)) % len]];
    out[seq[p]] = static_cast<double>(s / n);
  }
  return out;
}

// Equal weight on the step powers lo..hi, by a sliding window along the
// single cycle (window sums updated by one add and one drop per atom).
inline std::vector<double> window_average(const slowconv::Automorphism& t, const std::vector<double>& f,
                                          std::int64_t lo, std::int64_t hi) {
  const auto seq = cycle_from_zero(t);
  const auto len = static_cast<std::int64_t>(seq.size());
  auto val = [&](std::int64_t p) { return f[seq[static_cast<std::size_t>(((p % len) + len) % len)]]; };
  long double s = 0;
  for (std::int64_t i = lo; i <= hi; ++i) s += val(i);
  const auto width = static_cast<long double>(hi - lo + 1);
  std::vector<double> out(seq.size());
  for (std::int64_t p = 0; p < len; ++p) {
    out[seq[static_cast<std::size_t>(p)]] = static_cast<double>(s / width);
    s += val(p + 1 + hi) - val(p + lo);
  }
  return out;
}

// T_g x on a torus from coordinates: x + sum_i g_i shifts[i] (mod side).
inline Atom torus_apply(const slowconv::TorusGeometry& geo, Atom x, const slowconv::IntVec& g) {
  auto c = geo.coords(x);
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t k = 0; k < geo.dim; ++k) c[k] += g[i] * geo.shifts[i][k];
  }
  return geo.atom(c);
}

inline std::vector<double> group_average(const slowconv::ZdAction& a, const slowconv::DiscreteWeights& w,
                                         const slowconv::Obs& f) {
  const auto& geo = *a.geometry();
  std::vector<double> out(f.size());
  for (Atom x = 0; x < f.size(); ++x) {
    long double s = 0;
    for (std::size_t i = 0; i < w.support.size(); ++i) s += w.weights[i] * f[torus_apply(geo, x, w.support[i])];
    out[x] = static_cast<double>(s);
  }
  return out;
}

// m{x : T_g x in V for every g in the window} / m(V) on a torus.
inline double torus_invariance_ratio(const slowconv::ZdAction& a, const slowconv::MSet& v,
                                     const std::vector<slowconv::IntVec>& window) {
  const auto& geo = *a.geometry();
  std::size_t core = 0;
  for (Atom x = 0; x < v.universe(); ++x) {
    bool in = true;
    for (const auto& g : window) in = in && v.contains(torus_apply(geo, x, g));
    core += in ? 1 : 0;
  }
  return static_cast<double>(core) / static_cast<double>(v.count());
}

// Flow window [-R, R] in step powers along the single cycle.
inline double flow_invariance_ratio(const slowconv::Automorphism& t, const slowconv::MSet& v, std::int64_t r) {
  const auto seq = cycle_from_zero(t);
  const auto len = static_cast<std::int64_t>(seq.size());
  std::size_t core = 0;
  for (std::int64_t p = 0; p < len; ++p) {
    bool in = true;
    for (std::int64_t s = -r; s <= r && in; ++s) {
      in = v.contains(seq[static_cast<std::size_t>((((p + s) % len) + len) % len)]);
    }
    core += in ? 1 : 0;
  }
  return static_cast<double>(core) / static_cast<double>(v.count());
}

// Random positive weights summing to 1 (within rounding).
inline std::vector<double> random_weights(std::size_t n, std::mt19937_64& rng) {
  std::vector<double> w(n);
  long double s = 0;
  for (auto& x : w) {
    x = 0.1 + uniform01(rng);
    s += x;
  }
  for (auto& x : w) x = static_cast<double>(x / s);
  return w;
}

}  // namespace oracle
