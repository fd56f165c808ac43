#pragma once

// Near-invariant structures: Rokhlin towers for single-cycle automorphisms,
// arcs that stay put under a flow window, and (F, c)-invariant unions of
// cubes on a torus.

#include <optional>
#include <span>
#include <string>

#include "slowconv/measure.hpp"
#include "slowconv/systems.hpp"

namespace slowconv {

struct Tower {
  MSet base;
  std::size_t height = 0;
  std::size_t columns = 0;
  Automorphism system;
  MSet body;  // union of T^i(base), 1 <= i <= height

  // T^i(base), 1 <= i <= height.
  MSet level(std::size_t i) const;
};

// packed: columns abut (base atoms every `height` steps along the cycle).
// spread: columns are spaced evenly around the whole cycle.
enum class TowerLayout { packed, spread };

struct TowerOptions {
  TowerLayout layout = TowerLayout::packed;
  // Rotate the placement until no base atom falls in this set, if possible.
  std::optional<MSet> avoid;
};

// Greedy tower along the cycle through atom 0 with ceil(mu*N/h) columns.
// Throws Infeasible when mu*N < h or the columns do not fit.
Tower build_tower(const Automorphism& system, std::size_t height, double target_measure,
                  const TowerOptions& options = {});

// Exact check that the levels T^1 B, ..., T^h B are pairwise disjoint.
bool levels_disjoint(const Tower& tower);

struct InvarianceCert {
  MSet set;
  std::string window;
  MSet core;           // intersection of the preimages of `set` over the window
  double ratio = 0;    // m(core) / m(set)
  double threshold = 0;
  double eta = kDefaultEta;
  bool pass = false;   // ratio > threshold + eta
};

// Window [-L, L] of a flow, discretized to the step powers
// |s| <= round(L / delta). Throws InvalidArgument for empty V or L < 0.
InvarianceCert check_invariance(const DiscreteFlow& flow, const MSet& v, double L,
                                double threshold, double eta = kDefaultEta);

// Finite window F of a Z^d action.
InvarianceCert check_invariance(const ZdAction& action, const MSet& v,
                                std::span<const IntVec> window, double threshold,
                                double eta = kDefaultEta);

struct FlowBand {
  MSet set;
  InvarianceCert cert;
  std::size_t arc_length = 0;
  std::int64_t shrink = 0;  // round(L / delta) atoms lost on each side
};

// One orbit arc of round(mu*M) atoms starting at `anchor`, certified
// m(core) > (1 - eps) m(V) over the window [-L, L].
FlowBand build_flow_band(const DiscreteFlow& flow, double L, double target_measure, double eps,
                         Atom anchor = 0, double eta = kDefaultEta);

struct FcInvariantSet {
  MSet set;
  InvarianceCert cert;
  std::size_t cube_side = 0;
  std::size_t cubes = 0;
};

// Union of disjoint cubes of side s, s^d <= eps*N, placed from `origin` on a
// coarse grid. Needs a torus action. Throws Infeasible when no cube side
// satisfies the shrink bound.
FcInvariantSet build_fc_invariant(const ZdAction& action, std::span<const IntVec> window, double c,
                                  double eps_measure, const IntVec& origin = {},
                                  double eta = kDefaultEta);

// Number of atoms realizing measure mu on an N-atom uniform space: mu*N
// rounded down, or to the nearest integer when within 1e-9 of it.
std::size_t atoms_for_measure(double mu, std::size_t n);

}  // namespace slowconv
