#pragma once

// Measure-preserving dynamics on finite spaces.
//
// Convention used throughout the library: operators act on observables by
// composition, (T_g f)(x) = f(T_g x), and the set translates appearing in
// invariance certificates are preimages {x : T_g x in V}. With this choice
// "sum_g w_g T_g 1_A vanishes at x" is the same statement as "the F-orbit of
// x misses A".

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "slowconv/measure.hpp"

namespace slowconv {

using IntVec = std::vector<std::int64_t>;

// A bijection of the atoms that preserves the weights. Copies are cheap:
// the permutation and its cycle decomposition are shared and immutable.
class Automorphism {
 public:
  struct Cycle {
    std::size_t start;   // offset into orbit_order()
    std::size_t length;
  };

  // Throws InvalidArgument if `forward` is not a bijection or moves mass.
  static Automorphism from_permutation(SpacePtr space, std::vector<Atom> forward);

  static Automorphism identity(SpacePtr space);

  const SpacePtr& space() const noexcept { return d_->space; }
  std::size_t size() const noexcept { return d_->forward.size(); }

  Atom operator()(Atom x) const { return d_->forward[x]; }
  // T^k x for any integer k, O(1).
  Atom apply_power(Atom x, std::int64_t k) const;

  Automorphism power(std::int64_t k) const;
  Automorphism inverse() const { return power(-1); }
  // (this * after)(x) = this(after(x)).
  Automorphism compose(const Automorphism& after) const;

  // Atoms listed cycle by cycle, each cycle in forward order starting from
  // its smallest atom.
  std::span<const std::uint32_t> orbit_order() const noexcept { return d_->orbit; }
  std::span<const Cycle> cycles() const noexcept { return d_->cycles; }
  std::size_t position(Atom x) const { return d_->pos[x]; }
  const Cycle& cycle_of(Atom x) const { return d_->cycles[d_->cycle_id[x]]; }

  bool is_single_cycle() const noexcept { return d_->cycles.size() == 1; }
  std::size_t orbit_length(Atom x) const { return cycle_of(x).length; }

  Obs koopman(const Obs& f, std::int64_t k = 1) const;      // f o T^k
  MSet preimage(const MSet& s, std::int64_t k = 1) const;   // {x : T^k x in s}
  MSet image(const MSet& s, std::int64_t k = 1) const;      // T^k(s)

  bool operator==(const Automorphism& other) const;

 private:
  struct Data {
    SpacePtr space;
    std::vector<std::uint32_t> forward;
    std::vector<std::uint32_t> orbit;
    std::vector<std::uint32_t> pos;
    std::vector<std::uint32_t> cycle_id;
    std::vector<Cycle> cycles;
  };

  explicit Automorphism(std::shared_ptr<const Data> d) : d_(std::move(d)) {}
  static std::shared_ptr<const Data> build(SpacePtr space, std::vector<std::uint32_t> forward);

  std::shared_ptr<const Data> d_;
};

// Coordinates of a d-dimensional torus model: atom index is
// sum_i coord_i * side^i (coordinate 0 varies fastest).
struct TorusGeometry {
  std::size_t side = 0;
  std::size_t dim = 0;
  std::vector<IntVec> shifts;  // translation vector of each generator

  IntVec coords(Atom x) const;
  Atom atom(const IntVec& coords) const;  // coordinates are reduced mod side
  // Translation of T_g, each component reduced to (-side/2, side/2].
  IntVec translation(const IntVec& g) const;
};

// A Z^d action generated by d commuting automorphisms. Group elements are
// restricted to the box [-box_radius, box_radius]^d, on which freeness (no
// fixed atoms for g != 0) is certified exhaustively at construction.
class ZdAction {
 public:
  ZdAction(std::vector<Automorphism> generators, std::int64_t box_radius,
           std::optional<TorusGeometry> geometry = std::nullopt);

  std::size_t dimension() const noexcept { return generators_.size(); }
  std::int64_t box_radius() const noexcept { return box_radius_; }
  const SpacePtr& space() const noexcept { return generators_.front().space(); }
  const std::vector<Automorphism>& generators() const noexcept { return generators_; }
  const std::optional<TorusGeometry>& geometry() const noexcept { return geometry_; }

  // Throws InvalidArgument when g has the wrong length or leaves the box.
  void check_bounds(const IntVec& g) const;
  Atom apply(Atom x, const IntVec& g) const;
  // The full permutation x -> T_g x.
  std::vector<Atom> map(const IntVec& g) const;

 private:
  std::vector<Automorphism> generators_;
  std::int64_t box_radius_;
  std::optional<TorusGeometry> geometry_;
};

// Time-delta map of a flow. T_t is the step map composed round(t/delta)
// times, rounding half away from zero.
class DiscreteFlow {
 public:
  DiscreteFlow(Automorphism step_map, double delta);

  const SpacePtr& space() const noexcept { return step_.space(); }
  const Automorphism& step_map() const noexcept { return step_; }
  double delta() const noexcept { return delta_; }

  std::int64_t steps(double t) const;
  Atom apply(Atom x, double t) const { return step_.apply_power(x, steps(t)); }
  Automorphism at(double t) const { return step_.power(steps(t)); }
  Obs koopman(const Obs& f, double t) const { return step_.koopman(f, steps(t)); }

 private:
  Automorphism step_;
  double delta_;
};

// Uniform n-cycle x -> x + 1 mod n.
Automorphism cyclic_system(std::size_t n);

// Add-one-with-carry on base-`base` digit strings of length `digits`; atom
// index is the little-endian value of the digit string.
Automorphism odometer_system(std::size_t base, std::size_t digits);
std::vector<std::size_t> odometer_digits(Atom x, std::size_t base, std::size_t digits);
// Fractional coordinate sum_i d_i base^-(i+1) of every odometer point.
Obs odometer_coordinate(const SpacePtr& space, std::size_t base, std::size_t digits);

// Torus of side^d atoms; generator i translates by shifts[i] (mod side).
ZdAction torus_shift_action(std::size_t d, std::size_t side, const std::vector<IntVec>& shifts,
                            std::int64_t box_radius);

// Suspension over a uniform base with integer roof. Atoms (x, j),
// 0 <= j < roof(x), are laid out lexicographically; the time-delta map moves
// (x, j) to (x, j+1) below the roof and to (base(x), 0) at the roof.
DiscreteFlow special_flow(const Automorphism& base, const Obs& roof, double delta);

// f o T_g.
Obs apply_group(const ZdAction& action, const IntVec& g, const Obs& f);

}  // namespace slowconv
