#pragma once

// Finite probability spaces, measurable sets and observables.
//
// Every MSet and Obs is bound to exactly one ProbSpace through a shared
// pointer; binary operations compare the pointers and throw SpaceMismatch
// when they differ. Atoms are indexed 0..N-1 and sets are dense.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace slowconv {

using Atom = std::size_t;

// Upper bound on the number of atoms of any model (about 1.7e7).
inline constexpr std::size_t kMaxAtoms = std::size_t{1} << 24;

// Default strictness margin for certificate comparisons: "lhs > rhs" is
// evaluated as lhs > rhs + eta.
inline constexpr double kDefaultEta = 1e-10;

class ProbSpace;
using SpacePtr = std::shared_ptr<const ProbSpace>;

class ProbSpace {
 public:
  // Uniform weights 1/n. Throws InvalidArgument for n == 0 or n > kMaxAtoms.
  static SpacePtr uniform(std::size_t n);

  // Weights must be strictly positive, finite and sum to 1 within 1e-12.
  static SpacePtr weighted(std::vector<double> weights);

  std::size_t size() const noexcept { return weights_.size(); }
  double weight(Atom x) const { return weights_[x]; }
  std::span<const double> weights() const noexcept { return weights_; }
  bool is_uniform() const noexcept { return uniform_; }

 private:
  ProbSpace(std::vector<double> weights, bool uniform)
      : weights_(std::move(weights)), uniform_(uniform) {}

  std::vector<double> weights_;
  bool uniform_;
};

class MSet {
 public:
  // Empty set.
  explicit MSet(SpacePtr space);

  static MSet full(SpacePtr space);
  static MSet from_atoms(SpacePtr space, std::span<const Atom> atoms);
  // Half-open range [first, last) of atom indices.
  static MSet range(SpacePtr space, Atom first, Atom last);
  static MSet from_mask(SpacePtr space, std::vector<std::uint8_t> mask);

  const SpacePtr& space() const noexcept { return space_; }
  std::size_t universe() const noexcept { return mask_.size(); }

  bool contains(Atom x) const { return mask_[x] != 0; }
  void insert(Atom x) { mask_[x] = 1; }
  void erase(Atom x) { mask_[x] = 0; }

  std::size_t count() const noexcept;
  bool empty() const noexcept { return count() == 0; }
  std::vector<Atom> atoms() const;
  std::span<const std::uint8_t> mask() const noexcept { return mask_; }

  bool operator==(const MSet& other) const;

 private:
  MSet(SpacePtr space, std::vector<std::uint8_t> mask);

  SpacePtr space_;
  std::vector<std::uint8_t> mask_;
};

class Obs {
 public:
  static Obs constant(SpacePtr space, double c);
  static Obs indicator(const MSet& set);
  // Throws InvalidArgument for non-finite values or a length mismatch.
  static Obs from_values(SpacePtr space, std::vector<double> values);

  const SpacePtr& space() const noexcept { return space_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](Atom x) const { return values_[x]; }
  std::span<const double> values() const noexcept { return values_; }

 private:
  Obs(SpacePtr space, std::vector<double> values)
      : space_(std::move(space)), values_(std::move(values)) {}

  SpacePtr space_;
  std::vector<double> values_;
};

enum class SetOp { Union, Intersect, Diff, SymDiff };

// m(s). Throws SpaceMismatch if s is not bound to `space`.
double measure(const SpacePtr& space, const MSet& s);
double measure(const MSet& s);

// Sum over atoms of |f(x) - c| * weight(x).
double l1_dev(const SpacePtr& space, const Obs& f, double c);
double l1_dev(const Obs& f, double c);

double integral(const Obs& f);
double l1_norm(const Obs& f);
double sup_norm(const Obs& f);

MSet set_algebra(const MSet& a, const MSet& b, SetOp op);

inline MSet operator|(const MSet& a, const MSet& b) { return set_algebra(a, b, SetOp::Union); }
inline MSet operator&(const MSet& a, const MSet& b) { return set_algebra(a, b, SetOp::Intersect); }
inline MSet operator-(const MSet& a, const MSet& b) { return set_algebra(a, b, SetOp::Diff); }
inline MSet operator^(const MSet& a, const MSet& b) { return set_algebra(a, b, SetOp::SymDiff); }

MSet complement(const MSet& a);

// Pointwise helpers used by the operator and certificate code.
Obs add(const Obs& f, const Obs& g);
Obs scale(const Obs& f, double a);
Obs multiply(const Obs& f, const MSet& s);  // f * 1_s

// Throws SpaceMismatch unless both pointers name the same space.
void require_same_space(const SpacePtr& a, const SpacePtr& b);

}  // namespace slowconv
