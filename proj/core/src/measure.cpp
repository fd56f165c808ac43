#include "slowconv/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "slowconv/error.hpp"

namespace slowconv {

namespace {

constexpr double kWeightSumTol = 1e-12;

}  // namespace

void require_same_space(const SpacePtr& a, const SpacePtr& b) {
  if (a.get() != b.get()) throw SpaceMismatch();
}

SpacePtr ProbSpace::uniform(std::size_t n) {
  if (n == 0) throw InvalidArgument("a probability space needs at least one atom");
  if (n > kMaxAtoms) {
    throw InvalidArgument("atom count " + std::to_string(n) + " exceeds the cap " +
                          std::to_string(kMaxAtoms));
  }
  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  return SpacePtr(new ProbSpace(std::move(w), true));
}

SpacePtr ProbSpace::weighted(std::vector<double> weights) {
  if (weights.empty()) throw InvalidArgument("a probability space needs at least one atom");
  if (weights.size() > kMaxAtoms) throw InvalidArgument("atom count exceeds the cap");
  long double total = 0;
  for (double w : weights) {
    if (!std::isfinite(w) || w <= 0.0) {
      throw InvalidArgument("atom weights must be finite and strictly positive");
    }
    total += w;
  }
  if (std::fabs(static_cast<double>(total) - 1.0) > kWeightSumTol) {
    throw InvalidArgument("atom weights must sum to 1 (got " +
                          std::to_string(static_cast<double>(total)) + ")");
  }
  const bool uniform = std::all_of(weights.begin(), weights.end(),
                                   [&](double w) { return w == weights.front(); });
  return SpacePtr(new ProbSpace(std::move(weights), uniform));
}

MSet::MSet(SpacePtr space) : MSet(space, std::vector<std::uint8_t>(space->size(), 0)) {}

MSet::MSet(SpacePtr space, std::vector<std::uint8_t> mask)
    : space_(std::move(space)), mask_(std::move(mask)) {}

MSet MSet::full(SpacePtr space) {
  const auto n = space->size();
  return MSet(std::move(space), std::vector<std::uint8_t>(n, 1));
}

MSet MSet::from_atoms(SpacePtr space, std::span<const Atom> atoms) {
  MSet s(std::move(space));
  for (Atom x : atoms) {
    if (x >= s.universe()) throw InvalidArgument("atom index out of range");
    s.insert(x);
  }
  return s;
}

MSet MSet::range(SpacePtr space, Atom first, Atom last) {
  MSet s(std::move(space));
  if (first > last || last > s.universe()) throw InvalidArgument("atom range out of bounds");
  std::fill(s.mask_.begin() + static_cast<std::ptrdiff_t>(first),
            s.mask_.begin() + static_cast<std::ptrdiff_t>(last), std::uint8_t{1});
  return s;
}

MSet MSet::from_mask(SpacePtr space, std::vector<std::uint8_t> mask) {
  if (mask.size() != space->size()) throw InvalidArgument("mask length differs from atom count");
  for (auto& b : mask) b = b ? 1 : 0;
  return MSet(std::move(space), std::move(mask));
}

std::size_t MSet::count() const noexcept {
  return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), std::uint8_t{1}));
}

std::vector<Atom> MSet::atoms() const {
  std::vector<Atom> out;
  for (Atom x = 0; x < mask_.size(); ++x) {
    if (mask_[x]) out.push_back(x);
  }
  return out;
}

bool MSet::operator==(const MSet& other) const {
  return space_.get() == other.space_.get() && mask_ == other.mask_;
}

Obs Obs::constant(SpacePtr space, double c) {
  if (!std::isfinite(c)) throw InvalidArgument("observable values must be finite");
  const auto n = space->size();
  return Obs(std::move(space), std::vector<double>(n, c));
}

Obs Obs::indicator(const MSet& set) {
  std::vector<double> v(set.universe());
  const auto mask = set.mask();
  for (Atom x = 0; x < v.size(); ++x) v[x] = mask[x] ? 1.0 : 0.0;
  return Obs(set.space(), std::move(v));
}

Obs Obs::from_values(SpacePtr space, std::vector<double> values) {
  if (values.size() != space->size()) {
    throw InvalidArgument("observable length differs from atom count");
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw InvalidArgument("observable values must be finite");
  }
  return Obs(std::move(space), std::move(values));
}

double measure(const SpacePtr& space, const MSet& s) {
  require_same_space(space, s.space());
  if (space->is_uniform()) {
    return static_cast<double>(s.count()) / static_cast<double>(space->size());
  }
  long double total = 0;
  const auto mask = s.mask();
  const auto w = space->weights();
  for (Atom x = 0; x < mask.size(); ++x) {
    if (mask[x]) total += w[x];
  }
  return static_cast<double>(total);
}

double measure(const MSet& s) { return measure(s.space(), s); }

double l1_dev(const SpacePtr& space, const Obs& f, double c) {
  require_same_space(space, f.space());
  const auto v = f.values();
  long double total = 0;
  if (space->is_uniform()) {
    for (double fx : v) total += std::fabs(fx - c);
    return static_cast<double>(total / static_cast<long double>(v.size()));
  }
  const auto w = space->weights();
  for (Atom x = 0; x < v.size(); ++x) total += static_cast<long double>(std::fabs(v[x] - c)) * w[x];
  return static_cast<double>(total);
}

double l1_dev(const Obs& f, double c) { return l1_dev(f.space(), f, c); }

double integral(const Obs& f) {
  const auto& space = f.space();
  const auto v = f.values();
  long double total = 0;
  if (space->is_uniform()) {
    for (double fx : v) total += fx;
    return static_cast<double>(total / static_cast<long double>(v.size()));
  }
  const auto w = space->weights();
  for (Atom x = 0; x < v.size(); ++x) total += static_cast<long double>(v[x]) * w[x];
  return static_cast<double>(total);
}

double l1_norm(const Obs& f) { return l1_dev(f, 0.0); }

double sup_norm(const Obs& f) {
  double m = 0;
  for (double v : f.values()) m = std::max(m, std::fabs(v));
  return m;
}

MSet set_algebra(const MSet& a, const MSet& b, SetOp op) {
  require_same_space(a.space(), b.space());
  const auto ma = a.mask();
  const auto mb = b.mask();
  std::vector<std::uint8_t> out(ma.size());
  switch (op) {
    case SetOp::Union:
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = ma[i] | mb[i];
      break;
    case SetOp::Intersect:
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = ma[i] & mb[i];
      break;
    case SetOp::Diff:
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = ma[i] & (mb[i] ^ 1);
      break;
    case SetOp::SymDiff:
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = ma[i] ^ mb[i];
      break;
  }
  return MSet::from_mask(a.space(), std::move(out));
}

MSet complement(const MSet& a) { return MSet::full(a.space()) - a; }

Obs add(const Obs& f, const Obs& g) {
  require_same_space(f.space(), g.space());
  std::vector<double> v(f.size());
  for (Atom x = 0; x < v.size(); ++x) v[x] = f[x] + g[x];
  return Obs::from_values(f.space(), std::move(v));
}

Obs scale(const Obs& f, double a) {
  std::vector<double> v(f.values().begin(), f.values().end());
  for (double& x : v) x *= a;
  return Obs::from_values(f.space(), std::move(v));
}

Obs multiply(const Obs& f, const MSet& s) {
  require_same_space(f.space(), s.space());
  std::vector<double> v(f.size());
  const auto mask = s.mask();
  for (Atom x = 0; x < v.size(); ++x) v[x] = mask[x] ? f[x] : 0.0;
  return Obs::from_values(f.space(), std::move(v));
}

}  // namespace slowconv
