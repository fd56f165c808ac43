#include "slowconv/systems.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "slowconv/error.hpp"

namespace slowconv {

namespace {

std::int64_t floor_mod(std::int64_t a, std::int64_t m) {
  const std::int64_t r = a % m;
  return r < 0 ? r + m : r;
}

constexpr double kMassTol = 1e-15;

}  // namespace

std::shared_ptr<const Automorphism::Data> Automorphism::build(SpacePtr space,
                                                              std::vector<std::uint32_t> forward) {
  const std::size_t n = forward.size();
  if (n != space->size()) throw InvalidArgument("permutation length differs from atom count");

  std::vector<std::uint8_t> hit(n, 0);
  for (auto y : forward) {
    if (y >= n || hit[y]) throw InvalidArgument("forward map is not a bijection");
    hit[y] = 1;
  }
  if (!space->is_uniform()) {
    const auto w = space->weights();
    for (std::size_t x = 0; x < n; ++x) {
      if (std::fabs(w[forward[x]] - w[x]) > kMassTol) {
        throw InvalidArgument("map does not preserve the atom weights");
      }
    }
  }

  auto d = std::make_shared<Data>();
  d->space = std::move(space);
  d->orbit.reserve(n);
  d->pos.assign(n, 0);
  d->cycle_id.assign(n, 0);
  std::fill(hit.begin(), hit.end(), 0);
  for (std::size_t s = 0; s < n; ++s) {
    if (hit[s]) continue;
    const std::size_t start = d->orbit.size();
    const auto id = static_cast<std::uint32_t>(d->cycles.size());
    std::size_t x = s;
    while (!hit[x]) {
      hit[x] = 1;
      d->pos[x] = static_cast<std::uint32_t>(d->orbit.size());
      d->cycle_id[x] = id;
      d->orbit.push_back(static_cast<std::uint32_t>(x));
      x = forward[x];
    }
    d->cycles.push_back({start, d->orbit.size() - start});
  }
  d->forward = std::move(forward);
  return d;
}

Automorphism Automorphism::from_permutation(SpacePtr space, std::vector<Atom> forward) {
  if (forward.size() > kMaxAtoms) throw InvalidArgument("atom count exceeds the cap");
  std::vector<std::uint32_t> f(forward.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (forward[i] >= forward.size()) throw InvalidArgument("forward map is not a bijection");
    f[i] = static_cast<std::uint32_t>(forward[i]);
  }
  return Automorphism(build(std::move(space), std::move(f)));
}

Automorphism Automorphism::identity(SpacePtr space) {
  std::vector<std::uint32_t> f(space->size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = static_cast<std::uint32_t>(i);
  return Automorphism(build(std::move(space), std::move(f)));
}

Atom Automorphism::apply_power(Atom x, std::int64_t k) const {
  const auto& c = d_->cycles[d_->cycle_id[x]];
  const auto len = static_cast<std::int64_t>(c.length);
  const auto i = static_cast<std::int64_t>(d_->pos[x] - c.start);
  return d_->orbit[c.start + static_cast<std::size_t>(floor_mod(i + floor_mod(k, len), len))];
}

Automorphism Automorphism::power(std::int64_t k) const {
  const std::size_t n = size();
  std::vector<std::uint32_t> f(n);
  for (const auto& c : d_->cycles) {
    const auto len = static_cast<std::int64_t>(c.length);
    const auto shift = static_cast<std::size_t>(floor_mod(k, len));
    for (std::size_t i = 0; i < c.length; ++i) {
      std::size_t j = i + shift;
      if (j >= c.length) j -= c.length;
      f[d_->orbit[c.start + i]] = d_->orbit[c.start + j];
    }
  }
  return Automorphism(build(d_->space, std::move(f)));
}

Automorphism Automorphism::compose(const Automorphism& after) const {
  require_same_space(space(), after.space());
  std::vector<std::uint32_t> f(size());
  for (std::size_t x = 0; x < f.size(); ++x) f[x] = d_->forward[after.d_->forward[x]];
  return Automorphism(build(d_->space, std::move(f)));
}

Obs Automorphism::koopman(const Obs& f, std::int64_t k) const {
  require_same_space(space(), f.space());
  std::vector<double> out(size());
  const auto v = f.values();
  for (const auto& c : d_->cycles) {
    const auto shift = static_cast<std::size_t>(floor_mod(k, static_cast<std::int64_t>(c.length)));
    for (std::size_t i = 0; i < c.length; ++i) {
      std::size_t j = i + shift;
      if (j >= c.length) j -= c.length;
      out[d_->orbit[c.start + i]] = v[d_->orbit[c.start + j]];
    }
  }
  return Obs::from_values(space(), std::move(out));
}

MSet Automorphism::preimage(const MSet& s, std::int64_t k) const {
  require_same_space(space(), s.space());
  std::vector<std::uint8_t> out(size());
  const auto m = s.mask();
  for (const auto& c : d_->cycles) {
    const auto shift = static_cast<std::size_t>(floor_mod(k, static_cast<std::int64_t>(c.length)));
    for (std::size_t i = 0; i < c.length; ++i) {
      std::size_t j = i + shift;
      if (j >= c.length) j -= c.length;
      out[d_->orbit[c.start + i]] = m[d_->orbit[c.start + j]];
    }
  }
  return MSet::from_mask(space(), std::move(out));
}

MSet Automorphism::image(const MSet& s, std::int64_t k) const { return preimage(s, -k); }

bool Automorphism::operator==(const Automorphism& other) const {
  return space().get() == other.space().get() && d_->forward == other.d_->forward;
}

// ---------------------------------------------------------------------------

IntVec TorusGeometry::coords(Atom x) const {
  IntVec c(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    c[i] = static_cast<std::int64_t>(x % side);
    x /= side;
  }
  return c;
}

Atom TorusGeometry::atom(const IntVec& coords) const {
  Atom x = 0;
  for (std::size_t i = dim; i-- > 0;) {
    x = x * side + static_cast<Atom>(floor_mod(coords[i], static_cast<std::int64_t>(side)));
  }
  return x;
}

IntVec TorusGeometry::translation(const IntVec& g) const {
  const auto s = static_cast<std::int64_t>(side);
  IntVec v(dim, 0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t j = 0; j < dim; ++j) v[j] += g[i] * shifts[i][j];
  }
  for (auto& c : v) {
    c = floor_mod(c, s);
    if (2 * c > s) c -= s;
  }
  return v;
}

ZdAction::ZdAction(std::vector<Automorphism> generators, std::int64_t box_radius,
                   std::optional<TorusGeometry> geometry)
    : generators_(std::move(generators)), box_radius_(box_radius), geometry_(std::move(geometry)) {
  if (generators_.empty()) throw InvalidArgument("a Z^d action needs d >= 1 generators");
  if (box_radius_ < 0) throw InvalidArgument("box radius must be non-negative");
  const auto& space = generators_.front().space();
  const std::size_t n = space->size();
  for (const auto& g : generators_) require_same_space(space, g.space());

  for (std::size_t i = 0; i < generators_.size(); ++i) {
    for (std::size_t j = i + 1; j < generators_.size(); ++j) {
      for (Atom x = 0; x < n; ++x) {
        if (generators_[i](generators_[j](x)) != generators_[j](generators_[i](x))) {
          throw InvalidArgument("generators " + std::to_string(i) + " and " + std::to_string(j) +
                                " do not commute");
        }
      }
    }
  }

  const std::size_t d = generators_.size();
  const double box = std::pow(2.0 * static_cast<double>(box_radius_) + 1.0, static_cast<double>(d));
  if (box * static_cast<double>(n) * static_cast<double>(d) > 4e9) {
    throw InvalidArgument("freeness box too large to certify exhaustively");
  }
  IntVec g(d, -box_radius_);
  while (true) {
    bool nonzero = false;
    for (auto c : g) nonzero = nonzero || c != 0;
    if (nonzero) {
      for (Atom x = 0; x < n; ++x) {
        if (apply(x, g) == x) {
          std::string gs;
          for (auto c : g) gs += (gs.empty() ? "" : ",") + std::to_string(c);
          throw InvalidArgument("action is not free on the declared box: T_(" + gs +
                                ") fixes atom " + std::to_string(x));
        }
      }
    }
    std::size_t i = 0;
    while (i < d && g[i] == box_radius_) g[i++] = -box_radius_;
    if (i == d) break;
    ++g[i];
  }
}

void ZdAction::check_bounds(const IntVec& g) const {
  if (g.size() != dimension()) throw InvalidArgument("group element has the wrong dimension");
  for (auto c : g) {
    if (c < -box_radius_ || c > box_radius_) {
      throw InvalidArgument("group element outside the configured box [-" +
                            std::to_string(box_radius_) + ", " + std::to_string(box_radius_) + "]^d");
    }
  }
}

Atom ZdAction::apply(Atom x, const IntVec& g) const {
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g[i] != 0) x = generators_[i].apply_power(x, g[i]);
  }
  return x;
}

std::vector<Atom> ZdAction::map(const IntVec& g) const {
  check_bounds(g);
  const std::size_t n = space()->size();
  std::vector<Atom> out(n);
  for (Atom x = 0; x < n; ++x) out[x] = apply(x, g);
  return out;
}

// ---------------------------------------------------------------------------

DiscreteFlow::DiscreteFlow(Automorphism step_map, double delta)
    : step_(std::move(step_map)), delta_(delta) {
  if (!(delta_ > 0.0) || !std::isfinite(delta_)) {
    throw InvalidArgument("flow step delta must be a positive real");
  }
}

std::int64_t DiscreteFlow::steps(double t) const {
  const double q = t / delta_;
  if (!std::isfinite(q) || std::fabs(q) > 9e15) throw InvalidArgument("flow time out of range");
  return static_cast<std::int64_t>(std::llround(q));
}

// ---------------------------------------------------------------------------

Automorphism cyclic_system(std::size_t n) {
  auto space = ProbSpace::uniform(n);
  std::vector<Atom> f(n);
  for (std::size_t x = 0; x < n; ++x) f[x] = (x + 1) % n;
  return Automorphism::from_permutation(std::move(space), std::move(f));
}

Automorphism odometer_system(std::size_t base, std::size_t digits) {
  if (base < 2) throw InvalidArgument("odometer base must be at least 2");
  if (digits < 1) throw InvalidArgument("odometer needs at least one digit");
  std::size_t n = 1;
  for (std::size_t i = 0; i < digits; ++i) {
    if (n > kMaxAtoms / base) throw InvalidArgument("odometer size exceeds the atom cap");
    n *= base;
  }
  auto space = ProbSpace::uniform(n);
  std::vector<Atom> f(n);
  std::vector<std::size_t> d(digits);
  for (Atom x = 0; x < n; ++x) {
    d = odometer_digits(x, base, digits);
    // add one with carry; the all-(base-1) string rolls over to zero
    for (std::size_t i = 0; i < digits; ++i) {
      if (++d[i] < base) break;
      d[i] = 0;
    }
    Atom y = 0;
    for (std::size_t i = digits; i-- > 0;) y = y * base + d[i];
    f[x] = y;
  }
  return Automorphism::from_permutation(std::move(space), std::move(f));
}

std::vector<std::size_t> odometer_digits(Atom x, std::size_t base, std::size_t digits) {
  std::vector<std::size_t> d(digits);
  for (std::size_t i = 0; i < digits; ++i) {
    d[i] = x % base;
    x /= base;
  }
  return d;
}

Obs odometer_coordinate(const SpacePtr& space, std::size_t base, std::size_t digits) {
  std::vector<double> v(space->size());
  for (Atom x = 0; x < v.size(); ++x) {
    const auto d = odometer_digits(x, base, digits);
    double c = 0;
    for (std::size_t i = digits; i-- > 0;) c = (c + static_cast<double>(d[i])) / static_cast<double>(base);
    v[x] = c;
  }
  return Obs::from_values(space, std::move(v));
}

ZdAction torus_shift_action(std::size_t d, std::size_t side, const std::vector<IntVec>& shifts,
                            std::int64_t box_radius) {
  if (d == 0) throw InvalidArgument("torus dimension must be positive");
  if (side == 0) throw InvalidArgument("torus side must be positive");
  if (shifts.size() != d) throw InvalidArgument("need exactly d shift vectors");
  std::size_t n = 1;
  for (std::size_t i = 0; i < d; ++i) {
    if (n > kMaxAtoms / side) throw InvalidArgument("torus size exceeds the atom cap");
    n *= side;
  }
  TorusGeometry geo{side, d, shifts};
  for (const auto& s : shifts) {
    if (s.size() != d) throw InvalidArgument("shift vectors must have d components");
  }
  auto space = ProbSpace::uniform(n);
  std::vector<Automorphism> gens;
  for (std::size_t i = 0; i < d; ++i) {
    std::vector<Atom> f(n);
    for (Atom x = 0; x < n; ++x) {
      auto c = geo.coords(x);
      for (std::size_t j = 0; j < d; ++j) c[j] += shifts[i][j];
      f[x] = geo.atom(c);
    }
    gens.push_back(Automorphism::from_permutation(space, std::move(f)));
  }
  return ZdAction(std::move(gens), box_radius, std::move(geo));
}

DiscreteFlow special_flow(const Automorphism& base, const Obs& roof, double delta) {
  require_same_space(base.space(), roof.space());
  if (!base.space()->is_uniform()) {
    throw InvalidArgument("suspension flows need a uniform base space");
  }
  const std::size_t nb = base.size();
  std::vector<std::size_t> offset(nb + 1, 0);
  for (Atom x = 0; x < nb; ++x) {
    const double r = roof[x];
    if (!(r >= 1.0) || r != std::floor(r)) {
      throw InvalidArgument("roof values must be positive integers");
    }
    offset[x + 1] = offset[x] + static_cast<std::size_t>(r);
    if (offset[x + 1] > kMaxAtoms) throw InvalidArgument("suspension size exceeds the atom cap");
  }
  const std::size_t n = offset[nb];
  auto space = ProbSpace::uniform(n);
  std::vector<Atom> f(n);
  for (Atom x = 0; x < nb; ++x) {
    const std::size_t h = offset[x + 1] - offset[x];
    for (std::size_t j = 0; j + 1 < h; ++j) f[offset[x] + j] = offset[x] + j + 1;
    f[offset[x] + h - 1] = offset[base(x)];
  }
  return DiscreteFlow(Automorphism::from_permutation(std::move(space), std::move(f)), delta);
}

Obs apply_group(const ZdAction& action, const IntVec& g, const Obs& f) {
  require_same_space(action.space(), f.space());
  const auto m = action.map(g);
  std::vector<double> out(m.size());
  for (Atom x = 0; x < m.size(); ++x) out[x] = f[m[x]];
  return Obs::from_values(f.space(), std::move(out));
}

}  // namespace slowconv
