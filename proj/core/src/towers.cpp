#include "slowconv/towers.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "slowconv/error.hpp"

namespace slowconv {

namespace {

constexpr double kIntegerSnap = 1e-9;

std::size_t ceil_atoms(double x) {
  const double r = std::round(x);
  if (std::fabs(x - r) < kIntegerSnap) return static_cast<std::size_t>(r);
  return static_cast<std::size_t>(std::ceil(x));
}

void require_single_cycle(const Automorphism& t, const char* what) {
  if (!t.is_single_cycle()) {
    throw InvalidArgument(std::string(what) + " needs a single-cycle (ergodic) map");
  }
}

std::int64_t floor_mod(std::int64_t a, std::int64_t m) {
  const std::int64_t r = a % m;
  return r < 0 ? r + m : r;
}

InvarianceCert finish_cert(MSet v, std::string window, MSet core, double threshold, double eta) {
  InvarianceCert cert{std::move(v), std::move(window), std::move(core), 0.0, threshold, eta, false};
  cert.ratio = measure(cert.core) / measure(cert.set);
  cert.pass = cert.ratio > threshold + eta;
  return cert;
}

}  // namespace

std::size_t atoms_for_measure(double mu, std::size_t n) {
  const double x = mu * static_cast<double>(n);
  const double r = std::round(x);
  if (std::fabs(x - r) < kIntegerSnap) return static_cast<std::size_t>(r);
  return static_cast<std::size_t>(std::floor(x));
}

MSet Tower::level(std::size_t i) const {
  if (i < 1 || i > height) throw InvalidArgument("tower level out of range");
  return system.image(base, static_cast<std::int64_t>(i));
}

Tower build_tower(const Automorphism& system, std::size_t height, double target_measure,
                  const TowerOptions& options) {
  require_single_cycle(system, "build_tower");
  if (height == 0) throw InvalidArgument("tower height must be positive");
  if (!(target_measure > 0.0) || target_measure > 1.0) {
    throw InvalidArgument("tower measure must lie in (0, 1]");
  }
  const std::size_t n = system.size();
  const double want = target_measure * static_cast<double>(n);
  if (want + kIntegerSnap < static_cast<double>(height)) {
    throw Infeasible("tower of height " + std::to_string(height) + " cannot have measure " +
                     std::to_string(target_measure) + " on " + std::to_string(n) + " atoms");
  }
  const std::size_t cols = ceil_atoms(want / static_cast<double>(height));
  if (cols * height > n) {
    throw Infeasible("not enough room for " + std::to_string(cols) + " columns of height " +
                     std::to_string(height));
  }
  const std::size_t stride = options.layout == TowerLayout::spread ? n / cols : height;
  const auto orbit = system.orbit_order();

  auto base_atom = [&](std::size_t offset, std::size_t j) {
    return static_cast<Atom>(orbit[(offset + j * stride) % n]);
  };
  std::size_t offset = 0;
  if (options.avoid) {
    require_same_space(system.space(), options.avoid->space());
    for (std::size_t o = 0; o < n; ++o) {
      bool clash = false;
      for (std::size_t j = 0; j < cols && !clash; ++j) clash = options.avoid->contains(base_atom(o, j));
      if (!clash) {
        offset = o;
        break;
      }
    }
  }

  MSet base(system.space());
  MSet body(system.space());
  for (std::size_t j = 0; j < cols; ++j) {
    const std::size_t p = (offset + j * stride) % n;
    base.insert(orbit[p]);
    for (std::size_t i = 1; i <= height; ++i) body.insert(orbit[(p + i) % n]);
  }
  Tower t{std::move(base), height, cols, system, std::move(body)};
  if (t.body.count() != cols * height) {
    throw Infeasible("tower columns overlap; enlarge the model");
  }
  return t;
}

bool levels_disjoint(const Tower& tower) {
  std::vector<std::uint8_t> seen(tower.system.size(), 0);
  const auto base = tower.base.atoms();
  for (Atom b : base) {
    for (std::size_t i = 1; i <= tower.height; ++i) {
      const Atom y = tower.system.apply_power(b, static_cast<std::int64_t>(i));
      if (seen[y]) return false;
      seen[y] = 1;
    }
  }
  return true;
}

InvarianceCert check_invariance(const DiscreteFlow& flow, const MSet& v, double L,
                                double threshold, double eta) {
  require_same_space(flow.space(), v.space());
  if (!(L >= 0.0)) throw InvalidArgument("window half-width L must be non-negative");
  if (v.empty()) throw InvalidArgument("invariance ratio undefined for an empty set");
  const std::int64_t r = flow.steps(L);
  const auto& t = flow.step_map();
  const auto orbit = t.orbit_order();
  const auto mask = v.mask();

  MSet core(v.space());
  std::vector<std::size_t> zeros;
  for (const auto& c : t.cycles()) {
    const auto len = static_cast<std::int64_t>(c.length);
    // prefix count of atoms outside V along the cycle
    zeros.assign(c.length + 1, 0);
    for (std::size_t i = 0; i < c.length; ++i) zeros[i + 1] = zeros[i] + (mask[orbit[c.start + i]] ? 0 : 1);
    const std::size_t total = zeros[c.length];
    auto count = [&](std::int64_t a, std::int64_t b) {  // zeros in circular [a, b]
      a = floor_mod(a, len);
      b = floor_mod(b, len);
      if (a <= b) return zeros[b + 1] - zeros[a];
      return total - (zeros[a] - zeros[b + 1]);
    };
    for (std::int64_t i = 0; i < len; ++i) {
      const bool in_core = 2 * r + 1 >= len ? total == 0 : count(i - r, i + r) == 0;
      if (in_core) core.insert(orbit[c.start + static_cast<std::size_t>(i)]);
    }
  }
  return finish_cert(v, "flow window [-" + std::to_string(L) + ", " + std::to_string(L) +
                            "], " + std::to_string(2 * r + 1) + " step powers",
                     std::move(core), threshold, eta);
}

InvarianceCert check_invariance(const ZdAction& action, const MSet& v,
                                std::span<const IntVec> window, double threshold, double eta) {
  require_same_space(action.space(), v.space());
  if (v.empty()) throw InvalidArgument("invariance ratio undefined for an empty set");
  if (window.empty()) throw InvalidArgument("window F must be non-empty");
  const std::size_t n = v.universe();
  std::vector<std::uint8_t> core(n, 1);
  for (const auto& g : window) {
    const auto m = action.map(g);
    for (Atom x = 0; x < n; ++x) core[x] &= v.contains(m[x]) ? 1 : 0;
  }
  return finish_cert(v, "finite window F of " + std::to_string(window.size()) + " elements",
                     MSet::from_mask(v.space(), std::move(core)), threshold, eta);
}

FlowBand build_flow_band(const DiscreteFlow& flow, double L, double target_measure, double eps,
                         Atom anchor, double eta) {
  const auto& t = flow.step_map();
  require_single_cycle(t, "build_flow_band");
  if (!(L >= 0.0)) throw InvalidArgument("window half-width L must be non-negative");
  if (!(target_measure > 0.0) || target_measure > 1.0) {
    throw InvalidArgument("band measure must lie in (0, 1]");
  }
  if (!(eps > 0.0 && eps < 1.0)) throw InvalidArgument("band eps must lie in (0, 1)");
  const std::size_t m = t.size();
  if (anchor >= m) throw InvalidArgument("anchor atom out of range");
  const std::int64_t r = flow.steps(L);
  const std::size_t len = std::max<std::size_t>(1, atoms_for_measure(target_measure, m));
  if (!(2.0 * static_cast<double>(r) < eps * static_cast<double>(len))) {
    throw Infeasible("arc of " + std::to_string(len) + " atoms cannot absorb a window of " +
                     std::to_string(r) + " steps per side at eps = " + std::to_string(eps));
  }
  const auto orbit = t.orbit_order();
  const std::size_t p0 = t.position(anchor);
  MSet v(flow.space());
  MSet core(flow.space());
  const auto ur = static_cast<std::size_t>(r);
  for (std::size_t i = 0; i < len; ++i) {
    const Atom x = orbit[(p0 + i) % m];
    v.insert(x);
    if (len == m || (i >= ur && i + ur < len)) core.insert(x);
  }
  auto cert = finish_cert(v, "flow window [-" + std::to_string(L) + ", " + std::to_string(L) + "]",
                          std::move(core), 1.0 - eps, eta);
  if (!cert.pass) throw Infeasible("band certificate does not clear the eta margin");
  return FlowBand{std::move(v), std::move(cert), len, r};
}

FcInvariantSet build_fc_invariant(const ZdAction& action, std::span<const IntVec> window, double c,
                                  double eps_measure, const IntVec& origin, double eta) {
  if (!action.geometry()) throw InvalidArgument("build_fc_invariant needs a torus action");
  const auto& geo = *action.geometry();
  if (!(c > 0.0 && c < 1.0)) throw InvalidArgument("invariance constant c must lie in (0, 1)");
  if (!(eps_measure > 0.0 && eps_measure < 1.0)) throw InvalidArgument("measure must lie in (0, 1)");
  if (window.empty()) throw InvalidArgument("window F must be non-empty");
  const std::size_t d = geo.dim;
  const std::size_t n = action.space()->size();
  IntVec o = origin.empty() ? IntVec(d, 0) : origin;
  if (o.size() != d) throw InvalidArgument("origin must have d coordinates");

  IntVec lo(d, 0), hi(d, 0);
  bool first = true;
  for (const auto& g : window) {
    action.check_bounds(g);
    const auto v = geo.translation(g);
    for (std::size_t i = 0; i < d; ++i) {
      lo[i] = first ? v[i] : std::min(lo[i], v[i]);
      hi[i] = first ? v[i] : std::max(hi[i], v[i]);
    }
    first = false;
  }
  std::int64_t max_width = 0;
  for (std::size_t i = 0; i < d; ++i) max_width = std::max(max_width, hi[i] - lo[i]);

  // largest cube side with s^d <= eps * N
  const double want = eps_measure * static_cast<double>(n);
  auto cube_atoms = [d](std::size_t s) {
    double v = 1;
    for (std::size_t i = 0; i < d; ++i) v *= static_cast<double>(s);
    return v;
  };
  auto s = static_cast<std::size_t>(std::floor(std::pow(want, 1.0 / static_cast<double>(d))));
  while (cube_atoms(s + 1) <= want + kIntegerSnap) ++s;
  while (s > 0 && cube_atoms(s) > want + kIntegerSnap) --s;
  s = std::min(s, geo.side);
  if (s == 0) throw Infeasible("measure too small for a single cube");

  double shrink = 1.0;
  const auto ss = static_cast<std::int64_t>(s);
  for (std::size_t i = 0; i < d; ++i) {
    shrink *= ss > hi[i] - lo[i] ? static_cast<double>(ss - (hi[i] - lo[i])) / static_cast<double>(s) : 0.0;
  }
  if (!(shrink > c + eta)) {
    throw Infeasible("cube side " + std::to_string(s) + " loses too much under F: ((s - width)/s)^d = " +
                     std::to_string(shrink) + " <= c");
  }

  const auto cubes = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(want / cube_atoms(s))));
  const auto pitch = static_cast<std::size_t>(ss + max_width + 1);
  const std::size_t slots = cubes == 1 ? 1 : geo.side / pitch;
  std::size_t capacity = 1;
  for (std::size_t i = 0; i < d; ++i) capacity = std::min<std::size_t>(capacity * slots, cubes + 1);
  if (capacity < cubes) throw Infeasible("torus too small for the required number of cubes");

  // Box iteration over [lo_i, hi_i) offsets from a cube corner.
  auto for_box = [d](const IntVec& from, const IntVec& to, auto&& visit) {
    for (std::size_t i = 0; i < d; ++i) {
      if (from[i] >= to[i]) return;
    }
    IntVec p = from;
    while (true) {
      visit(p);
      std::size_t i = 0;
      while (i < d && p[i] + 1 == to[i]) {
        p[i] = from[i];
        ++i;
      }
      if (i == d) break;
      ++p[i];
    }
  };

  MSet v(action.space());
  MSet core(action.space());
  IntVec corner(d), x(d), cube_from(d, 0), cube_to(d, ss), core_from(d), core_to(d);
  // x + v(g) lies in the cube for every g in F iff -lo_i <= x_i - corner_i < s - hi_i
  for (std::size_t i = 0; i < d; ++i) {
    core_from[i] = -lo[i];
    core_to[i] = ss - hi[i];
  }
  for (std::size_t k = 0; k < cubes; ++k) {
    std::size_t idx = k;
    for (std::size_t i = 0; i < d; ++i) {
      corner[i] = o[i] + static_cast<std::int64_t>((idx % slots) * pitch);
      idx /= slots;
    }
    auto mark = [&](MSet& target) {
      return [&](const IntVec& local) {
        for (std::size_t i = 0; i < d; ++i) x[i] = corner[i] + local[i];
        target.insert(geo.atom(x));
      };
    };
    for_box(cube_from, cube_to, mark(v));
    for_box(core_from, core_to, mark(core));
  }
  auto cert = finish_cert(v, "finite window F of " + std::to_string(window.size()) + " elements",
                          std::move(core), c, eta);
  if (!cert.pass) throw Infeasible("(F, c)-invariant set does not clear the eta margin");
  return FcInvariantSet{std::move(v), std::move(cert), s, cubes};
}

}  // namespace slowconv
