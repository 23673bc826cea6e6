#include "latvib/hubbard_params.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace latvib {

namespace {
constexpr double kPi = 3.14159265358979323846;

std::uint32_t pack(const WKey& k) {
  return std::uint32_t(k[0]) | std::uint32_t(k[1]) << 8 |
         std::uint32_t(k[2]) << 16 | std::uint32_t(k[3]) << 24;
}

Orbital orbital_from_id(int id) { return Orbital(id / 3, id % 3); }
}  // namespace

Orbital::Orbital(int nx, int ny) : nx_(nx), ny_(ny) {
  if (nx < 0 || nx > 2 || ny < 0 || ny > 2) {
    throw std::invalid_argument("Orbital: band indices must be in {0,1,2}");
  }
}

Orbital Orbital::from_name(const std::string& name) {
  if (name == "s") return s();
  if (name == "px") return px();
  if (name == "py") return py();
  if (name == "dx") return dx();
  if (name == "dy") return dy();
  if (name == "dxy") return dxy();
  throw std::invalid_argument("Orbital: unknown name '" + name + "'");
}

std::string Orbital::name() const {
  if (*this == s()) return "s";
  if (*this == px()) return "px";
  if (*this == py()) return "py";
  if (*this == dx()) return "dx";
  if (*this == dy()) return "dy";
  if (*this == dxy()) return "dxy";
  return "(" + std::to_string(nx_) + "," + std::to_string(ny_) + ")";
}

std::vector<Orbital> orbital_set(const std::string& model) {
  if (model == "sp") return {Orbital::s(), Orbital::px(), Orbital::py()};
  if (model == "spd") {
    return {Orbital::s(),  Orbital::px(), Orbital::py(),
            Orbital::dx(), Orbital::dy(), Orbital::dxy()};
  }
  if (model == "sx") return {Orbital::s(), Orbital::px()};
  throw std::invalid_argument("orbital_set: unknown model '" + model + "'");
}

bool LatticeGeometry::separable_valid() const {
  return kappa * kappa >= 1.5 * std::max(qx, qy);
}

void LatticeGeometry::validate() const {
  if (!std::isfinite(qx) || !std::isfinite(qy) || !std::isfinite(kappa) ||
      !std::isfinite(g)) {
    throw std::invalid_argument("LatticeGeometry: non-finite entry");
  }
  if (qx < 0.0 || qy < 0.0) {
    throw std::invalid_argument("LatticeGeometry: lattice depths must be >= 0");
  }
  if (!(kappa > 0.0)) {
    throw std::invalid_argument("LatticeGeometry: kappa must be > 0");
  }
}

WKey make_wkey(Orbital a, Orbital b, Orbital c, Orbital d) {
  WKey k{std::uint8_t(a.id()), std::uint8_t(b.id()), std::uint8_t(c.id()),
         std::uint8_t(d.id())};
  std::sort(k.begin(), k.end());
  return k;
}

bool w_allowed(Orbital a, Orbital b, Orbital c, Orbital d) {
  const int sx = a.nx() + b.nx() + c.nx() + d.nx();
  const int sy = a.ny() + b.ny() + c.ny() + d.ny();
  return sx % 2 == 0 && sy % 2 == 0;
}

std::string ParamKey::label() const {
  switch (kind) {
    case Kind::Energy:
      return "E_" + orbital_from_id(orbital).name();
    case Kind::Hopping:
      return std::string("J") + (direction == 0 ? "x" : "y") +
             std::to_string(int(band));
    case Kind::Interaction: {
      std::string out = "W";
      for (auto id : w) out += "_" + orbital_from_id(id).name();
      return out;
    }
  }
  return "?";
}

double HubbardParams::energy(Orbital o) const {
  auto it = energy_.find(o.id());
  if (it == energy_.end()) {
    throw std::out_of_range("HubbardParams: no energy entry for " + o.name());
  }
  return it->second;
}

double HubbardParams::hopping(int direction, int band) const {
  auto it = hop_.find(direction * 8 + band);
  if (it == hop_.end()) {
    throw std::out_of_range("HubbardParams: no hopping entry");
  }
  return it->second;
}

double HubbardParams::w(Orbital a, Orbital b, Orbital c, Orbital d) const {
  for (Orbital o : {a, b, c, d}) {
    if (!has(o)) {
      throw std::out_of_range("HubbardParams: orbital " + o.name() +
                              " not in the computed set");
    }
  }
  if (!w_allowed(a, b, c, d)) return 0.0;
  return w_.at(pack(make_wkey(a, b, c, d)));
}

bool HubbardParams::has(Orbital o) const {
  return std::find(orbitals_.begin(), orbitals_.end(), o) != orbitals_.end();
}

std::vector<double> HubbardParams::values() const {
  std::vector<double> out;
  out.reserve(keys_.size());
  for (const auto& k : keys_) out.push_back(value(k));
  return out;
}

void HubbardParams::set_value(const ParamKey& key, double v) {
  switch (key.kind) {
    case ParamKey::Kind::Energy:
      energy_.at(key.orbital) = v;
      return;
    case ParamKey::Kind::Hopping:
      hop_.at(key.direction * 8 + key.band) = v;
      return;
    case ParamKey::Kind::Interaction:
      w_.at(pack(key.w)) = v;
      return;
  }
  throw std::logic_error("HubbardParams: bad key");
}

double HubbardParams::value(const ParamKey& key) const {
  switch (key.kind) {
    case ParamKey::Kind::Energy:
      return energy_.at(key.orbital);
    case ParamKey::Kind::Hopping:
      return hop_.at(key.direction * 8 + key.band);
    case ParamKey::Kind::Interaction:
      return w_.at(pack(key.w));
  }
  throw std::logic_error("HubbardParams: bad key");
}

double OneDimSolution::quartic(int n1, int n2, int n3, int n4) const {
  std::array<int, 4> n{n1, n2, n3, n4};
  std::sort(n.begin(), n.end());
  return quartic_table[n[0] * 27 + n[1] * 9 + n[2] * 3 + n[3]];
}

ParamEngine::ParamEngine(SolverSettings settings) : settings_(settings) {}

std::shared_ptr<const OneDimSolution> ParamEngine::solve_1d(double q) {
  auto it = cache_.find(q);
  if (it != cache_.end()) return it->second;

  auto sol = std::make_shared<OneDimSolution>();
  sol->bands = solve_bands(q, settings_.band_count, settings_.k_points,
                           settings_.plane_waves);
  const int nb = settings_.band_count;
  sol->wann.reserve(nb);
  sol->eps.reserve(nb);
  sol->hop.reserve(nb);
  for (int b = 0; b < nb; ++b) {
    sol->wann.push_back(wannier(sol->bands, b, 0, settings_.points_per_site,
                                settings_.support_sites));
    sol->eps.push_back(onsite_band_energy(sol->bands, b));
    sol->hop.push_back(hopping(sol->bands, b));
  }

  // On-site quartic integrals by the trapezoid rule; the integrands are
  // smooth and decay exponentially inside the grid, so this converges fast.
  const auto& grid0 = sol->wann[0];
  const std::size_t n = grid0.samples.size();
  for (int n1 = 0; n1 < 3; ++n1)
    for (int n2 = n1; n2 < 3; ++n2)
      for (int n3 = n2; n3 < 3; ++n3)
        for (int n4 = n3; n4 < 3; ++n4) {
          double v = 0.0;
          if ((n1 + n2 + n3 + n4) % 2 == 0 && n4 < nb) {
            const auto& w1 = sol->wann[n1].samples;
            const auto& w2 = sol->wann[n2].samples;
            const auto& w3 = sol->wann[n3].samples;
            const auto& w4 = sol->wann[n4].samples;
            for (std::size_t i = 0; i < n; ++i) v += w1[i] * w2[i] * w3[i] * w4[i];
            v *= grid0.dx;
          }
          sol->quartic_table[n1 * 27 + n2 * 9 + n3 * 3 + n4] = v;
        }

  cache_.emplace(q, sol);
  return cache_.at(q);
}

HubbardParams ParamEngine::compute(const LatticeGeometry& geom,
                                   const std::vector<Orbital>& orbitals) {
  geom.validate();
  if (orbitals.empty()) {
    throw std::invalid_argument("compute_params: empty orbital set");
  }
  if (geom.qx == geom.qy) {
    for (Orbital o : orbitals) {
      if (std::find(orbitals.begin(), orbitals.end(), o.reflected()) ==
          orbitals.end()) {
        throw std::invalid_argument(
            "compute_params: orbital set must be closed under x<->y "
            "reflection for a symmetric lattice");
      }
    }
  }

  // For a symmetric lattice both axes share one 1D solution object, which
  // makes the x<->y symmetry of every parameter exact by construction.
  auto solx = solve_1d(geom.qx);
  auto soly = geom.qy == geom.qx ? solx : solve_1d(geom.qy);

  HubbardParams p;
  p.geom_ = geom;
  p.orbitals_ = orbitals;
  std::sort(p.orbitals_.begin(), p.orbitals_.end());

  const double zfactor = std::sqrt(geom.kappa / (2.0 * kPi));

  for (Orbital o : p.orbitals_) {
    p.energy_[o.id()] = solx->eps[o.nx()] + soly->eps[o.ny()] + geom.kappa;
    ParamKey k;
    k.kind = ParamKey::Kind::Energy;
    k.orbital = std::uint8_t(o.id());
    p.keys_.push_back(k);
  }

  int max_band = 0;
  for (Orbital o : p.orbitals_) {
    max_band = std::max({max_band, o.nx(), o.ny()});
  }
  for (int dir = 0; dir < 2; ++dir) {
    const auto& sol = dir == 0 ? solx : soly;
    for (int b = 0; b <= max_band; ++b) {
      p.hop_[dir * 8 + b] = sol->hop[b];
      ParamKey k;
      k.kind = ParamKey::Kind::Hopping;
      k.direction = std::uint8_t(dir);
      k.band = std::uint8_t(b);
      p.keys_.push_back(k);
    }
  }

  // All distinct canonical quadruples over the set, parity-allowed only.
  const int ns = static_cast<int>(p.orbitals_.size());
  for (int i = 0; i < ns; ++i)
    for (int j = i; j < ns; ++j)
      for (int l = j; l < ns; ++l)
        for (int m = l; m < ns; ++m) {
          Orbital a = p.orbitals_[i], b = p.orbitals_[j], c = p.orbitals_[l],
                  d = p.orbitals_[m];
          if (!w_allowed(a, b, c, d)) continue;
          const double ix = solx->quartic(a.nx(), b.nx(), c.nx(), d.nx());
          const double iy = soly->quartic(a.ny(), b.ny(), c.ny(), d.ny());
          const WKey key = make_wkey(a, b, c, d);
          p.w_[pack(key)] = geom.g * zfactor * (ix * iy);
          ParamKey k;
          k.kind = ParamKey::Kind::Interaction;
          k.w = key;
          p.keys_.push_back(k);
        }

  return p;
}

HubbardParams compute_params(const LatticeGeometry& geom,
                             const std::vector<Orbital>& orbitals) {
  ParamEngine engine;
  return engine.compute(geom, orbitals);
}

double onsite_energy(const LatticeGeometry& geom, Orbital o) {
  geom.validate();
  ParamEngine engine;
  auto solx = engine.solve_1d(geom.qx);
  auto soly = geom.qy == geom.qx ? solx : engine.solve_1d(geom.qy);
  return solx->eps[o.nx()] + soly->eps[o.ny()] + geom.kappa;
}

double interaction_element(const LatticeGeometry& geom, Orbital a, Orbital b,
                           Orbital c, Orbital d) {
  geom.validate();
  if (!w_allowed(a, b, c, d)) return 0.0;
  ParamEngine engine;
  auto solx = engine.solve_1d(geom.qx);
  auto soly = geom.qy == geom.qx ? solx : engine.solve_1d(geom.qy);
  const double ix = solx->quartic(a.nx(), b.nx(), c.nx(), d.nx());
  const double iy = soly->quartic(a.ny(), b.ny(), c.ny(), d.ny());
  return geom.g * std::sqrt(geom.kappa / (2.0 * kPi)) * (ix * iy);
}

}  // namespace latvib
