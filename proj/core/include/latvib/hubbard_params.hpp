#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "latvib/lattice_bands.hpp"

namespace latvib {

/// On-site orbital labeled by its 1D band indices (n_x, n_y), n in {0,1,2}:
/// s=(0,0), p_x=(1,0), p_y=(0,1), d_x=(2,0), d_y=(0,2), d_xy=(1,1).
class Orbital {
 public:
  constexpr Orbital() = default;
  Orbital(int nx, int ny);

  static Orbital s() { return {0, 0}; }
  static Orbital px() { return {1, 0}; }
  static Orbital py() { return {0, 1}; }
  static Orbital dx() { return {2, 0}; }
  static Orbital dy() { return {0, 2}; }
  static Orbital dxy() { return {1, 1}; }
  static Orbital from_name(const std::string& name);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int id() const { return 3 * nx_ + ny_; }  // 0..8, unique
  Orbital reflected() const { return {ny_, nx_}; }
  std::string name() const;

  friend bool operator==(Orbital a, Orbital b) { return a.id() == b.id(); }
  friend auto operator<=>(Orbital a, Orbital b) { return a.id() <=> b.id(); }

 private:
  constexpr Orbital(int nx, int ny, bool) : nx_(nx), ny_(ny) {}
  int nx_ = 0;
  int ny_ = 0;
};

/// Named orbital sets: "sp" = {s, px, py}, "spd" adds {dx, dy, dxy},
/// "sx" = {s, px} (the 1D chain set).
std::vector<Orbital> orbital_set(const std::string& model);

/// Lattice geometry Q = (q_x, q_y, kappa) plus the contact coupling g.
/// All entries dimensionless (depths in E_R).
struct LatticeGeometry {
  double qx = 0.0;
  double qy = 0.0;
  double kappa = 8.0;
  double g = 1.0;

  /// The separable single-band-per-axis description needs the z confinement
  /// to dominate: kappa^2 >= 1.5 * max(qx, qy).
  bool separable_valid() const;
  void validate() const;  // throws std::invalid_argument
};

/// Canonical key of a four-index interaction element: orbital ids sorted
/// ascending (the element is totally symmetric for real Wannier functions).
using WKey = std::array<std::uint8_t, 4>;
WKey make_wkey(Orbital a, Orbital b, Orbital c, Orbital d);
/// Parity selection: nonzero only when both the four n_x and the four n_y
/// sum to even numbers.
bool w_allowed(Orbital a, Orbital b, Orbital c, Orbital d);

/// Addressable entry of HubbardParams, used by tables and drives.
struct ParamKey {
  enum class Kind : std::uint8_t { Energy, Hopping, Interaction };
  Kind kind = Kind::Energy;
  std::uint8_t orbital = 0;    // Energy: orbital id
  std::uint8_t direction = 0;  // Hopping: 0 = x, 1 = y
  std::uint8_t band = 0;       // Hopping: band index
  WKey w{};                    // Interaction

  std::string label() const;
  friend bool operator==(const ParamKey&, const ParamKey&) = default;
};

/// Every coefficient of the extended Bose-Hubbard Hamiltonian at one
/// (Q, g): single-particle energies E_sigma, hoppings J per direction and
/// band, and the full four-index contact table W.
class HubbardParams {
 public:
  const LatticeGeometry& geometry() const { return geom_; }
  const std::vector<Orbital>& orbitals() const { return orbitals_; }

  double energy(Orbital o) const;
  /// J for direction (0 = x, 1 = y) and 1D band index.
  double hopping(int direction, int band) const;
  /// Four-index element W[a,b,c,d]; exact 0.0 when parity forbids.
  double w(Orbital a, Orbital b, Orbital c, Orbital d) const;
  /// Density-density element U_{ab} = W[a,a,b,b].
  double u(Orbital a, Orbital b) const { return w(a, a, b, b); }

  bool has(Orbital o) const;

  /// Deterministic enumeration of every entry (energies, hoppings, allowed
  /// interaction elements), aligned with values().
  const std::vector<ParamKey>& keys() const { return keys_; }
  std::vector<double> values() const;
  double value(const ParamKey& key) const;

 private:
  friend class ParamEngine;
  friend class ParameterTable;
  void set_value(const ParamKey& key, double v);
  LatticeGeometry geom_;
  std::vector<Orbital> orbitals_;
  std::map<int, double> energy_;
  std::map<int, double> hop_;  // direction*8 + band
  std::map<std::uint32_t, double> w_;
  std::vector<ParamKey> keys_;
};

/// Numerical settings of the 1D band/Wannier solver.
struct SolverSettings {
  int band_count = 3;
  int k_points = 64;
  int plane_waves = 33;
  int points_per_site = 512;
  int support_sites = 5;
};

/// 1D solution at one lattice depth: bands, Wannier functions, band-average
/// energies, hoppings, and the on-site quartic Wannier integrals.
struct OneDimSolution {
  BandStructure bands;
  std::vector<WannierFunction> wann;
  std::vector<double> eps;
  std::vector<double> hop;
  /// integral of w_{n1} w_{n2} w_{n3} w_{n4} over the home site (all four at
  /// the same site); exact 0 when n1+n2+n3+n4 is odd.
  double quartic(int n1, int n2, int n3, int n4) const;
  std::array<double, 81> quartic_table{};  // indexed by sorted (n1..n4)
};

/// Computes HubbardParams, caching the 1D solutions by lattice depth so that
/// sweeps along one axis re-solve only that axis. Not thread-safe; the
/// returned params and solutions are immutable and freely shareable.
class ParamEngine {
 public:
  explicit ParamEngine(SolverSettings settings = {});

  std::shared_ptr<const OneDimSolution> solve_1d(double q);
  HubbardParams compute(const LatticeGeometry& geom,
                        const std::vector<Orbital>& orbitals);
  const SolverSettings& settings() const { return settings_; }

 private:
  SolverSettings settings_;
  std::map<double, std::shared_ptr<const OneDimSolution>> cache_;
};

/// One-shot helpers (each builds a transient engine).
HubbardParams compute_params(const LatticeGeometry& geom,
                             const std::vector<Orbital>& orbitals);
double onsite_energy(const LatticeGeometry& geom, Orbital o);
double interaction_element(const LatticeGeometry& geom, Orbital a, Orbital b,
                           Orbital c, Orbital d);

}  // namespace latvib
