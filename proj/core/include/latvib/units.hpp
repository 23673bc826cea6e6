#pragma once

#include <stdexcept>
#include <string>

namespace latvib {

// CODATA-2018 values (SI).
namespace constants {
inline constexpr double planck_h = 6.62607015e-34;        // J s, exact since 2019 SI
inline constexpr double hbar = planck_h / 6.283185307179586476925286766559;
inline constexpr double atomic_mass_unit = 1.66053906660e-27;  // kg
inline constexpr double bohr_radius = 0.529177210903e-10;      // m
}  // namespace constants

enum class Dimension { Energy, Frequency, Time };

/// Conversion between the dimensionless working system (energies in the
/// recoil energy E_R, angular frequencies in E_R/hbar, times in hbar/E_R,
/// lengths in 1/k with k = 2*pi/lambda) and SI units for a given atomic
/// species and lattice laser wavelength.
class UnitSystem {
 public:
  UnitSystem(double mass_kg, double wavelength_m);

  /// Named presets: "cr52" (52Cr at 523 nm) and "rb87" (87Rb at 1064 nm).
  static UnitSystem preset(const std::string& name);

  double mass() const { return mass_; }
  double wavelength() const { return wavelength_; }

  /// Recoil energy (2*pi*hbar)^2 / (2 m lambda^2) in joule.
  double recoil_energy() const { return recoil_; }
  /// E_R / h in hertz.
  double recoil_frequency_hz() const { return recoil_ / constants::planck_h; }
  /// hbar / E_R in seconds: the unit of dimensionless time.
  double time_unit_s() const { return constants::hbar / recoil_; }

  /// Dimensionless contact coupling g = 16 pi^2 a0 / lambda for an s-wave
  /// scattering length given in meters.
  double coupling_from_scattering_length(double a0_m) const;

  /// value in (E_R | E_R/hbar | hbar/E_R) -> (J | rad/s | s).
  double to_physical(double value, Dimension dim) const;
  /// inverse of to_physical.
  double from_physical(double value, Dimension dim) const;

  /// Angular frequency in E_R/hbar <-> ordinary frequency in Hz.
  double omega_to_hz(double omega_recoil) const;
  double hz_to_omega(double f_hz) const;

  /// Dimensionless time <-> milliseconds.
  double time_to_ms(double t) const { return t * time_unit_s() * 1e3; }
  double ms_to_time(double t_ms) const { return t_ms * 1e-3 / time_unit_s(); }

 private:
  double mass_;
  double wavelength_;
  double recoil_;
};

/// Default coupling constants of the presets (background scattering lengths).
double preset_coupling(const std::string& name);

}  // namespace latvib
