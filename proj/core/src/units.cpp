#include "latvib/units.hpp"

#include <cmath>

namespace latvib {

namespace {
constexpr double kPi = 3.14159265358979323846;

// Atomic masses in u (AME2020) and the lattice wavelengths of the presets.
constexpr double kMassCr52 = 51.94050623;
constexpr double kMassRb87 = 86.909180531;
constexpr double kLambdaCr = 523e-9;
constexpr double kLambdaRb = 1064e-9;
// Background s-wave scattering lengths in Bohr radii: 52Cr ~ 112 a_B,
// 87Rb ~ 100.4 a_B.
constexpr double kScattCr = 112.0;
constexpr double kScattRb = 100.4;
}  // namespace

UnitSystem::UnitSystem(double mass_kg, double wavelength_m)
    : mass_(mass_kg), wavelength_(wavelength_m) {
  if (!(mass_kg > 0.0) || !(wavelength_m > 0.0)) {
    throw std::invalid_argument("UnitSystem: mass and wavelength must be positive");
  }
  recoil_ = constants::planck_h * constants::planck_h /
            (2.0 * mass_ * wavelength_ * wavelength_);
}

UnitSystem UnitSystem::preset(const std::string& name) {
  if (name == "cr52") {
    return UnitSystem(kMassCr52 * constants::atomic_mass_unit, kLambdaCr);
  }
  if (name == "rb87") {
    return UnitSystem(kMassRb87 * constants::atomic_mass_unit, kLambdaRb);
  }
  throw std::invalid_argument("unknown species preset: " + name);
}

double preset_coupling(const std::string& name) {
  if (name == "cr52") {
    return UnitSystem::preset(name).coupling_from_scattering_length(
        kScattCr * constants::bohr_radius);
  }
  if (name == "rb87") {
    return UnitSystem::preset(name).coupling_from_scattering_length(
        kScattRb * constants::bohr_radius);
  }
  throw std::invalid_argument("unknown species preset: " + name);
}

double UnitSystem::coupling_from_scattering_length(double a0_m) const {
  return 16.0 * kPi * kPi * a0_m / wavelength_;
}

double UnitSystem::to_physical(double value, Dimension dim) const {
  switch (dim) {
    case Dimension::Energy:
      return value * recoil_;
    case Dimension::Frequency:
      return value * recoil_ / constants::hbar;
    case Dimension::Time:
      return value * constants::hbar / recoil_;
  }
  throw std::invalid_argument("unknown dimension tag");
}

double UnitSystem::from_physical(double value, Dimension dim) const {
  switch (dim) {
    case Dimension::Energy:
      return value / recoil_;
    case Dimension::Frequency:
      return value * constants::hbar / recoil_;
    case Dimension::Time:
      return value * recoil_ / constants::hbar;
  }
  throw std::invalid_argument("unknown dimension tag");
}

double UnitSystem::omega_to_hz(double omega_recoil) const {
  return omega_recoil * recoil_ / constants::planck_h;
}

double UnitSystem::hz_to_omega(double f_hz) const {
  return f_hz * constants::planck_h / recoil_;
}

}  // namespace latvib
