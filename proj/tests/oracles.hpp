#pragma once

// Independent numerical oracles for the test suite. These deliberately avoid
// the plane-wave machinery of the library: bands come from a fourth-order
// finite-difference discretization of -d^2/dx^2 + q sin^2(x) on one lattice
// period with Bloch boundary conditions, and the harmonic-limit formulas are
// closed-form Gaussian integrals.

#include <Eigen/Dense>
#include <cmath>
#include <vector>

namespace oracles {

/// Lowest `n_bands` eigenvalues at quasimomentum k (first BZ is [-1,1)),
/// from a dense finite-difference diagonalization with `grid_points` points
/// per period.
std::vector<double> fd_band_energies(double q, double k, int n_bands,
                                     int grid_points = 512);

/// Band dispersion on a uniform n_k grid over [-1,1); returns (n_k, n_bands).
Eigen::MatrixXd fd_dispersion(double q, int n_k, int n_bands,
                              int grid_points = 512);

/// Nearest-neighbor hopping from the FD dispersion:
/// J = -(1/n_k) sum_k E(k) cos(pi k).
double fd_hopping(double q, int band, int n_k = 64, int grid_points = 512);

inline double harmonic_gap(double q) { return 2.0 * std::sqrt(q); }
inline double harmonic_width(double q) { return std::pow(q, -0.25); }

/// Harmonic-oscillator limit of the on-site quartic Wannier integrals for
/// normalized oscillator eigenfunctions of width sigma = q^(-1/4).
double ho_quartic(double q, int n1, int n2, int n3, int n4);

/// Resonant two-level Rabi: under H = [[0, V], [V, delta]] the occupation of
/// level two oscillates with period pi/v on resonance and is capped by the
/// detuned ceiling otherwise.
inline double rabi_period(double v) { return M_PI / v; }
inline double detuned_rabi_ceiling(double v, double delta) {
  return v * v / (v * v + 0.25 * delta * delta);
}

inline double lorentzian(double x, double center, double fwhm, double height) {
  const double half = 0.5 * fwhm;
  return height * half * half / ((x - center) * (x - center) + half * half);
}

/// Exact binomial coefficient (stars-and-bars dimension checks).
long long binomial(int n, int k);

}  // namespace oracles
