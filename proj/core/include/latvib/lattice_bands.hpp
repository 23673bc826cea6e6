#pragma once

#include <Eigen/Dense>
#include <vector>

namespace latvib {

/// Bloch bands of the 1D lattice Hamiltonian -d^2/dx^2 + q sin^2(x).
/// Lengths are in units of 1/k (site spacing pi), energies in E_R, and the
/// first Brillouin zone is k in [-1, 1).
struct BandStructure {
  double depth = 0.0;  // q in E_R
  int band_count = 0;
  int plane_waves = 0;  // odd basis size, reciprocal vectors G = 2m
  std::vector<double> k;                  // quasimomentum grid, size n_k
  Eigen::MatrixXd energies;               // (n_k, band_count)
  std::vector<Eigen::MatrixXd> bloch;     // per k: (plane_waves, band_count),
                                          // real coefficients, gauge-fixed

  int n_k() const { return static_cast<int>(k.size()); }
  /// Reciprocal index m of basis row j (m runs -M..M, G = 2m).
  int g_of_row(int j) const { return j - (plane_waves - 1) / 2; }
  /// Plane-wave Hamiltonian at quasimomentum kq (tridiagonal, symmetric).
  Eigen::MatrixXd hamiltonian_at(double kq) const;
};

/// Real-valued localized Wannier function of one band at one site.
struct WannierFunction {
  int band = 0;
  int site = 0;
  double dx = 0.0;
  std::vector<double> x;        // uniform grid centered on the home site
  std::vector<double> samples;  // w(x), normalized so that int w^2 dx = 1

  double value_at(double xq) const;  // linear interpolation, 0 outside grid
};

/// Diagonalize the plane-wave Hamiltonian on a uniform k grid.
/// plane_waves must be odd and at least 2*band_count + 5.
BandStructure solve_bands(double q, int band_count = 3, int k_points = 64,
                          int plane_waves = 33);

/// Construct the Wannier function of `band` localized at `site` using the
/// real-gauge phase convention (even bands positive at the site center, odd
/// bands with positive slope there). Throws if the gauge cannot be fixed
/// smoothly (band degeneracy along the grid).
WannierFunction wannier(const BandStructure& bands, int band, int site = 0,
                        int points_per_site = 512, int support_sites = 5);

/// Nearest-neighbor hopping amplitude of `band`:
/// J = -(1/n_k) sum_k E(k) cos(pi k). Positive for band 0, and enters the
/// lattice Hamiltonian as -J (c_i^dag c_j + h.c.).
double hopping(const BandStructure& bands, int band);

/// On-site (band-averaged) single-particle energy of `band`:
/// the diagonal Wannier matrix element of the 1D Hamiltonian.
double onsite_band_energy(const BandStructure& bands, int band);

/// Bandwidth max_k E - min_k E of `band`.
double bandwidth(const BandStructure& bands, int band);

}  // namespace latvib
