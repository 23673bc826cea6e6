#include "oracles.hpp"

#include <complex>
#include <stdexcept>

namespace oracles {

namespace {
constexpr double kPi = 3.14159265358979323846;

Eigen::MatrixXcd fd_bloch_hamiltonian(double q, double k, int n) {
  // Fourth-order stencil for -d^2/dx^2 on x_j = j h, h = pi/n, with
  // psi(x + pi) = e^{i pi k} psi(x).
  const double h = kPi / n;
  const double c0 = 30.0 / (12.0 * h * h);
  const double c1 = -16.0 / (12.0 * h * h);
  const double c2 = 1.0 / (12.0 * h * h);
  const std::complex<double> bloch = std::polar(1.0, kPi * k);

  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    const double x = j * h;
    const double s = std::sin(x);
    m(j, j) += c0 + q * s * s;
    for (int off : {1, 2}) {
      const double c = off == 1 ? c1 : c2;
      int jp = j + off;
      std::complex<double> phase = 1.0;
      if (jp >= n) {
        jp -= n;
        phase = bloch;
      }
      m(j, jp) += c * phase;
      m(jp, j) += c * std::conj(phase);
    }
  }
  return m;
}
}  // namespace

std::vector<double> fd_band_energies(double q, double k, int n_bands,
                                     int grid_points) {
  if (n_bands > grid_points) {
    throw std::invalid_argument("fd_band_energies: too many bands");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(
      fd_bloch_hamiltonian(q, k, grid_points), Eigen::EigenvaluesOnly);
  std::vector<double> out(n_bands);
  for (int b = 0; b < n_bands; ++b) out[b] = solver.eigenvalues()(b);
  return out;
}

Eigen::MatrixXd fd_dispersion(double q, int n_k, int n_bands, int grid_points) {
  Eigen::MatrixXd disp(n_k, n_bands);
  for (int i = 0; i < n_k; ++i) {
    const double k = -1.0 + 2.0 * i / n_k;
    const auto e = fd_band_energies(q, k, n_bands, grid_points);
    for (int b = 0; b < n_bands; ++b) disp(i, b) = e[b];
  }
  return disp;
}

double fd_hopping(double q, int band, int n_k, int grid_points) {
  double acc = 0.0;
  for (int i = 0; i < n_k; ++i) {
    const double k = -1.0 + 2.0 * i / n_k;
    acc += fd_band_energies(q, k, band + 1, grid_points)[band] *
           std::cos(kPi * k);
  }
  return -acc / n_k;
}

double ho_quartic(double q, int n1, int n2, int n3, int n4) {
  const double sigma = harmonic_width(q);
  const double base = 1.0 / (sigma * std::sqrt(2.0 * kPi));
  int ones = 0;
  for (int n : {n1, n2, n3, n4}) {
    if (n == 1) {
      ++ones;
    } else if (n != 0) {
      throw std::invalid_argument("ho_quartic: only bands 0 and 1 supported");
    }
  }
  // int phi0^4 = base; int phi0^2 phi1^2 = base/2; int phi1^4 = 3 base/4.
  // Odd counts of band 1 vanish by parity.
  switch (ones) {
    case 0: return base;
    case 2: return 0.5 * base;
    case 4: return 0.75 * base;
    default: return 0.0;
  }
}

long long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  long long acc = 1;
  for (int i = 1; i <= k; ++i) {
    acc = acc * (n - k + i) / i;
  }
  return acc;
}

}  // namespace oracles
