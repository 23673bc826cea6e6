#include "latvib/lattice_bands.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

namespace latvib {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

Eigen::MatrixXd BandStructure::hamiltonian_at(double kq) const {
  const int n = plane_waves;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    const double g = 2.0 * g_of_row(j);
    h(j, j) = (kq + g) * (kq + g) + 0.5 * depth;
    if (j + 1 < n) {
      h(j, j + 1) = -0.25 * depth;
      h(j + 1, j) = -0.25 * depth;
    }
  }
  return h;
}

BandStructure solve_bands(double q, int band_count, int k_points,
                          int plane_waves) {
  if (!std::isfinite(q)) throw std::invalid_argument("solve_bands: q must be finite");
  if (q < 0.0) throw std::invalid_argument("solve_bands: q must be >= 0");
  if (band_count < 1) throw std::invalid_argument("solve_bands: band_count must be >= 1");
  if (k_points < 2) throw std::invalid_argument("solve_bands: k_points must be >= 2");
  if (plane_waves % 2 == 0 || plane_waves < 2 * band_count + 5) {
    throw std::invalid_argument(
        "solve_bands: plane_waves must be odd and >= 2*band_count + 5");
  }

  BandStructure out;
  out.depth = q;
  out.band_count = band_count;
  out.plane_waves = plane_waves;
  out.k.resize(k_points);
  out.energies.resize(k_points, band_count);
  out.bloch.resize(k_points);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  for (int i = 0; i < k_points; ++i) {
    out.k[i] = -1.0 + 2.0 * i / k_points;
    solver.compute(out.hamiltonian_at(out.k[i]));
    if (solver.info() != Eigen::Success) {
      throw std::runtime_error("solve_bands: eigensolver failed");
    }
    out.energies.row(i) = solver.eigenvalues().head(band_count);
    out.bloch[i] = solver.eigenvectors().leftCols(band_count);
  }

  // Gauge fixing: Bloch coefficients are real; pick the sign per (k, band)
  // so that psi_k is positive at the site center for even bands, and has
  // positive slope there for odd bands. For the symmetric potential this
  // sums to the real localized Wannier function.
  for (int i = 0; i < k_points; ++i) {
    for (int b = 0; b < band_count; ++b) {
      double ref = 0.0;
      for (int j = 0; j < plane_waves; ++j) {
        const double kg = out.k[i] + 2.0 * out.g_of_row(j);
        ref += (b % 2 == 0) ? out.bloch[i](j, b) : out.bloch[i](j, b) * kg;
      }
      if (ref < 0.0) out.bloch[i].col(b) *= -1.0;
    }
  }
  return out;
}

double hopping(const BandStructure& bands, int band) {
  if (band < 0 || band >= bands.band_count) {
    throw std::invalid_argument("hopping: band index out of range");
  }
  double acc = 0.0;
  for (int i = 0; i < bands.n_k(); ++i) {
    acc += bands.energies(i, band) * std::cos(kPi * bands.k[i]);
  }
  return -acc / bands.n_k();
}

double onsite_band_energy(const BandStructure& bands, int band) {
  if (band < 0 || band >= bands.band_count) {
    throw std::invalid_argument("onsite_band_energy: band index out of range");
  }
  return bands.energies.col(band).mean();
}

double bandwidth(const BandStructure& bands, int band) {
  if (band < 0 || band >= bands.band_count) {
    throw std::invalid_argument("bandwidth: band index out of range");
  }
  return bands.energies.col(band).maxCoeff() - bands.energies.col(band).minCoeff();
}

WannierFunction wannier(const BandStructure& bands, int band, int site,
                        int points_per_site, int support_sites) {
  if (band < 0 || band >= bands.band_count) {
    throw std::invalid_argument("wannier: band index out of range");
  }
  if (points_per_site < 16 || support_sites < 1) {
    throw std::invalid_argument("wannier: grid too coarse");
  }

  const int n_k = bands.n_k();
  const int n_pw = bands.plane_waves;

  // Refuse degenerate bands: without a gap somewhere along the grid there is
  // no smooth gauge and no exponentially localized Wannier function.
  for (int i = 0; i < n_k; ++i) {
    const double scale = std::max(1.0, std::abs(bands.energies(i, band)));
    for (int other : {band - 1, band + 1}) {
      if (other < 0 || other >= bands.band_count) continue;
      // Neighbors outside band_count were solved too; energies matrix only
      // holds band_count columns, so check what is available.
      if (std::abs(bands.energies(i, other) - bands.energies(i, band)) <
          1e-9 * scale) {
        throw std::runtime_error(
            "wannier: band " + std::to_string(band) +
            " is degenerate at k = " + std::to_string(bands.k[i]));
      }
    }
  }

  for (int i = 0; i < n_k; ++i) {
    double ref = 0.0, scale = 0.0;
    for (int j = 0; j < n_pw; ++j) {
      const double kg = bands.k[i] + 2.0 * bands.g_of_row(j);
      const double c = bands.bloch[i](j, band);
      ref += (band % 2 == 0) ? c : c * kg;
      scale += (band % 2 == 0) ? std::abs(c) : std::abs(c * kg);
    }
    if (!(std::abs(ref) > 1e-8 * scale)) {
      throw std::runtime_error(
          "wannier: cannot fix a smooth Bloch gauge (degenerate band?)");
    }
  }

  WannierFunction w;
  w.band = band;
  w.site = site;
  const double center = kPi * site;
  const int n_grid = points_per_site * (2 * support_sites + 1);
  const double half = (support_sites + 0.5) * kPi;
  w.dx = 2.0 * half / n_grid;
  w.x.resize(n_grid);
  w.samples.resize(n_grid);

  // w(x) = 1/(n_k sqrt(pi)) sum_k e^{-i k center} psi_k(x); the sum is real
  // for even bands and purely imaginary for odd bands, so rotate the global
  // phase afterwards.
  std::vector<std::complex<double>> acc(n_grid, 0.0);
  const double x0 = center - half + 0.5 * w.dx;
  for (int i = 0; i < n_k; ++i) {
    const double kq = bands.k[i];
    for (int j = 0; j < n_pw; ++j) {
      const double c = bands.bloch[i](j, band);
      if (c == 0.0) continue;
      const double kg = kq + 2.0 * bands.g_of_row(j);
      const double arg0 = kg * x0 - kq * center;
      std::complex<double> z(std::cos(arg0), std::sin(arg0));
      const std::complex<double> step(std::cos(kg * w.dx), std::sin(kg * w.dx));
      for (int p = 0; p < n_grid; ++p) {
        acc[p] += c * z;
        z *= step;
      }
    }
  }

  // Global phase: align the largest sample with the real axis.
  int imax = 0;
  double amax = 0.0;
  for (int p = 0; p < n_grid; ++p) {
    if (std::abs(acc[p]) > amax) {
      amax = std::abs(acc[p]);
      imax = p;
    }
  }
  const std::complex<double> phase =
      amax > 0.0 ? acc[imax] / amax : std::complex<double>(1.0, 0.0);
  const double norm_factor = 1.0 / (n_k * std::sqrt(kPi));
  double imag_residual = 0.0;
  for (int p = 0; p < n_grid; ++p) {
    const std::complex<double> v = acc[p] / phase;
    w.x[p] = center - half + (p + 0.5) * w.dx;
    w.samples[p] = v.real() * norm_factor;
    imag_residual = std::max(imag_residual, std::abs(v.imag()));
  }
  if (imag_residual > 1e-8 * amax) {
    throw std::runtime_error("wannier: gauge produced a complex function");
  }

  // Deterministic sign: positive value (even band) or slope (odd band) at
  // the site center.
  const int ic = n_grid / 2;
  const double at_center = w.samples[ic];
  const double slope = w.samples[ic + 1] - w.samples[ic - 1];
  const double pick = (band % 2 == 0) ? at_center : slope;
  if (pick < 0.0) {
    for (auto& v : w.samples) v = -v;
  }
  return w;
}

double WannierFunction::value_at(double xq) const {
  if (x.empty() || xq < x.front() || xq > x.back()) return 0.0;
  const double t = (xq - x.front()) / dx;
  const int i = std::min(static_cast<int>(t), static_cast<int>(x.size()) - 2);
  const double f = t - i;
  return samples[i] * (1.0 - f) + samples[i + 1] * f;
}

}  // namespace latvib
