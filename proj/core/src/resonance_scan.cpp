#include "latvib/resonance_scan.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#ifdef LATVIB_HAVE_OPENMP
#include <omp.h>
#endif

namespace latvib {

namespace {

/// Linearly interpolated crossing of `level` between samples i and i+1.
double crossing(const std::vector<double>& x, const std::vector<double>& y,
                std::size_t i, double level) {
  const double f = (level - y[i]) / (y[i + 1] - y[i]);
  return x[i] + f * (x[i + 1] - x[i]);
}

struct PeakGeometry {
  double center = 0.0, height = 0.0, fwhm = 0.0, spacing = 0.0;
  bool resolved = false;
};

/// Apex (3-point parabola) and half-height crossings around local max `im`.
PeakGeometry measure_peak(const std::vector<double>& x,
                          const std::vector<double>& y, std::size_t im) {
  PeakGeometry g;
  g.center = x[im];
  g.height = y[im];
  if (im > 0 && im + 1 < x.size()) {
    const double xl = x[im - 1], xc = x[im], xr = x[im + 1];
    const double yl = y[im - 1], yc = y[im], yr = y[im + 1];
    const double d1 = (yc - yl) / (xc - xl);
    const double d2 = (yr - yc) / (xr - xc);
    const double curv = 2.0 * (d2 - d1) / (xr - xl);
    if (curv < 0.0) {
      // Vertex of the parabola through the three samples.
      const double slope_c = d1 + 0.5 * curv * (xc - xl);
      const double xv = xc - slope_c / curv;
      if (xv > xl && xv < xr) {
        g.center = xv;
        const double yv = yc - slope_c * slope_c / (2.0 * curv);
        g.height = std::max(yc, std::min(1.0, yv));
      }
    }
    g.spacing = std::min(xc - xl, xr - xc);
  } else {
    g.spacing = x.size() > 1 ? x[1] - x[0] : 0.0;
  }

  const double half = 0.5 * g.height;
  double left = x.front(), right = x.back();
  bool found_left = false, found_right = false;
  for (std::size_t i = im; i-- > 0;) {
    if (y[i] <= half) {
      left = crossing(x, y, i, half);
      found_left = true;
      break;
    }
  }
  for (std::size_t i = im; i + 1 < x.size(); ++i) {
    if (y[i + 1] <= half) {
      right = crossing(x, y, i, half);
      found_right = true;
      break;
    }
  }
  g.resolved = found_left && found_right;
  g.fwhm = right - left;
  return g;
}

std::vector<std::size_t> local_maxima(const std::vector<double>& y,
                                      double floor) {
  std::vector<std::size_t> out;
  for (std::size_t i = 1; i + 1 < y.size(); ++i) {
    if (y[i] >= floor && y[i] > y[i - 1] && y[i] >= y[i + 1]) out.push_back(i);
  }
  return out;
}

void insert_sorted(std::vector<double>& x, std::vector<double>& y,
                   const std::vector<std::pair<double, double>>& extra) {
  for (const auto& [xi, yi] : extra) {
    auto it = std::lower_bound(x.begin(), x.end(), xi);
    const auto idx = it - x.begin();
    if (it != x.end() && *it == xi) continue;
    x.insert(it, xi);
    y.insert(y.begin() + idx, yi);
  }
}

}  // namespace

std::vector<Peak> extract_peaks(std::vector<double>& omega,
                                std::vector<double>& efficiency,
                                double threshold, double candidate_floor,
                                const std::function<double(double)>& refine_eval,
                                double fwhm_rel_tol, int max_rounds,
                                int threads) {
  if (omega.size() != efficiency.size()) {
    throw std::invalid_argument("extract_peaks: size mismatch");
  }
  if (omega.size() < 3) return {};
  const double floor =
      candidate_floor > 0.0 ? std::min(candidate_floor, threshold) : threshold;

  if (refine_eval) {
    // Densify around every candidate until its FWHM is stable between
    // rounds and sampled by at least ~6 points.
    std::map<double, double> last_fwhm;
    for (int round = 0; round < max_rounds; ++round) {
      std::vector<double> wanted;
      std::map<double, double> this_fwhm;
      for (std::size_t im : local_maxima(efficiency, floor)) {
        const PeakGeometry g = measure_peak(omega, efficiency, im);
        this_fwhm[g.center] = g.fwhm;
        bool stable = false;
        for (auto& [c, f] : last_fwhm) {
          if (std::abs(c - g.center) < 3.0 * std::max(g.fwhm, g.spacing) &&
              g.fwhm > 0.0 && f > 0.0 &&
              std::abs(f - g.fwhm) <= fwhm_rel_tol * g.fwhm) {
            stable = true;
            break;
          }
        }
        const double width = g.resolved && g.fwhm > 0.0
                                 ? g.fwhm
                                 : 8.0 * std::max(g.spacing, 1e-12);
        const bool coarse = g.spacing > width / 6.0;
        if (stable && !coarse) continue;
        const double step = std::max(std::min(width / 8.0, g.spacing / 2.0),
                                     1e-9 * std::abs(g.center));
        for (int j = -12; j <= 12; ++j) {
          const double w = g.center + j * step;
          if (w > omega.front() && w < omega.back()) wanted.push_back(w);
        }
      }
      last_fwhm = std::move(this_fwhm);
      if (wanted.empty()) break;
      std::sort(wanted.begin(), wanted.end());
      wanted.erase(std::unique(wanted.begin(), wanted.end()), wanted.end());
      std::vector<std::pair<double, double>> extra(wanted.size());
#ifdef LATVIB_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, threads))
#endif
      for (std::size_t i = 0; i < wanted.size(); ++i) {
        extra[i] = {wanted[i], refine_eval(wanted[i])};
      }
      insert_sorted(omega, efficiency, extra);
    }
  }

  std::vector<Peak> peaks;
  for (std::size_t im : local_maxima(efficiency, threshold)) {
    const PeakGeometry g = measure_peak(omega, efficiency, im);
    Peak p;
    p.center = g.center;
    p.height = g.height;
    p.fwhm = g.fwhm;
    p.center_uncertainty = 0.5 * g.spacing;
    p.resolved = g.resolved;
    peaks.push_back(p);
  }
  return peaks;
}

ScanResult scan(const LatticeGeometry& q0, const UnitSystem& units,
                const std::vector<Orbital>& orbitals, const ScanConfig& cfg) {
  q0.validate();
  if (cfg.omega_points < 50) {
    throw std::invalid_argument("scan: need at least 50 frequency points");
  }
  if (!(cfg.duration_ms > 0.0)) {
    throw std::invalid_argument("scan: duration must be positive");
  }

  ParamEngine engine;
  auto table = std::make_shared<ParameterTable>(
      ParameterTable::build(engine, q0, cfg.axis, -cfg.amplitude, cfg.amplitude,
                            cfg.table_points, orbitals));
  TwoParticleBasis basis = TwoParticleBasis::from_pair(orbitals, Orbital::s());
  const HubbardParams p0 = engine.compute(q0, orbitals);
  const Eigen::MatrixXd h0 = hamiltonian_matrix(basis, p0);
  auto predictions = resonance_predictions(h0, basis, &units);

  ScanResult result;
  result.predictions = predictions;
  result.duration_ms = cfg.duration_ms;
  result.amplitude = cfg.amplitude;

  double lo = cfg.omega_min, hi = cfg.omega_max;
  if (lo == 0.0 && hi == 0.0) {
    lo = 0.7 * predictions.front().omega_recoil;
    hi = 1.3 * predictions.back().omega_recoil;
  }
  if (!(hi > lo) || !(lo > 0.0)) {
    throw std::invalid_argument("scan: invalid frequency range");
  }

  const double span = units.ms_to_time(cfg.duration_ms);
  Eigen::VectorXcd psi0 = Eigen::VectorXcd::Zero(basis.dim());
  psi0(basis.initial_index()) = 1.0;

  auto efficiency_at = [&basis, &psi0, table, span, &cfg](double omega) {
    Drive drive{cfg.axis, cfg.amplitude, omega, 0.0};
    TableDrivenHamiltonian ham(basis, table, drive);
    EvolveOptions opts;
    opts.tolerance = cfg.evolve_tolerance;
    opts.sample_interval = 0.5;
    const Trajectory traj = evolve(ham, psi0, 0.0, span, opts);
    return transfer_efficiency(traj, basis.initial_index());
  };

  // Uniform grid plus a bracket around each predicted resonance inside the
  // window, so lines much narrower than the grid spacing still raise a
  // candidate for refinement.
  std::vector<double> grid;
  for (int i = 0; i < cfg.omega_points; ++i) {
    grid.push_back(lo + (hi - lo) * i / (cfg.omega_points - 1));
  }
  const double bracket[] = {-0.15, -0.1, -0.06, -0.03, -0.015,       0.0,
                            0.015, 0.03, 0.06,  0.1,   0.15};
  for (const auto& pred : predictions) {
    for (double off : bracket) {
      const double w = pred.omega_recoil + off;
      if (w > lo && w < hi) grid.push_back(w);
    }
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  int threads = cfg.threads;
#ifdef LATVIB_HAVE_OPENMP
  if (threads <= 0) threads = omp_get_max_threads();
#else
  threads = 1;
#endif

  std::vector<double> eff(grid.size());
  std::exception_ptr error;
#ifdef LATVIB_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, threads))
#endif
  for (std::size_t i = 0; i < grid.size(); ++i) {
    try {
      eff[i] = efficiency_at(grid[i]);
    } catch (...) {
#ifdef LATVIB_HAVE_OPENMP
#pragma omp critical
#endif
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);

  result.omega = std::move(grid);
  result.efficiency = std::move(eff);
  result.peaks = extract_peaks(result.omega, result.efficiency,
                               cfg.peak_threshold, cfg.candidate_floor,
                               efficiency_at, cfg.fwhm_rel_tol,
                               cfg.max_refinement_rounds, threads);

  for (Peak& pk : result.peaks) {
    double best = std::numeric_limits<double>::max();
    for (const auto& pred : predictions) {
      const double d = std::abs(pred.omega_recoil - pk.center);
      if (d < best) {
        best = d;
        pk.target = pred.target;
      }
    }
  }
  return result;
}

}  // namespace latvib
