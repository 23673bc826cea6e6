#pragma once

#include <functional>
#include <string>
#include <vector>

#include "latvib/dynamics.hpp"
#include "latvib/units.hpp"

namespace latvib {

struct Peak {
  double center = 0.0;  // E_R/hbar
  double height = 0.0;
  double fwhm = 0.0;    // E_R/hbar
  /// Half the local grid spacing around the apex after refinement.
  double center_uncertainty = 0.0;
  /// Label of the nearest resonance prediction, when a scan provides one.
  std::string target;
  /// False when a half-height crossing runs off the scanned range.
  bool resolved = true;
};

struct ScanResult {
  std::vector<double> omega;       // sorted grid, E_R/hbar
  std::vector<double> efficiency;  // one per grid point
  std::vector<Peak> peaks;
  std::string model;
  std::vector<ResonancePrediction> predictions;
  double duration_ms = 0.0;
  double amplitude = 0.0;
};

struct ScanConfig {
  /// Scan window in E_R/hbar; both 0 selects [0.7 min, 1.3 max] over the
  /// resonance predictions.
  double omega_min = 0.0;
  double omega_max = 0.0;
  int omega_points = 160;
  double duration_ms = 20.0;
  double amplitude = 4.0;
  Axis axis = Axis::Qx;
  /// Reported peaks must reach this efficiency.
  double peak_threshold = 0.5;
  /// Local maxima above this floor are refined as peak candidates.
  double candidate_floor = 0.15;
  double evolve_tolerance = 1e-9;
  int table_points = 17;
  int threads = 0;  // 0: all hardware threads
  int max_refinement_rounds = 12;
  double fwhm_rel_tol = 0.02;
};

/// Sweep the drive frequency and measure the transfer efficiency from a
/// freshly prepared two-bosons-in-s state at every grid point, then extract
/// peaks with local grid refinement.
ScanResult scan(const LatticeGeometry& q0, const UnitSystem& units,
                const std::vector<Orbital>& orbitals, const ScanConfig& cfg);

/// Peak extraction on a sampled curve. `refine_eval`, when provided, is
/// used to evaluate extra points around each candidate until the FWHM is
/// stable to `fwhm_rel_tol` between refinement rounds; the extra points are
/// merged into `omega`/`efficiency`.
std::vector<Peak> extract_peaks(std::vector<double>& omega,
                                std::vector<double>& efficiency,
                                double threshold, double candidate_floor = 0.0,
                                const std::function<double(double)>& refine_eval = {},
                                double fwhm_rel_tol = 0.02, int max_rounds = 12,
                                int threads = 1);

}  // namespace latvib
