#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "latvib/lattice_bands.hpp"
#include "latvib/manybody.hpp"
#include "latvib/protocols.hpp"
#include "latvib/resonance_scan.hpp"

namespace latvib {

/// One row of the parameter-sweep export.
struct ParamSweepRow {
  double q;
  HubbardParams params;
};

/// 12-significant-digit float formatting used by every export.
std::string format_value(double v);

/// Write `body` to `path` atomically (temp file + rename). `header_lines`
/// are emitted first, each prefixed with "# "; a tool-version line is always
/// included.
void write_file_atomic(const std::filesystem::path& path,
                       const std::vector<std::string>& header_lines,
                       const std::string& body);

std::string dispersion_csv(const BandStructure& bands);
std::string wannier_csv(const WannierFunction& w);
/// Columns: q, E_s, E_px, E_py, U_ss, U_xx, U_yy, U_sx, U_sy, U_xy, J0, J1.
std::string params_sweep_csv(const std::vector<ParamSweepRow>& rows);
/// Columns: t_ms, one occupation column per basis state, norm_error.
std::string trajectory_csv(const Trajectory& traj, const UnitSystem& units);
/// Columns: omega_hz, omega_recoil, efficiency.
std::string scan_csv(const ScanResult& scan, const UnitSystem& units);
/// JSON list of {center_hz, height, fwhm_hz, target_state}.
std::string peaks_json(const ScanResult& scan, const UnitSystem& units);
/// Columns: t_ms, occ_..., relative_phase, phase_defined, vortex.
std::string phase_csv(const PhaseReport& report, const UnitSystem& units);
/// Columns: t_ms, occ_<orb>_site<i>..., var_n_site<i>..., energy, norm_error.
std::string manybody_csv(const ManyBodyTrajectory& traj, const FockBasis& basis,
                         const UnitSystem& units);

}  // namespace latvib
