#pragma once

#include <nlohmann/json_fwd.hpp>
#include <optional>
#include <string>
#include <vector>

#include "latvib/hubbard_params.hpp"
#include "latvib/protocols.hpp"
#include "latvib/units.hpp"

namespace latvib {

/// Validated run configuration shared by every CLI subcommand. Physical
/// quantities accept either dimensionless numbers (recoil units) or strings
/// with an explicit unit suffix ("310 kHz", "20 ms"); everything is stored
/// dimensionless.
struct RunConfig {
  std::string command;  // bands|params|scan|evolve|protocol|manybody
  std::string preset = "cr52";
  std::string model = "sp";
  LatticeGeometry geometry{32.0, 20.0, 8.0, 0.0};  // g filled from preset if 0
  std::string out_dir = ".";
  int threads = 0;

  // bands
  double bands_q = 32.0;
  int bands_count = 3;
  int bands_k_points = 64;
  int bands_plane_waves = 33;
  int wannier_band = -1;  // <0: skip the Wannier export

  // params sweep
  double sweep_q_min = 10.0;
  double sweep_q_max = 40.0;
  int sweep_points = 31;

  // drive (scan/evolve/manybody)
  Axis drive_axis = Axis::Qx;
  double drive_amplitude = 4.0;
  double drive_omega = 0.0;  // E_R/hbar; 0 lets the command pick a resonance

  // scan
  double scan_omega_min = 0.0;
  double scan_omega_max = 0.0;
  int scan_points = 160;
  double scan_threshold = -1.0;  // <0: 0.5 for sp, 0.2 for spd
  double duration_ms = 20.0;

  // evolve
  double evolve_tolerance = 1e-9;
  std::string integrator = "magnus";  // magnus|rk45

  // protocol
  std::string scenario;  // "a" | "b" | "" (explicit segments)
  std::optional<DriveProtocol> protocol;
  double ramp_duration_ms = 20.0;
  double hold_duration_ms = 2.0;

  // manybody
  int mb_sites = 4;
  int mb_particles = 8;
  bool mb_pbc = true;
  int mb_chain_axis = 0;
  double mb_duration_ms = 3.0;

  UnitSystem units() const { return UnitSystem::preset(preset); }
  /// Geometry with the preset coupling filled in when g was not given.
  LatticeGeometry resolved_geometry() const;
  /// Compact deterministic echo of every resolved field, for file headers.
  std::string provenance() const;
};

/// Parse and validate a JSON config tree. Unknown keys, wrong types and
/// out-of-range values throw std::invalid_argument with the field path.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config_file(const std::string& path);

/// Serialize back to JSON (parse -> serialize -> parse is the identity on
/// the resolved fields).
nlohmann::json config_to_json(const RunConfig& cfg);

}  // namespace latvib
