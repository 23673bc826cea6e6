#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "latvib/dynamics.hpp"
#include "latvib/resonance_scan.hpp"

namespace latvib {

/// Stop condition of a vibration segment: a fixed duration, or the first
/// sample where the initial-state depletion reaches `depletion_target`
/// (capped by max_duration_ms).
struct VibrateStop {
  double duration_ms = 0.0;
  double depletion_target = 0.0;  // in (0,1]; 0 disables
  double max_duration_ms = 0.0;

  bool targeted() const { return depletion_target > 0.0; }
};

struct VibrateSegment {
  double omega = 0.0;  // E_R/hbar
  double amplitude = 0.0;
  Axis axis = Axis::Qx;
  VibrateStop stop;
};

struct RampSegment {
  enum class Shape { RaisedCosine, Linear };
  Axis axis = Axis::Qx;  // Qx, Qy, Kappa or Coupling
  double from = 0.0;     // absolute parameter values
  double to = 0.0;
  double duration_ms = 0.0;
  Shape shape = Shape::RaisedCosine;
};

struct HoldSegment {
  double duration_ms = 0.0;
};

using ProtocolSegment = std::variant<VibrateSegment, RampSegment, HoldSegment>;

/// Sequenced drive schedule starting from a static base geometry.
struct DriveProtocol {
  LatticeGeometry base;
  std::vector<Orbital> orbitals = orbital_set("sp");
  std::vector<ProtocolSegment> segments;

  void validate() const;
};

struct SegmentLog {
  int index = 0;
  std::string kind;          // "vibrate" | "ramp" | "hold"
  double t_start = 0.0;      // dimensionless
  double t_end = 0.0;
  std::string stop_reason;   // "duration" | "depletion_target" | "target_unreached"
  double achieved_depletion = 0.0;
};

/// Instantaneous-eigenstate tracking diagnostic of one segment.
struct AdiabaticityReport {
  std::vector<double> t;
  std::vector<double> overlap;  // |<v(t)|psi(t)>|^2 of the tracked eigenvector
  std::vector<int> eigen_index;
  double min_overlap = 1.0;
  bool tracking_lost = false;
  double lost_at = 0.0;
};

struct ProtocolResult {
  Trajectory trajectory;  // continuous across segments
  std::vector<SegmentLog> log;
  TwoParticleBasis basis;
  LatticeGeometry final_geometry;
  /// One report per ramp segment when requested.
  std::vector<AdiabaticityReport> adiabaticity;
};

struct ProtocolOptions {
  EvolveOptions evolve{.sample_interval = 0.25};
  bool track_adiabaticity = false;
};

/// Run the segments in order, handing the state across boundaries exactly.
/// psi0 defaults to the bare two-bosons-in-s basis state.
ProtocolResult run_protocol(const DriveProtocol& protocol,
                            const UnitSystem& units,
                            const Eigen::VectorXcd& psi0 = {},
                            const ProtocolOptions& opts = {});

/// Relative-phase analysis between two basis states (default |020> and
/// |002>) over [t_from, t_to] of a trajectory.
struct PhaseSample {
  double t = 0.0;
  double occ_a = 0.0, occ_b = 0.0;
  bool defined = false;  // false when either occupation < 1e-6
  double phase = 0.0;    // arg(c_b / c_a) in (-pi, pi]
  bool vortex = false;
  int vortex_sign = 0;  // +1: phase near +pi/2, -1: near -pi/2
};

struct EqualCrossing {
  double t = 0.0;
  double phase = 0.0;
  int sign = 0;
};

struct PhaseReport {
  int index_a = -1, index_b = -1;
  std::vector<PhaseSample> series;
  std::vector<EqualCrossing> crossings;
  std::optional<double> rabi_period;  // from crossing spacing
};

PhaseReport analyze_phase(const Trajectory& traj, const TwoParticleBasis& basis,
                          double t_from, double t_to);

/// Standalone adiabaticity check of a trajectory against a provider.
AdiabaticityReport adiabaticity_check(const HamiltonianProvider& ham,
                                      const Trajectory& traj);

/// Drive frequency that maximizes transfer out of |2s> near one predicted
/// transition: eigenvalue gap of the cycle-averaged Hamiltonian, optionally
/// polished by a three-point parabolic fit of the measured efficiency.
double resonant_frequency(const LatticeGeometry& q0, const UnitSystem& units,
                          const std::vector<Orbital>& orbitals,
                          const std::string& target, double amplitude,
                          Axis axis = Axis::Qx, bool polish = true);

struct ScenarioOptions {
  double amplitude = 4.0;
  double ramp_duration_ms = 20.0;
  double hold_duration_ms = 2.0;
  double depletion_target = 0.995;
  double half_depletion = 0.5;
  double max_vibrate_ms = 30.0;
};

/// Preset A: pump both atoms to the lower p orbital at the first resonance,
/// then adiabatically equalize the lattice depths.
DriveProtocol scenario_a(const LatticeGeometry& q0, const UnitSystem& units,
                         const ScenarioOptions& opts = {});
/// Preset B: pump at the first resonance until half depletion, switch to the
/// second resonance until the initial state is empty, equalize depths, hold.
DriveProtocol scenario_b(const LatticeGeometry& q0, const UnitSystem& units,
                         const ScenarioOptions& opts = {});

}  // namespace latvib
