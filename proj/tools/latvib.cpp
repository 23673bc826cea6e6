// latvib: extended Bose-Hubbard parameters and driven orbital dynamics for
// 2D optical lattices. Subcommands: bands, params, scan, evolve, protocol,
// manybody. Results are written as CSV/JSON under --out.

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "latvib/config.hpp"
#include "latvib/io.hpp"
#include "latvib/manybody.hpp"
#include "latvib/protocols.hpp"
#include "latvib/resonance_scan.hpp"
#include "latvib/version.hpp"

#ifdef LATVIB_HAVE_OPENMP
#include <omp.h>
#endif

namespace {

using namespace latvib;
namespace fs = std::filesystem;

fs::path out_path(const RunConfig& cfg, const std::string& name) {
  return fs::path(cfg.out_dir) / name;
}

std::vector<std::string> provenance(const RunConfig& cfg) {
  return {cfg.provenance()};
}

void apply_threads(const RunConfig& cfg) {
#ifdef LATVIB_HAVE_OPENMP
  if (cfg.threads > 0) omp_set_num_threads(cfg.threads);
#endif
}

int run_bands(const RunConfig& cfg) {
  const BandStructure bands =
      solve_bands(cfg.bands_q, cfg.bands_count, cfg.bands_k_points,
                  cfg.bands_plane_waves);
  write_file_atomic(out_path(cfg, "dispersion.csv"), provenance(cfg),
                    dispersion_csv(bands));
  std::cout << "wrote " << out_path(cfg, "dispersion.csv").string() << "\n";
  if (cfg.wannier_band >= 0) {
    const WannierFunction w = wannier(bands, cfg.wannier_band);
    write_file_atomic(out_path(cfg, "wannier.csv"), provenance(cfg),
                      wannier_csv(w));
    std::cout << "wrote " << out_path(cfg, "wannier.csv").string() << "\n";
  }
  return 0;
}

int run_params(const RunConfig& cfg) {
  const LatticeGeometry base = cfg.resolved_geometry();
  ParamEngine engine;
  std::vector<ParamSweepRow> rows;
  for (int i = 0; i < cfg.sweep_points; ++i) {
    const double q =
        cfg.sweep_q_min +
        (cfg.sweep_q_max - cfg.sweep_q_min) *
            (cfg.sweep_points == 1 ? 0.0 : double(i) / (cfg.sweep_points - 1));
    LatticeGeometry geom = base;
    geom.qx = q;
    geom.qy = q;
    if (!geom.separable_valid()) {
      std::cerr << "warning: kappa^2 < 1.5*q at q = " << q
                << "; the separable on-site description degrades\n";
    }
    rows.push_back({q, engine.compute(geom, orbital_set("sp"))});
  }
  write_file_atomic(out_path(cfg, "params.csv"), provenance(cfg),
                    params_sweep_csv(rows));
  std::cout << "wrote " << out_path(cfg, "params.csv").string() << "\n";
  return 0;
}

int run_scan(const RunConfig& cfg) {
  const LatticeGeometry q0 = cfg.resolved_geometry();
  const UnitSystem units = cfg.units();
  if (!q0.separable_valid()) {
    std::cerr << "warning: kappa^2 < 1.5*max(qx,qy); results are outside the "
                 "validity regime\n";
  }
  ScanConfig sc;
  sc.omega_min = cfg.scan_omega_min;
  sc.omega_max = cfg.scan_omega_max;
  sc.omega_points = cfg.scan_points;
  sc.duration_ms = cfg.duration_ms;
  sc.amplitude = cfg.drive_amplitude;
  sc.axis = cfg.drive_axis;
  sc.peak_threshold = cfg.scan_threshold > 0
                          ? cfg.scan_threshold
                          : (cfg.model == "spd" ? 0.2 : 0.5);
  sc.evolve_tolerance = cfg.evolve_tolerance;
  sc.threads = cfg.threads;
  const ScanResult result = scan(q0, units, orbital_set(cfg.model), sc);

  write_file_atomic(out_path(cfg, "scan.csv"), provenance(cfg),
                    scan_csv(result, units));
  write_file_atomic(out_path(cfg, "peaks.json"), {}, peaks_json(result, units));
  std::cout << "wrote " << out_path(cfg, "scan.csv").string() << " and "
            << out_path(cfg, "peaks.json").string() << "\n";
  for (const Peak& p : result.peaks) {
    std::cout << "peak: " << units.omega_to_hz(p.center) << " Hz, height "
              << p.height << ", fwhm " << units.omega_to_hz(p.fwhm)
              << " Hz, target " << p.target << "\n";
  }
  return 0;
}

int run_evolve(const RunConfig& cfg) {
  const LatticeGeometry q0 = cfg.resolved_geometry();
  const UnitSystem units = cfg.units();
  const auto orbitals = orbital_set(cfg.model);

  double omega = cfg.drive_omega;
  if (omega <= 0.0) {
    omega = resonant_frequency(q0, units, orbitals, "pypy",
                               cfg.drive_amplitude, cfg.drive_axis);
    std::cout << "auto-selected drive frequency " << units.omega_to_hz(omega)
              << " Hz (lower p resonance)\n";
  }

  ParamEngine engine;
  auto table = std::make_shared<ParameterTable>(ParameterTable::build(
      engine, q0, cfg.drive_axis, -cfg.drive_amplitude, cfg.drive_amplitude,
      17, orbitals));
  const TwoParticleBasis basis = TwoParticleBasis::from_pair(orbitals, Orbital::s());
  TableDrivenHamiltonian ham(basis, table,
                             Drive{cfg.drive_axis, cfg.drive_amplitude, omega, 0.0});

  Eigen::VectorXcd psi0 = Eigen::VectorXcd::Zero(basis.dim());
  psi0(basis.initial_index()) = 1.0;
  EvolveOptions opts;
  opts.tolerance = cfg.evolve_tolerance;
  opts.method = cfg.integrator == "rk45" ? Integrator::DormandPrince54
                                         : Integrator::MagnusCF4;
  opts.sample_interval = 0.25;
  Trajectory traj =
      evolve(ham, psi0, 0.0, units.ms_to_time(cfg.duration_ms), opts);
  for (int i = 0; i < basis.dim(); ++i) {
    traj.labels.push_back(basis.state_name(i));
  }
  write_file_atomic(out_path(cfg, "trajectory.csv"), provenance(cfg),
                    trajectory_csv(traj, units));
  std::cout << "wrote " << out_path(cfg, "trajectory.csv").string()
            << " (transfer efficiency " << transfer_efficiency(traj, 0)
            << ", norm error " << traj.max_norm_error << ")\n";
  return 0;
}

int run_protocol_cmd(const RunConfig& cfg) {
  const LatticeGeometry q0 = cfg.resolved_geometry();
  const UnitSystem units = cfg.units();

  DriveProtocol proto;
  if (cfg.protocol.has_value()) {
    proto = *cfg.protocol;
    proto.base = q0;
    proto.orbitals = orbital_set(cfg.model);
  } else {
    ScenarioOptions opts;
    opts.ramp_duration_ms = cfg.ramp_duration_ms;
    opts.hold_duration_ms = cfg.hold_duration_ms;
    if (cfg.scenario == "b") {
      proto = scenario_b(q0, units, opts);
    } else if (cfg.scenario == "a") {
      proto = scenario_a(q0, units, opts);
    } else {
      throw std::invalid_argument(
          "protocol: give --scenario a|b or a config with protocol.segments");
    }
  }

  const ProtocolResult result = run_protocol(proto, units);
  write_file_atomic(out_path(cfg, "trajectory.csv"), provenance(cfg),
                    trajectory_csv(result.trajectory, units));
  std::cout << "wrote " << out_path(cfg, "trajectory.csv").string() << "\n";
  for (const SegmentLog& log : result.log) {
    std::cout << "segment " << log.index << " (" << log.kind << "): "
              << units.time_to_ms(log.t_start) << " -> "
              << units.time_to_ms(log.t_end) << " ms, " << log.stop_reason
              << ", depletion " << log.achieved_depletion << "\n";
  }

  if (result.basis.index_of_pair(Orbital::px(), Orbital::px()) >= 0 &&
      result.basis.index_of_pair(Orbital::py(), Orbital::py()) >= 0) {
    const double t_final_segment =
        result.log.empty() ? 0.0 : result.log.back().t_start;
    const PhaseReport report =
        analyze_phase(result.trajectory, result.basis, t_final_segment,
                      result.trajectory.t.back());
    write_file_atomic(out_path(cfg, "phase.csv"), provenance(cfg),
                      phase_csv(report, units));
    std::cout << "wrote " << out_path(cfg, "phase.csv").string();
    if (report.rabi_period.has_value()) {
      std::cout << " (Rabi period "
                << units.time_to_ms(*report.rabi_period) << " ms, "
                << report.crossings.size() << " equal-occupation crossings)";
    }
    std::cout << "\n";
  }
  return 0;
}

int run_manybody_cmd(const RunConfig& cfg) {
  const LatticeGeometry q0 = cfg.resolved_geometry();
  const UnitSystem units = cfg.units();
  const auto orbitals = orbital_set("sx");

  const FockBasis basis = FockBasis::build(cfg.mb_sites, orbitals, cfg.mb_particles);
  std::cout << "Fock basis dimension " << basis.dimension() << "\n";
  const ManyBodyModel model(basis, cfg.mb_pbc, cfg.mb_chain_axis);

  ParamEngine engine;
  const HubbardParams p0 = engine.compute(q0, orbitals);
  const GroundState gs = ground_state(model, p0);
  std::cout << "ground state energy " << gs.energy << " E_R (residual "
            << gs.residual << ")\n";

  double omega = cfg.drive_omega;
  if (omega <= 0.0) {
    omega = resonant_frequency(q0, units, orbitals, "pxpx",
                               cfg.drive_amplitude, cfg.drive_axis);
    std::cout << "auto-selected drive frequency " << units.omega_to_hz(omega)
              << " Hz (s -> p pair resonance)\n";
  }
  auto table = ParameterTable::build(engine, q0, cfg.drive_axis,
                                     -cfg.drive_amplitude, cfg.drive_amplitude,
                                     17, orbitals);
  const Drive drive{cfg.drive_axis, cfg.drive_amplitude, omega, 0.0};
  const ManyBodyTrajectory traj = evolve_manybody(
      model, table, drive, gs.vector.cast<std::complex<double>>(), 0.0,
      units.ms_to_time(cfg.mb_duration_ms));
  write_file_atomic(out_path(cfg, "manybody.csv"), provenance(cfg),
                    manybody_csv(traj, basis, units));
  std::cout << "wrote " << out_path(cfg, "manybody.csv").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"extended Bose-Hubbard parameters and driven orbital dynamics "
               "in vibrating optical lattices"};
  app.set_version_flag("--version", std::string("latvib ") + latvib::kVersion);
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string preset, model, out_dir;
  int threads = -1;
  app.add_option("--config", config_path, "JSON run configuration")
      ->check(CLI::ExistingFile);
  app.add_option("--preset", preset, "species preset: cr52 | rb87");
  app.add_option("--model", model, "orbital model: sp | spd | sx");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--threads", threads, "worker threads (0 = all cores)");

  double qx = -1, qy = -1, kappa = -1, g = -1;
  app.add_option("--qx", qx, "lattice depth along x (E_R)");
  app.add_option("--qy", qy, "lattice depth along y (E_R)");
  app.add_option("--kappa", kappa, "z-confinement ratio");
  app.add_option("--g", g, "dimensionless contact coupling");

  auto* bands = app.add_subcommand("bands", "1D Bloch bands and Wannier functions");
  double bands_q = -1;
  int wannier_band = -2;
  bands->add_option("--q", bands_q, "lattice depth (E_R)");
  bands->add_option("--wannier-band", wannier_band, "also export this band's Wannier function");

  auto* params = app.add_subcommand("params", "Hubbard parameters vs lattice depth");
  double q_min = -1, q_max = -1;
  int sweep_points = -1;
  params->add_option("--q-min", q_min, "sweep start (E_R)");
  params->add_option("--q-max", q_max, "sweep end (E_R)");
  params->add_option("--points", sweep_points, "sweep points");

  auto* scan_cmd = app.add_subcommand("scan", "transfer efficiency vs drive frequency");
  double amplitude = -1, omega_min = -1, omega_max = -1, duration = -1, threshold = -1;
  int scan_points = -1;
  scan_cmd->add_option("--amplitude", amplitude, "drive amplitude (E_R)");
  scan_cmd->add_option("--omega-min", omega_min, "window start (E_R/hbar)");
  scan_cmd->add_option("--omega-max", omega_max, "window end (E_R/hbar)");
  scan_cmd->add_option("--points", scan_points, "frequency points");
  scan_cmd->add_option("--duration-ms", duration, "observation window (ms)");
  scan_cmd->add_option("--threshold", threshold, "peak report threshold");

  auto* evolve_cmd = app.add_subcommand("evolve", "single driven trajectory");
  double ev_omega = -1, ev_amplitude = -1, ev_duration = -1;
  std::string integrator;
  evolve_cmd->add_option("--omega", ev_omega, "drive frequency (E_R/hbar; 0 = auto)");
  evolve_cmd->add_option("--amplitude", ev_amplitude, "drive amplitude (E_R)");
  evolve_cmd->add_option("--duration-ms", ev_duration, "evolution time (ms)");
  evolve_cmd->add_option("--integrator", integrator, "magnus | rk45");

  auto* protocol_cmd = app.add_subcommand("protocol", "state-preparation protocols");
  std::string scenario;
  double ramp_ms = -1, hold_ms = -1;
  protocol_cmd->add_option("--scenario", scenario, "preset scenario: a | b");
  protocol_cmd->add_option("--ramp-ms", ramp_ms, "equilibration ramp duration (ms)");
  protocol_cmd->add_option("--hold-ms", hold_ms, "final hold duration (ms)");

  auto* mb_cmd = app.add_subcommand("manybody", "exact 1D chain validation");
  int sites = -1, particles = -1;
  double mb_duration = -1, mb_omega = -1;
  int pbc_flag = -1;
  mb_cmd->add_option("--sites", sites, "chain length");
  mb_cmd->add_option("--particles", particles, "total bosons");
  mb_cmd->add_option("--pbc", pbc_flag, "periodic boundary (0|1)");
  mb_cmd->add_option("--duration-ms", mb_duration, "evolution time (ms)");
  mb_cmd->add_option("--omega", mb_omega, "drive frequency (E_R/hbar; 0 = auto)");

  CLI11_PARSE(app, argc, argv);

  try {
    latvib::RunConfig cfg;
    if (!config_path.empty()) {
      cfg = latvib::load_config_file(config_path);
    }
    cfg.command = app.get_subcommands().front()->get_name();

    // Flags win over the config file; the environment variable LATVIB_OUT
    // overrides the config but not an explicit --out.
    if (const char* env_out = std::getenv("LATVIB_OUT")) cfg.out_dir = env_out;
    if (!preset.empty()) cfg.preset = preset;
    latvib::UnitSystem::preset(cfg.preset);
    if (!model.empty()) cfg.model = model;
    latvib::orbital_set(cfg.model);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (threads >= 0) cfg.threads = threads;
    if (qx >= 0) cfg.geometry.qx = qx;
    if (qy >= 0) cfg.geometry.qy = qy;
    if (kappa >= 0) cfg.geometry.kappa = kappa;
    if (g >= 0) cfg.geometry.g = g;
    cfg.resolved_geometry().validate();

    if (bands_q >= 0) cfg.bands_q = bands_q;
    if (wannier_band >= -1) cfg.wannier_band = wannier_band;
    if (q_min >= 0) cfg.sweep_q_min = q_min;
    if (q_max >= 0) cfg.sweep_q_max = q_max;
    if (sweep_points > 0) cfg.sweep_points = sweep_points;
    if (amplitude >= 0) cfg.drive_amplitude = amplitude;
    if (ev_amplitude >= 0) cfg.drive_amplitude = ev_amplitude;
    if (omega_min >= 0) cfg.scan_omega_min = omega_min;
    if (omega_max >= 0) cfg.scan_omega_max = omega_max;
    if (scan_points > 0) cfg.scan_points = scan_points;
    if (duration >= 0) cfg.duration_ms = duration;
    if (ev_duration >= 0) cfg.duration_ms = ev_duration;
    if (threshold >= 0) cfg.scan_threshold = threshold;
    if (ev_omega >= 0) cfg.drive_omega = ev_omega;
    if (mb_omega >= 0) cfg.drive_omega = mb_omega;
    if (!integrator.empty()) cfg.integrator = integrator;
    if (!scenario.empty()) cfg.scenario = scenario;
    if (ramp_ms >= 0) cfg.ramp_duration_ms = ramp_ms;
    if (hold_ms >= 0) cfg.hold_duration_ms = hold_ms;
    if (sites > 0) cfg.mb_sites = sites;
    if (particles >= 0) cfg.mb_particles = particles;
    if (pbc_flag >= 0) cfg.mb_pbc = pbc_flag != 0;
    if (mb_duration >= 0) cfg.mb_duration_ms = mb_duration;

    apply_threads(cfg);

    if (cfg.command == "bands") return run_bands(cfg);
    if (cfg.command == "params") return run_params(cfg);
    if (cfg.command == "scan") return run_scan(cfg);
    if (cfg.command == "evolve") return run_evolve(cfg);
    if (cfg.command == "protocol") return run_protocol_cmd(cfg);
    if (cfg.command == "manybody") return run_manybody_cmd(cfg);
    std::cerr << "unknown command\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
