#include "latvib/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace latvib {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kPhaseFloor = 1e-6;

double axis_value(const LatticeGeometry& g, Axis axis) {
  switch (axis) {
    case Axis::Qx: return g.qx;
    case Axis::Qy: return g.qy;
    case Axis::Kappa: return g.kappa;
    case Axis::Coupling: return g.g;
    default:
      throw std::invalid_argument(
          "ramp parameter must be qx, qy, kappa or g");
  }
}

double ramp_shape(RampSegment::Shape shape, double s) {
  switch (shape) {
    case RampSegment::Shape::RaisedCosine:
      return 0.5 * (1.0 - std::cos(kPi * s));
    case RampSegment::Shape::Linear:
      return s;
  }
  return s;
}
}  // namespace

void DriveProtocol::validate() const {
  base.validate();
  if (orbitals.empty()) {
    throw std::invalid_argument("DriveProtocol: empty orbital set");
  }
  LatticeGeometry current = base;
  for (const ProtocolSegment& seg : segments) {
    if (const auto* v = std::get_if<VibrateSegment>(&seg)) {
      Drive{v->axis, v->amplitude, v->omega, 0.0}.validate();
      if (v->stop.targeted()) {
        if (!(v->stop.depletion_target > 0.0 && v->stop.depletion_target <= 1.0)) {
          throw std::invalid_argument(
              "VibrateSegment: depletion target must be in (0, 1]");
        }
        if (!(v->stop.max_duration_ms > 0.0)) {
          throw std::invalid_argument(
              "VibrateSegment: depletion-targeted stop needs max_duration_ms");
        }
      } else if (!(v->stop.duration_ms > 0.0)) {
        throw std::invalid_argument("VibrateSegment: needs a stop condition");
      }
      apply_axis(current, v->axis, v->amplitude).validate();
      apply_axis(current, v->axis, -v->amplitude).validate();
    } else if (const auto* r = std::get_if<RampSegment>(&seg)) {
      if (!(r->duration_ms > 0.0)) {
        throw std::invalid_argument("RampSegment: duration must be positive");
      }
      const double cur = axis_value(current, r->axis);
      if (std::abs(cur - r->from) > 1e-9 * std::max(1.0, std::abs(cur))) {
        throw std::invalid_argument(
            "RampSegment: 'from' does not match the geometry left by the "
            "previous segments");
      }
      current = apply_axis(current, r->axis, r->to - cur);
      current.validate();
    } else if (const auto* hs = std::get_if<HoldSegment>(&seg)) {
      if (!(hs->duration_ms > 0.0)) {
        throw std::invalid_argument("HoldSegment: duration must be positive");
      }
    }
  }
}

ProtocolResult run_protocol(const DriveProtocol& protocol,
                            const UnitSystem& units,
                            const Eigen::VectorXcd& psi0,
                            const ProtocolOptions& opts) {
  protocol.validate();

  ParamEngine engine;
  ProtocolResult result;
  result.basis = TwoParticleBasis::from_pair(protocol.orbitals, Orbital::s());
  const int dim = result.basis.dim();
  const int init = result.basis.initial_index();

  Eigen::VectorXcd psi;
  if (psi0.size() == 0) {
    psi = Eigen::VectorXcd::Zero(dim);
    psi(init) = 1.0;
  } else {
    if (psi0.size() != dim) {
      throw std::invalid_argument("run_protocol: psi0 dimension mismatch");
    }
    psi = psi0;
  }

  LatticeGeometry current = protocol.base;
  double t = 0.0;
  result.trajectory.t.push_back(t);
  result.trajectory.states.push_back(psi);
  for (int i = 0; i < dim; ++i) {
    result.trajectory.labels.push_back(result.basis.state_name(i));
  }

  auto append = [&](const Trajectory& seg) {
    for (int i = 1; i < seg.samples(); ++i) {
      result.trajectory.t.push_back(seg.t[i]);
      result.trajectory.states.push_back(seg.states[i]);
    }
    result.trajectory.steps += seg.steps;
    result.trajectory.error_estimate += seg.error_estimate;
    result.trajectory.max_norm_error =
        std::max(result.trajectory.max_norm_error, seg.max_norm_error);
  };

  int index = -1;
  for (const ProtocolSegment& seg : protocol.segments) {
    ++index;
    SegmentLog log;
    log.index = index;
    log.t_start = t;

    if (const auto* v = std::get_if<VibrateSegment>(&seg)) {
      log.kind = "vibrate";
      auto table = std::make_shared<ParameterTable>(ParameterTable::build(
          engine, current, v->axis, -v->amplitude, v->amplitude, 17,
          protocol.orbitals));
      const double t_seg = t;
      const double omega = v->omega;
      TableDrivenHamiltonian ham(
          result.basis, table,
          [omega, amp = v->amplitude, t_seg](double tt) {
            return amp * std::sin(omega * (tt - t_seg));
          },
          2.0 * kPi / omega);

      const double horizon_ms =
          v->stop.targeted() ? v->stop.max_duration_ms : v->stop.duration_ms;
      const double t_end = t + units.ms_to_time(horizon_ms);
      StepCallback stop_check;
      if (v->stop.targeted()) {
        const double level = 1.0 - v->stop.depletion_target;
        stop_check = [init, level](double, const Eigen::VectorXcd& st) {
          return std::norm(st(init)) > level;  // continue while above
        };
      }
      const Trajectory segment =
          evolve(ham, psi, t, t_end, opts.evolve, stop_check);
      append(segment);
      psi = segment.states.back();
      t = segment.t.back();
      log.achieved_depletion = 1.0 - std::norm(psi(init));
      if (v->stop.targeted()) {
        log.stop_reason = log.achieved_depletion >= v->stop.depletion_target
                              ? "depletion_target"
                              : "target_unreached";
      } else {
        log.stop_reason = "duration";
      }
    } else if (const auto* r = std::get_if<RampSegment>(&seg)) {
      log.kind = "ramp";
      const double u_a = 0.0;
      const double u_b = r->to - r->from;
      auto table = std::make_shared<ParameterTable>(ParameterTable::build(
          engine, current, r->axis, std::min(u_a, u_b), std::max(u_a, u_b),
          std::max(17, 9), protocol.orbitals));
      const double duration = units.ms_to_time(r->duration_ms);
      const double t_seg = t;
      TableDrivenHamiltonian ham(
          result.basis, table,
          [u_b, t_seg, duration, shape = r->shape](double tt) {
            const double s = std::clamp((tt - t_seg) / duration, 0.0, 1.0);
            return u_b * ramp_shape(shape, s);
          },
          duration / 8.0);

      const Trajectory segment = evolve(ham, psi, t, t + duration, opts.evolve);
      if (opts.track_adiabaticity) {
        result.adiabaticity.push_back(adiabaticity_check(ham, segment));
      }
      append(segment);
      psi = segment.states.back();
      t = segment.t.back();
      current = apply_axis(current, r->axis, u_b);
      log.stop_reason = "duration";
      log.achieved_depletion = 1.0 - std::norm(psi(init));
    } else if (const auto* hs = std::get_if<HoldSegment>(&seg)) {
      log.kind = "hold";
      const HubbardParams params = engine.compute(current, protocol.orbitals);
      StaticHamiltonian ham(hamiltonian_matrix(result.basis, params));
      EvolveOptions hold_opts = opts.evolve;
      if (hold_opts.max_step <= 0.0) {
        // Static Hamiltonian: steps are exact, cap only for sampling.
        hold_opts.max_step = std::max(hold_opts.sample_interval, 0.25);
      }
      const Trajectory segment =
          evolve(ham, psi, t, t + units.ms_to_time(hs->duration_ms), hold_opts);
      append(segment);
      psi = segment.states.back();
      t = segment.t.back();
      log.stop_reason = "duration";
      log.achieved_depletion = 1.0 - std::norm(psi(init));
    }

    log.t_end = t;
    result.log.push_back(log);
  }

  result.final_geometry = current;
  return result;
}

PhaseReport analyze_phase(const Trajectory& traj, const TwoParticleBasis& basis,
                          double t_from, double t_to) {
  PhaseReport report;
  report.index_a = basis.index_of_pair(Orbital::px(), Orbital::px());
  report.index_b = basis.index_of_pair(Orbital::py(), Orbital::py());
  if (report.index_a < 0 || report.index_b < 0) {
    throw std::invalid_argument(
        "analyze_phase: basis does not contain both p-pair states");
  }

  std::vector<std::complex<double>> ratio;  // c_b * conj(c_a) per kept sample
  for (int i = 0; i < traj.samples(); ++i) {
    if (traj.t[i] < t_from || traj.t[i] > t_to) continue;
    PhaseSample s;
    s.t = traj.t[i];
    const std::complex<double> ca = traj.states[i](report.index_a);
    const std::complex<double> cb = traj.states[i](report.index_b);
    s.occ_a = std::norm(ca);
    s.occ_b = std::norm(cb);
    s.defined = s.occ_a >= kPhaseFloor && s.occ_b >= kPhaseFloor;
    const std::complex<double> r = cb * std::conj(ca);
    if (s.defined) {
      s.phase = std::arg(r);
      const double d_plus = std::abs(s.phase - 0.5 * kPi);
      const double d_minus = std::abs(s.phase + 0.5 * kPi);
      if (std::abs(s.occ_a - s.occ_b) < 0.02 && std::min(d_plus, d_minus) < 0.05) {
        s.vortex = true;
        s.vortex_sign = d_plus < d_minus ? 1 : -1;
      }
    }
    report.series.push_back(s);
    ratio.push_back(r);
  }

  // Equal-occupation crossings with circularly interpolated phase.
  for (std::size_t i = 0; i + 1 < report.series.size(); ++i) {
    const PhaseSample& a = report.series[i];
    const PhaseSample& b = report.series[i + 1];
    if (!a.defined || !b.defined) continue;
    const double da = a.occ_a - a.occ_b;
    const double db = b.occ_a - b.occ_b;
    if (da == 0.0 || da * db >= 0.0) continue;
    const double f = da / (da - db);
    EqualCrossing c;
    c.t = a.t + f * (b.t - a.t);
    const std::complex<double> r = ratio[i] + f * (ratio[i + 1] - ratio[i]);
    c.phase = std::arg(r);
    c.sign = c.phase >= 0.0 ? 1 : -1;
    report.crossings.push_back(c);
  }
  if (report.crossings.size() >= 2) {
    const double span =
        report.crossings.back().t - report.crossings.front().t;
    report.rabi_period =
        2.0 * span / static_cast<double>(report.crossings.size() - 1);
  }
  return report;
}

AdiabaticityReport adiabaticity_check(const HamiltonianProvider& ham,
                                      const Trajectory& traj) {
  if (traj.samples() < 2) {
    throw std::invalid_argument("adiabaticity_check: trajectory too short");
  }
  AdiabaticityReport report;
  const int dim = ham.dim();
  Eigen::MatrixXd h(dim, dim);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  Eigen::VectorXd tracked;

  for (int i = 0; i < traj.samples(); ++i) {
    ham.eval(traj.t[i], h);
    solver.compute(h);
    const Eigen::MatrixXd& v = solver.eigenvectors();
    int j = 0;
    if (i == 0) {
      // Start on the eigenvector holding most of the state.
      (v.transpose() * traj.states[i]).cwiseAbs2().maxCoeff(&j);
    } else {
      Eigen::Index jj = 0;
      (v.transpose() * tracked).cwiseAbs().maxCoeff(&jj);
      j = static_cast<int>(jj);
      const double continuity = std::abs(v.col(j).dot(tracked));
      if (continuity * continuity < 0.5 && !report.tracking_lost) {
        report.tracking_lost = true;
        report.lost_at = traj.t[i];
      }
    }
    tracked = v.col(j);
    const double ov = std::norm(tracked.cast<std::complex<double>>()
                                    .dot(traj.states[i]));
    report.t.push_back(traj.t[i]);
    report.overlap.push_back(ov);
    report.eigen_index.push_back(j);
    report.min_overlap = std::min(report.min_overlap, ov);
  }
  return report;
}

double resonant_frequency(const LatticeGeometry& q0, const UnitSystem& units,
                          const std::vector<Orbital>& orbitals,
                          const std::string& target, double amplitude,
                          Axis axis, bool polish) {
  ParamEngine engine;
  auto table = std::make_shared<ParameterTable>(ParameterTable::build(
      engine, q0, axis, -amplitude, amplitude, 17, orbitals));
  TwoParticleBasis basis = TwoParticleBasis::from_pair(orbitals, Orbital::s());

  // Eigenvalue gaps of the drive-cycle-averaged Hamiltonian. The averaging
  // phase is irrelevant for a sinusoidal drive, so use unit frequency.
  TableDrivenHamiltonian ham(basis, table, Drive{axis, amplitude, 1.0, 0.0});
  const Eigen::MatrixXd havg =
      cycle_averaged_hamiltonian(ham, 0.0, 2.0 * kPi);
  const auto preds = resonance_predictions(havg, basis, &units);
  const ResonancePrediction* pick = nullptr;
  for (const auto& p : preds) {
    if (p.target == target) pick = &p;
  }
  if (pick == nullptr) {
    throw std::invalid_argument("resonant_frequency: no prediction targets '" +
                                target + "'");
  }
  double center = pick->omega_recoil;
  if (!polish) return center;

  // Three-point parabolic polish of the measured 20 ms transfer efficiency.
  const double span = units.ms_to_time(20.0);
  Eigen::VectorXcd psi0 = Eigen::VectorXcd::Zero(basis.dim());
  psi0(basis.initial_index()) = 1.0;
  auto eff = [&](double w) {
    TableDrivenHamiltonian h(basis, table, Drive{axis, amplitude, w, 0.0});
    EvolveOptions opts;
    opts.sample_interval = 0.5;
    return transfer_efficiency(evolve(h, psi0, 0.0, span, opts),
                               basis.initial_index());
  };
  const double dw = 2e-3 * center / 20.0;
  const double yl = eff(center - dw), yc = eff(center), yr = eff(center + dw);
  const double denom = yl - 2.0 * yc + yr;
  if (denom < 0.0) {
    const double shift = 0.5 * dw * (yl - yr) / denom;
    if (std::abs(shift) < dw) center += shift;
  }
  return center;
}

namespace {
DriveProtocol scenario_base(const LatticeGeometry& q0) {
  DriveProtocol p;
  p.base = q0;
  p.orbitals = orbital_set("sp");
  return p;
}
}  // namespace

DriveProtocol scenario_a(const LatticeGeometry& q0, const UnitSystem& units,
                         const ScenarioOptions& opts) {
  DriveProtocol p = scenario_base(q0);
  const double omega1 =
      resonant_frequency(q0, units, p.orbitals, "pypy", opts.amplitude);
  VibrateSegment pump;
  pump.omega = omega1;
  pump.amplitude = opts.amplitude;
  pump.axis = Axis::Qx;
  pump.stop.depletion_target = opts.depletion_target;
  pump.stop.max_duration_ms = opts.max_vibrate_ms;
  p.segments.emplace_back(pump);

  RampSegment equalize;
  equalize.axis = Axis::Qx;
  equalize.from = q0.qx;
  equalize.to = q0.qy;
  equalize.duration_ms = opts.ramp_duration_ms;
  p.segments.emplace_back(equalize);
  return p;
}

DriveProtocol scenario_b(const LatticeGeometry& q0, const UnitSystem& units,
                         const ScenarioOptions& opts) {
  DriveProtocol p = scenario_base(q0);
  const double omega1 =
      resonant_frequency(q0, units, p.orbitals, "pypy", opts.amplitude);
  const double omega2 =
      resonant_frequency(q0, units, p.orbitals, "pxpx", opts.amplitude);

  VibrateSegment first;
  first.omega = omega1;
  first.amplitude = opts.amplitude;
  first.axis = Axis::Qx;
  first.stop.depletion_target = opts.half_depletion;
  first.stop.max_duration_ms = opts.max_vibrate_ms;
  p.segments.emplace_back(first);

  VibrateSegment second;
  second.omega = omega2;
  second.amplitude = opts.amplitude;
  second.axis = Axis::Qx;
  second.stop.depletion_target = opts.depletion_target;
  second.stop.max_duration_ms = opts.max_vibrate_ms;
  p.segments.emplace_back(second);

  RampSegment equalize;
  equalize.axis = Axis::Qx;
  equalize.from = q0.qx;
  equalize.to = q0.qy;
  equalize.duration_ms = opts.ramp_duration_ms;
  p.segments.emplace_back(equalize);

  HoldSegment hold;
  hold.duration_ms = opts.hold_duration_ms;
  p.segments.emplace_back(hold);
  return p;
}

}  // namespace latvib
