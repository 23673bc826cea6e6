#include "latvib/dynamics.hpp"

#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <stdexcept>

namespace latvib {

namespace {
constexpr double kSqrt3Over6 = 0.28867513459481288225;  // sqrt(3)/6

/// psi <- exp(-i h S) psi for real symmetric S, via eigendecomposition.
/// Fixed-size fast paths for the 2- and 3-state models.
struct ExpWorkspace {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver3;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> solver2;
  Eigen::VectorXcd y;

  void apply(const Eigen::MatrixXd& s, double h, Eigen::VectorXcd& psi) {
    const Eigen::Index n = s.rows();
    if (n == 3) {
      solver3.compute(s);
      rotate(solver3.eigenvectors(), solver3.eigenvalues(), h, psi);
    } else if (n == 2) {
      solver2.compute(s);
      rotate(solver2.eigenvectors(), solver2.eigenvalues(), h, psi);
    } else {
      solver.compute(s);
      rotate(solver.eigenvectors(), solver.eigenvalues(), h, psi);
    }
  }

  template <typename MatV, typename VecL>
  void rotate(const MatV& v, const VecL& lam, double h, Eigen::VectorXcd& psi) {
    y.noalias() = v.transpose() * psi;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      y(i) *= std::polar(1.0, -h * lam(i));
    }
    psi.noalias() = v * y;
  }
};
}  // namespace

void Drive::validate() const {
  if (!(amplitude >= 0.0)) throw std::invalid_argument("Drive: amplitude must be >= 0");
  if (!(omega > 0.0)) throw std::invalid_argument("Drive: omega must be > 0");
}

TableDrivenHamiltonian::TableDrivenHamiltonian(
    TwoParticleBasis basis, std::shared_ptr<const ParameterTable> table,
    std::function<double(double)> u_of_t, double timescale)
    : basis_(std::move(basis)),
      table_(std::move(table)),
      u_(std::move(u_of_t)),
      timescale_(timescale) {
  compile();
}

TableDrivenHamiltonian::TableDrivenHamiltonian(
    TwoParticleBasis basis, std::shared_ptr<const ParameterTable> table,
    const Drive& drive)
    : basis_(std::move(basis)), table_(std::move(table)) {
  drive.validate();
  if (drive.axis != table_->axis()) {
    throw std::invalid_argument(
        "TableDrivenHamiltonian: drive axis does not match the table axis");
  }
  if (drive.amplitude > std::max(std::abs(table_->u_min()), table_->u_max()) &&
      !table_->degenerate()) {
    throw std::invalid_argument(
        "TableDrivenHamiltonian: drive excursion exceeds the table range");
  }
  u_ = [d = drive](double t) { return d.u(t); };
  timescale_ = 2.0 * 3.14159265358979323846 / drive.omega;
  compile();
}

void TableDrivenHamiltonian::compile() {
  // H(u) = sum_e value_e(u) * C_e with constant coefficient matrices C_e:
  // occupation diagonals for energies, bosonic quartic elements for the
  // interaction entries. Hopping entries do not act on a single site.
  const auto& keys = table_->keys();
  const auto& set = basis_.orbitals();
  if (set != table_->orbitals()) {
    throw std::invalid_argument(
        "TableDrivenHamiltonian: basis and table orbital sets differ");
  }
  const int dim = basis_.dim();
  const auto terms = onsite_interaction_terms(set);

  for (std::size_t e = 0; e < keys.size(); ++e) {
    const ParamKey& key = keys[e];
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(dim, dim);
    if (key.kind == ParamKey::Kind::Energy) {
      for (int i = 0; i < dim; ++i) {
        const Occupation& occ = basis_.states()[i];
        for (std::size_t o = 0; o < set.size(); ++o) {
          if (set[o].id() == key.orbital) c(i, i) += occ[o];
        }
      }
    } else if (key.kind == ParamKey::Kind::Interaction) {
      Occupation scratch;
      for (int col = 0; col < dim; ++col) {
        for (const OnsiteTerm& term : terms) {
          if (!(term.key == key)) continue;
          scratch = basis_.states()[col];
          const double amp = apply_quartic(scratch, term.a, term.b, term.c, term.d);
          if (amp == 0.0) continue;
          const int row = basis_.index_of(scratch);
          if (row < 0) continue;
          c(row, col) += term.weight * amp;
        }
      }
    }
    if (c.cwiseAbs().maxCoeff() > 0.0) {
      components_.emplace_back(static_cast<int>(e), std::move(c));
    }
  }

  // Piecewise cubic Hermite fit of H(u) on the table grid: per interval the
  // four coefficient matrices of h(s) = C0 + C1 s + C2 s^2 + C3 s^3 with
  // s = u - u_i. Matches the entry splines and their derivatives at the
  // knots, so the fit error is far below the spline's own interpolation
  // error; evaluation is a single interval lookup.
  const int n_entries = static_cast<int>(table_->entry_count());
  std::vector<double> v0(n_entries), v1(n_entries), d0(n_entries), d1(n_entries);
  if (!table_->degenerate()) {
    const int n_int = table_->points() - 1;
    u0_ = table_->u_min();
    du_ = table_->grid_step();
    intervals_.resize(n_int);
    for (int i = 0; i < n_int; ++i) {
      const double ua = u0_ + i * du_;
      const double ub = std::min(ua + du_, table_->u_max());
      table_->eval_values(ua, v0);
      table_->eval_values(ub, v1);
      table_->eval_derivatives(ua, d0);
      table_->eval_derivatives(ub, d1);
      for (auto& m : intervals_[i]) m = Eigen::MatrixXd::Zero(dim, dim);
      const double h = ub - ua;
      for (const auto& [e, c] : components_) {
        const double a = v0[e];
        const double b = d0[e];
        const double cc = (3.0 * (v1[e] - v0[e]) / h - 2.0 * d0[e] - d1[e]) / h;
        const double dd = (2.0 * (v0[e] - v1[e]) / h + d0[e] + d1[e]) / (h * h);
        intervals_[i][0] += a * c;
        intervals_[i][1] += b * c;
        intervals_[i][2] += cc * c;
        intervals_[i][3] += dd * c;
      }
    }
  } else {
    u0_ = table_->u_min();
    du_ = 0.0;
    intervals_.resize(1);
    table_->eval_values(u0_, v0);
    for (auto& m : intervals_[0]) m = Eigen::MatrixXd::Zero(dim, dim);
    for (const auto& [e, c] : components_) intervals_[0][0] += v0[e] * c;
  }
}

void TableDrivenHamiltonian::eval(double t, Eigen::MatrixXd& h) const {
  double u = u_(t);
  if (du_ == 0.0) {
    h = intervals_[0][0];
    return;
  }
  if (!(u >= table_->u_min() && u <= table_->u_max())) {
    throw std::out_of_range("TableDrivenHamiltonian: drive excursion " +
                            std::to_string(u) + " left the table range");
  }
  int i = static_cast<int>((u - u0_) / du_);
  i = std::clamp(i, 0, static_cast<int>(intervals_.size()) - 1);
  const double s = u - (u0_ + i * du_);
  const auto& c = intervals_[i];
  h = c[0] + s * (c[1] + s * (c[2] + s * c[3]));
}

Eigen::VectorXd Trajectory::occupations_at(int sample) const {
  return states.at(sample).cwiseAbs2();
}

namespace {

struct StepperState {
  double t;
  double h;
  Eigen::VectorXcd psi;
};

/// One CF4 substep over [t, t+h].
void cf4_substep(const HamiltonianProvider& ham, double t, double h,
                 Eigen::VectorXcd& psi, double offset, Eigen::MatrixXd& h1,
                 Eigen::MatrixXd& h2, Eigen::MatrixXd& s, ExpWorkspace& ws) {
  const double c1 = 0.5 - kSqrt3Over6;
  const double c2 = 0.5 + kSqrt3Over6;
  const double a1 = 0.25 - kSqrt3Over6;
  const double a2 = 0.25 + kSqrt3Over6;
  ham.eval(t + c1 * h, h1);
  ham.eval(t + c2 * h, h2);
  if (offset != 0.0) {
    h1.diagonal().array() -= offset;
    h2.diagonal().array() -= offset;
  }
  s = a2 * h1 + a1 * h2;
  ws.apply(s, h, psi);
  s = a1 * h1 + a2 * h2;
  ws.apply(s, h, psi);
}

Trajectory evolve_magnus(const HamiltonianProvider& ham,
                         const Eigen::VectorXcd& psi0, double t0, double t1,
                         const EvolveOptions& opts, const StepCallback& on_step,
                         double offset) {
  const double span = t1 - t0;
  const double dir = span >= 0.0 ? 1.0 : -1.0;
  const double tiny = 1e-14 * std::max(1.0, std::abs(span));

  double max_step = opts.max_step;
  if (max_step <= 0.0) {
    const double ts = ham.timescale();
    max_step = ts > 0.0 ? ts / 4.0 : std::abs(span) / 16.0;
  }
  double h = opts.initial_step > 0.0 ? opts.initial_step : max_step / 4.0;

  Trajectory traj;
  traj.t.push_back(t0);
  traj.states.push_back(psi0);

  Eigen::VectorXcd psi = psi0;
  Eigen::MatrixXd h1, h2, s;
  ExpWorkspace ws;
  Eigen::VectorXcd full, half;

  double t = t0;
  double next_sample = opts.sample_interval > 0.0
                           ? t0 + dir * opts.sample_interval
                           : t0;
  const int check_every = std::max(1, opts.error_check_interval);
  // Checked steps must clear tolerance/2 so the steps reusing h in between
  // stay within the budget for smoothly varying drives.
  const double tol = check_every > 1 ? 0.5 * opts.tolerance : opts.tolerance;
  long since_check = 0;
  double last_err = 0.0;
  bool stopped = false;
  while (dir * (t1 - t) > tiny && !stopped) {
    h = std::min(h, max_step);
    h = std::min(h, std::abs(t1 - t));
    if (h < tiny) break;

    const double hs = dir * h;
    const bool check = since_check == 0 || h >= std::abs(t1 - t) - tiny;
    double err = last_err;
    if (check) {
      full = psi;
      cf4_substep(ham, t, hs, full, offset, h1, h2, s, ws);
      half = psi;
      cf4_substep(ham, t, 0.5 * hs, half, offset, h1, h2, s, ws);
      cf4_substep(ham, t + 0.5 * hs, 0.5 * hs, half, offset, h1, h2, s, ws);
      err = (full - half).norm();
    } else {
      half = psi;
      cf4_substep(ham, t, hs, half, offset, h1, h2, s, ws);
    }

    if (!check || err <= tol || h <= 16.0 * tiny) {
      t += hs;
      psi = half;
      traj.steps += 1;
      traj.error_estimate += check ? err : last_err;
      traj.max_norm_error =
          std::max(traj.max_norm_error, std::abs(psi.norm() - 1.0));
      if (check) {
        last_err = err;
        since_check = check_every - 1;
        const double grow = err > 0.0 ? 0.9 * std::pow(tol / err, 0.2) : 4.0;
        h *= std::clamp(grow, 0.2, 4.0);
      } else {
        since_check -= 1;
      }

      const bool record = opts.sample_interval <= 0.0 ||
                          dir * (t - next_sample) >= 0.0 ||
                          dir * (t1 - t) <= tiny;
      if (record) {
        traj.t.push_back(t);
        traj.states.push_back(psi);
        if (opts.sample_interval > 0.0) {
          while (dir * (t - next_sample) >= 0.0) {
            next_sample += dir * opts.sample_interval;
          }
        }
      }
      if (on_step && !on_step(t, psi)) stopped = true;
    } else {
      since_check = 0;
      h *= std::max(0.1, 0.9 * std::pow(tol / err, 0.2));
      if (h < tiny) {
        throw std::runtime_error("evolve: step size underflow at t = " +
                                 std::to_string(t));
      }
    }
  }
  if (traj.t.back() != t) {
    traj.t.push_back(t);
    traj.states.push_back(psi);
  }
  return traj;
}

Trajectory evolve_rk(const HamiltonianProvider& ham, const Eigen::VectorXcd& psi0,
                     double t0, double t1, const EvolveOptions& opts,
                     const StepCallback& on_step, double offset) {
  namespace ode = boost::numeric::odeint;
  using state_type = std::vector<double>;

  const int n = ham.dim();
  const double span = t1 - t0;
  const double dir = span >= 0.0 ? 1.0 : -1.0;
  const double tiny = 1e-14 * std::max(1.0, std::abs(span));

  double max_step = opts.max_step;
  if (max_step <= 0.0) {
    const double ts = ham.timescale();
    max_step = ts > 0.0 ? ts / 4.0 : std::abs(span) / 16.0;
  }

  // Real-imaginary split: x = [Re psi; Im psi],
  // Re' = (H - offset) Im, Im' = -(H - offset) Re.
  Eigen::MatrixXd hmat(n, n);
  auto system = [&](const state_type& x, state_type& dxdt, double t) {
    ham.eval(t, hmat);
    if (offset != 0.0) hmat.diagonal().array() -= offset;
    Eigen::Map<const Eigen::VectorXd> re(x.data(), n), im(x.data() + n, n);
    Eigen::Map<Eigen::VectorXd> dre(dxdt.data(), n), dim(dxdt.data() + n, n);
    dre.noalias() = hmat * im;
    dim.noalias() = -hmat * re;
  };

  state_type x(2 * n);
  for (int i = 0; i < n; ++i) {
    x[i] = psi0(i).real();
    x[n + i] = psi0(i).imag();
  }

  auto stepper = ode::make_controlled(
      opts.tolerance, opts.tolerance,
      ode::runge_kutta_dopri5<state_type>());

  Trajectory traj;
  traj.t.push_back(t0);
  traj.states.push_back(psi0);

  auto unpack = [&](const state_type& v) {
    Eigen::VectorXcd psi(n);
    for (int i = 0; i < n; ++i) psi(i) = {v[i], v[n + i]};
    return psi;
  };

  double t = t0;
  double h = dir * (opts.initial_step > 0.0 ? opts.initial_step : max_step / 4.0);
  double next_sample = opts.sample_interval > 0.0
                           ? t0 + dir * opts.sample_interval
                           : t0;
  bool stopped = false;
  while (dir * (t1 - t) > tiny && !stopped) {
    if (std::abs(h) > max_step) h = dir * max_step;
    if (std::abs(h) > std::abs(t1 - t)) h = t1 - t;
    ode::controlled_step_result res = ode::fail;
    int attempts = 0;
    while ((res = stepper.try_step(system, x, t, h)) == ode::fail) {
      if (++attempts > 200 || std::abs(h) < tiny) {
        throw std::runtime_error("evolve: step size underflow at t = " +
                                 std::to_string(t));
      }
    }
    traj.steps += 1;
    traj.error_estimate += opts.tolerance;

    Eigen::VectorXcd psi = unpack(x);
    traj.max_norm_error =
        std::max(traj.max_norm_error, std::abs(psi.norm() - 1.0));
    const bool record = opts.sample_interval <= 0.0 ||
                        dir * (t - next_sample) >= 0.0 ||
                        dir * (t1 - t) <= tiny;
    if (record) {
      traj.t.push_back(t);
      traj.states.push_back(psi);
      if (opts.sample_interval > 0.0) {
        while (dir * (t - next_sample) >= 0.0) {
          next_sample += dir * opts.sample_interval;
        }
      }
    }
    if (on_step && !on_step(t, psi)) stopped = true;
  }
  if (traj.t.back() != t) {
    traj.t.push_back(t);
    traj.states.push_back(unpack(x));
  }
  return traj;
}

}  // namespace

Trajectory evolve(const HamiltonianProvider& ham, const Eigen::VectorXcd& psi0,
                  double t0, double t1, const EvolveOptions& opts,
                  const StepCallback& on_step) {
  if (psi0.size() != ham.dim()) {
    throw std::invalid_argument("evolve: state dimension mismatch");
  }
  if (std::abs(psi0.norm() - 1.0) > 1e-8) {
    throw std::invalid_argument("evolve: initial state is not normalized");
  }
  if (!(opts.tolerance > 0.0)) {
    throw std::invalid_argument("evolve: tolerance must be > 0");
  }

  double offset = 0.0;
  if (opts.subtract_mean_diagonal) {
    Eigen::MatrixXd h0(ham.dim(), ham.dim());
    ham.eval(t0, h0);
    offset = h0.trace() / ham.dim();
  }

  Trajectory traj;
  if (t0 == t1) {
    traj.t.push_back(t0);
    traj.states.push_back(psi0);
    return traj;
  }
  switch (opts.method) {
    case Integrator::MagnusCF4:
      traj = evolve_magnus(ham, psi0, t0, t1, opts, on_step, offset);
      break;
    case Integrator::DormandPrince54:
      traj = evolve_rk(ham, psi0, t0, t1, opts, on_step, offset);
      break;
  }
  return traj;
}

Eigen::MatrixXd cycle_averaged_hamiltonian(const HamiltonianProvider& ham,
                                           double t0, double period,
                                           int samples) {
  if (!(period > 0.0) || samples < 2) {
    throw std::invalid_argument("cycle_averaged_hamiltonian: bad arguments");
  }
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(ham.dim(), ham.dim());
  Eigen::MatrixXd h(ham.dim(), ham.dim());
  for (int i = 0; i < samples; ++i) {
    ham.eval(t0 + period * i / samples, h);
    acc += h;
  }
  return acc / samples;
}

double transfer_efficiency(const Trajectory& traj, int initial_index) {
  if (traj.samples() == 0) {
    throw std::invalid_argument("transfer_efficiency: empty trajectory");
  }
  double best = 0.0;
  for (int i = 0; i < traj.samples(); ++i) {
    best = std::max(best, 1.0 - traj.occupation(i, initial_index));
  }
  return std::clamp(best, 0.0, 1.0);
}

}  // namespace latvib
