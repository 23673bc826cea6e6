#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "latvib/onsite_model.hpp"
#include "latvib/param_table.hpp"

namespace latvib {

/// Sinusoidal modulation of one geometry axis, u(t) = A sin(w t + phase).
struct Drive {
  Axis axis = Axis::Qx;
  double amplitude = 0.0;  // in the axis units (E_R for depths)
  double omega = 0.0;      // angular, E_R/hbar
  double phase = 0.0;

  double u(double t) const { return amplitude * std::sin(omega * t + phase); }
  void validate() const;
};

/// Time-dependent real-symmetric Hamiltonian in E_R.
class HamiltonianProvider {
 public:
  virtual ~HamiltonianProvider() = default;
  virtual int dim() const = 0;
  virtual void eval(double t, Eigen::MatrixXd& h) const = 0;
  /// Suggested resolution timescale (e.g. drive period); 0 if none.
  virtual double timescale() const { return 0.0; }
};

/// H(t) assembled over a TwoParticleBasis from spline-interpolated
/// parameters along a drive axis. Immutable; shared-read-safe.
class TableDrivenHamiltonian final : public HamiltonianProvider {
 public:
  TableDrivenHamiltonian(TwoParticleBasis basis,
                         std::shared_ptr<const ParameterTable> table,
                         std::function<double(double)> u_of_t,
                         double timescale = 0.0);
  /// Convenience: sinusoidal drive.
  TableDrivenHamiltonian(TwoParticleBasis basis,
                         std::shared_ptr<const ParameterTable> table,
                         const Drive& drive);

  int dim() const override { return basis_.dim(); }
  void eval(double t, Eigen::MatrixXd& h) const override;
  double timescale() const override { return timescale_; }
  const TwoParticleBasis& basis() const { return basis_; }

 private:
  void compile();
  TwoParticleBasis basis_;
  std::shared_ptr<const ParameterTable> table_;
  std::function<double(double)> u_;
  double timescale_ = 0.0;
  std::vector<std::pair<int, Eigen::MatrixXd>> components_;
  // Piecewise-cubic matrix form of H(u) on the table grid (Hermite fit of
  // the entry splines); one interval lookup per evaluation.
  double u0_ = 0.0, du_ = 0.0;
  std::vector<std::array<Eigen::MatrixXd, 4>> intervals_;
};

/// Constant Hamiltonian.
class StaticHamiltonian final : public HamiltonianProvider {
 public:
  explicit StaticHamiltonian(Eigen::MatrixXd h) : h_(std::move(h)) {}
  int dim() const override { return static_cast<int>(h_.rows()); }
  void eval(double, Eigen::MatrixXd& h) const override { h = h_; }

 private:
  Eigen::MatrixXd h_;
};

/// Arbitrary callback Hamiltonian (mostly for tests).
class CallbackHamiltonian final : public HamiltonianProvider {
 public:
  CallbackHamiltonian(int dim, std::function<void(double, Eigen::MatrixXd&)> f,
                      double timescale = 0.0)
      : dim_(dim), f_(std::move(f)), timescale_(timescale) {}
  int dim() const override { return dim_; }
  void eval(double t, Eigen::MatrixXd& h) const override { f_(t, h); }
  double timescale() const override { return timescale_; }

 private:
  int dim_;
  std::function<void(double, Eigen::MatrixXd&)> f_;
  double timescale_ = 0.0;
};

enum class Integrator {
  /// Fourth-order commutator-free Magnus propagator with step doubling.
  /// Each step is a product of exact exponentials, so the norm is conserved
  /// to roundoff at any step size.
  MagnusCF4,
  /// Adaptive embedded Dormand-Prince 5(4) on the real-imaginary split
  /// system.
  DormandPrince54,
};

struct EvolveOptions {
  double tolerance = 1e-9;  // local error per step
  Integrator method = Integrator::MagnusCF4;
  /// Sample spacing of the recorded trajectory in dimensionless time;
  /// 0 records every accepted step.
  double sample_interval = 0.0;
  double max_step = 0.0;      // 0: auto from the provider timescale
  double initial_step = 0.0;  // 0: auto
  /// Subtract the mean diagonal of H(t0) for the whole evolution. Pure
  /// global phase; reduces the phase rotation rate the stepper must resolve.
  bool subtract_mean_diagonal = true;
  /// Magnus only: run the step-doubling error estimate every n-th step
  /// (against tolerance/2, so the unchecked steps stay within budget for
  /// smooth drives). 1 checks every step.
  int error_check_interval = 8;
};

struct Trajectory {
  std::vector<double> t;
  std::vector<Eigen::VectorXcd> states;
  std::vector<std::string> labels;  // optional basis state names
  double max_norm_error = 0.0;      // max | ||psi|| - 1 | over every step
  double error_estimate = 0.0;      // accumulated local-error bound
  std::size_t steps = 0;

  int dim() const { return states.empty() ? 0 : static_cast<int>(states[0].size()); }
  int samples() const { return static_cast<int>(t.size()); }
  double occupation(int sample, int index) const {
    return std::norm(states[sample](index));
  }
  Eigen::VectorXd occupations_at(int sample) const;
};

/// Called after every accepted step; return false to stop the evolution.
using StepCallback = std::function<bool(double, const Eigen::VectorXcd&)>;

/// Integrate i d/dt psi = H(t) psi from t0 to t1 (either direction).
/// Throws on step-size underflow, reporting the offending time.
Trajectory evolve(const HamiltonianProvider& h, const Eigen::VectorXcd& psi0,
                  double t0, double t1, const EvolveOptions& opts = {},
                  const StepCallback& on_step = {});

/// Time average of H(t) over [t0, t0 + period]. Resonances of a driven
/// system sit at the eigenvalue gaps of this matrix rather than of H(Q0);
/// the difference is the quadratic part of the parameter dependence averaged
/// over the drive cycle.
Eigen::MatrixXd cycle_averaged_hamiltonian(const HamiltonianProvider& ham,
                                           double t0, double period,
                                           int samples = 128);

/// Highest depletion of the state at `initial_index` over the trajectory.
double transfer_efficiency(const Trajectory& traj, int initial_index = 0);

}  // namespace latvib
