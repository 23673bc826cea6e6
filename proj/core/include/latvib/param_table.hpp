#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "latvib/hubbard_params.hpp"

namespace latvib {

/// Scalar drive parameter of a one-parameter family of geometries. The
/// parameter u is an offset added to the base geometry:
///   Qx:        (qx+u, qy,   kappa,   g)
///   Qy:        (qx,   qy+u, kappa,   g)
///   QxPlusQy:  (qx+u, qy+u, kappa,   g)   symmetric vibration
///   QxMinusQy: (qx+u, qy-u, kappa,   g)   antisymmetric vibration
///   Kappa:     (qx,   qy,   kappa+u, g)
///   Coupling:  (qx,   qy,   kappa,   g+u)
enum class Axis { Qx, Qy, QxPlusQy, QxMinusQy, Kappa, Coupling };

Axis axis_from_name(const std::string& name);
std::string axis_name(Axis axis);
LatticeGeometry apply_axis(const LatticeGeometry& base, Axis axis, double u);

/// Cubic-interpolable table of every HubbardParams entry along one axis.
/// Immutable after construction and safe to share across threads.
class ParameterTable {
 public:
  /// points >= 9 unless the range is degenerate (u_min == u_max), in which
  /// case the single computed value is returned for every u.
  static ParameterTable build(ParamEngine& engine, const LatticeGeometry& base,
                              Axis axis, double u_min, double u_max,
                              int points, const std::vector<Orbital>& orbitals);
  static ParameterTable build(const LatticeGeometry& base, Axis axis,
                              double u_min, double u_max, int points,
                              const std::vector<Orbital>& orbitals);

  /// Throws std::out_of_range if u leaves [u_min, u_max].
  HubbardParams eval(double u) const;
  /// Fast path: interpolated entry values aligned with keys().
  void eval_values(double u, std::span<double> out) const;
  /// d(entry)/du of the interpolants (0 for a degenerate table).
  void eval_derivatives(double u, std::span<double> out) const;

  int points() const { return points_; }
  double grid_step() const {
    return degenerate_ ? 0.0 : (u_max_ - u_min_) / (points_ - 1);
  }

  const std::vector<ParamKey>& keys() const { return prototype_.keys(); }
  std::size_t entry_count() const { return keys().size(); }
  const std::vector<Orbital>& orbitals() const { return prototype_.orbitals(); }

  LatticeGeometry geometry_at(double u) const;
  const LatticeGeometry& base_geometry() const { return base_; }
  Axis axis() const { return axis_; }
  double u_min() const { return u_min_; }
  double u_max() const { return u_max_; }
  bool degenerate() const { return degenerate_; }

 private:
  ParameterTable() = default;
  struct Spline;

  LatticeGeometry base_;
  Axis axis_ = Axis::Qx;
  double u_min_ = 0.0, u_max_ = 0.0;
  int points_ = 1;
  bool degenerate_ = true;
  HubbardParams prototype_;           // values at u_min, carries keys/layout
  std::vector<double> const_values_;  // degenerate table
  std::shared_ptr<const std::vector<Spline>> splines_;
};

}  // namespace latvib
