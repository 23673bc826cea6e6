#include "latvib/param_table.hpp"

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <cmath>
#include <stdexcept>

namespace latvib {

struct ParameterTable::Spline {
  boost::math::interpolators::cardinal_cubic_b_spline<double> s;
};

Axis axis_from_name(const std::string& name) {
  if (name == "qx") return Axis::Qx;
  if (name == "qy") return Axis::Qy;
  if (name == "qx+qy" || name == "plus") return Axis::QxPlusQy;
  if (name == "qx-qy" || name == "minus") return Axis::QxMinusQy;
  if (name == "kappa") return Axis::Kappa;
  if (name == "g") return Axis::Coupling;
  throw std::invalid_argument("unknown drive axis '" + name + "'");
}

std::string axis_name(Axis axis) {
  switch (axis) {
    case Axis::Qx: return "qx";
    case Axis::Qy: return "qy";
    case Axis::QxPlusQy: return "qx+qy";
    case Axis::QxMinusQy: return "qx-qy";
    case Axis::Kappa: return "kappa";
    case Axis::Coupling: return "g";
  }
  return "?";
}

LatticeGeometry apply_axis(const LatticeGeometry& base, Axis axis, double u) {
  LatticeGeometry g = base;
  switch (axis) {
    case Axis::Qx: g.qx += u; break;
    case Axis::Qy: g.qy += u; break;
    case Axis::QxPlusQy: g.qx += u; g.qy += u; break;
    case Axis::QxMinusQy: g.qx += u; g.qy -= u; break;
    case Axis::Kappa: g.kappa += u; break;
    case Axis::Coupling: g.g += u; break;
  }
  return g;
}

ParameterTable ParameterTable::build(const LatticeGeometry& base, Axis axis,
                                     double u_min, double u_max, int points,
                                     const std::vector<Orbital>& orbitals) {
  ParamEngine engine;
  return build(engine, base, axis, u_min, u_max, points, orbitals);
}

ParameterTable ParameterTable::build(ParamEngine& engine,
                                     const LatticeGeometry& base, Axis axis,
                                     double u_min, double u_max, int points,
                                     const std::vector<Orbital>& orbitals) {
  if (!(u_min <= u_max)) {
    throw std::invalid_argument("ParameterTable: u_min must be <= u_max");
  }
  apply_axis(base, axis, u_min).validate();
  apply_axis(base, axis, u_max).validate();

  ParameterTable t;
  t.base_ = base;
  t.axis_ = axis;
  t.u_min_ = u_min;
  t.u_max_ = u_max;
  t.degenerate_ = (u_min == u_max);
  t.prototype_ = engine.compute(apply_axis(base, axis, u_min), orbitals);

  if (t.degenerate_) {
    t.const_values_ = t.prototype_.values();
    return t;
  }
  if (points < 9) {
    throw std::invalid_argument("ParameterTable: need at least 9 grid points");
  }
  t.points_ = points;

  // Extend the knot grid two steps past each end when the geometry allows:
  // the spline's endpoint-derivative estimate is low order, and this pushes
  // that error outside the evaluated window.
  const double h = (u_max - u_min) / (points - 1);
  int pad_lo = 0, pad_hi = 0;
  for (int pad = 1; pad <= 2; ++pad) {
    try {
      apply_axis(base, axis, u_min - pad * h).validate();
      pad_lo = pad;
    } catch (const std::invalid_argument&) {
      break;
    }
  }
  for (int pad = 1; pad <= 2; ++pad) {
    try {
      apply_axis(base, axis, u_max + pad * h).validate();
      pad_hi = pad;
    } catch (const std::invalid_argument&) {
      break;
    }
  }

  const int total = points + pad_lo + pad_hi;
  const double u_start = u_min - pad_lo * h;
  const std::size_t n_entries = t.prototype_.keys().size();
  std::vector<std::vector<double>> data(n_entries, std::vector<double>(total));
  for (int i = 0; i < total; ++i) {
    const HubbardParams p =
        engine.compute(apply_axis(base, axis, u_start + i * h), orbitals);
    const std::vector<double> vals = p.values();
    for (std::size_t e = 0; e < n_entries; ++e) data[e][i] = vals[e];
  }

  // Sixth-order one-sided endpoint derivatives; the spline's own estimate
  // is low order and its error decays only geometrically into the interior.
  auto edge_derivative = [h](const std::vector<double>& f, bool left) {
    static const double c[7] = {-49.0 / 20.0, 6.0, -15.0 / 2.0, 20.0 / 3.0,
                                -15.0 / 4.0,  6.0 / 5.0, -1.0 / 6.0};
    const int n = static_cast<int>(f.size());
    double acc = 0.0;
    for (int i = 0; i < 7; ++i) {
      acc += c[i] * (left ? f[i] : -f[n - 1 - i]);
    }
    return acc / h;
  };

  auto splines = std::make_shared<std::vector<Spline>>();
  splines->reserve(n_entries);
  for (std::size_t e = 0; e < n_entries; ++e) {
    splines->push_back(Spline{boost::math::interpolators::cardinal_cubic_b_spline<double>(
        data[e].begin(), data[e].end(), u_start, h,
        edge_derivative(data[e], true), edge_derivative(data[e], false))});
  }
  t.splines_ = std::move(splines);
  return t;
}

void ParameterTable::eval_values(double u, std::span<double> out) const {
  if (out.size() != entry_count()) {
    throw std::invalid_argument("ParameterTable: output span size mismatch");
  }
  if (degenerate_) {
    for (std::size_t e = 0; e < const_values_.size(); ++e) out[e] = const_values_[e];
    return;
  }
  if (!(u >= u_min_ && u <= u_max_)) {
    throw std::out_of_range("ParameterTable: drive excursion " +
                            std::to_string(u) + " outside table range [" +
                            std::to_string(u_min_) + ", " +
                            std::to_string(u_max_) + "]");
  }
  const auto& sp = *splines_;
  for (std::size_t e = 0; e < sp.size(); ++e) out[e] = sp[e].s(u);
}

void ParameterTable::eval_derivatives(double u, std::span<double> out) const {
  if (out.size() != entry_count()) {
    throw std::invalid_argument("ParameterTable: output span size mismatch");
  }
  if (degenerate_) {
    for (auto& v : out) v = 0.0;
    return;
  }
  if (!(u >= u_min_ && u <= u_max_)) {
    throw std::out_of_range("ParameterTable: u outside table range");
  }
  const auto& sp = *splines_;
  for (std::size_t e = 0; e < sp.size(); ++e) out[e] = sp[e].s.prime(u);
}

HubbardParams ParameterTable::eval(double u) const {
  std::vector<double> vals(entry_count());
  eval_values(u, vals);
  HubbardParams p = prototype_;
  p.geom_ = geometry_at(u);
  const auto& ks = keys();
  for (std::size_t e = 0; e < ks.size(); ++e) p.set_value(ks[e], vals[e]);
  return p;
}

LatticeGeometry ParameterTable::geometry_at(double u) const {
  return apply_axis(base_, axis_, degenerate_ ? u_min_ : u);
}

}  // namespace latvib
