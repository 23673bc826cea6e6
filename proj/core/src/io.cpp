#include "latvib/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "latvib/version.hpp"

namespace latvib {

std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.11e", v);
  return buf;
}

void write_file_atomic(const std::filesystem::path& path,
                       const std::vector<std::string>& header_lines,
                       const std::string& body) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    }
    out << "# latvib " << kVersion << "\n";
    for (const auto& line : header_lines) out << "# " << line << "\n";
    out << body;
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string dispersion_csv(const BandStructure& bands) {
  std::ostringstream out;
  out << "k";
  for (int b = 0; b < bands.band_count; ++b) out << ",E_" << b;
  out << "\n";
  for (int i = 0; i < bands.n_k(); ++i) {
    out << format_value(bands.k[i]);
    for (int b = 0; b < bands.band_count; ++b) {
      out << "," << format_value(bands.energies(i, b));
    }
    out << "\n";
  }
  return out.str();
}

std::string wannier_csv(const WannierFunction& w) {
  std::ostringstream out;
  out << "x,w\n";
  for (std::size_t i = 0; i < w.x.size(); ++i) {
    out << format_value(w.x[i]) << "," << format_value(w.samples[i]) << "\n";
  }
  return out.str();
}

std::string params_sweep_csv(const std::vector<ParamSweepRow>& rows) {
  std::ostringstream out;
  out << "q,E_s,E_px,E_py,U_ss,U_xx,U_yy,U_sx,U_sy,U_xy,J0,J1\n";
  const Orbital s = Orbital::s(), px = Orbital::px(), py = Orbital::py();
  for (const auto& row : rows) {
    const HubbardParams& p = row.params;
    const double cols[] = {row.q,         p.energy(s),   p.energy(px),
                           p.energy(py),  p.u(s, s),     p.u(px, px),
                           p.u(py, py),   p.u(s, px),    p.u(s, py),
                           p.u(px, py),   p.hopping(0, 0), p.hopping(0, 1)};
    bool first = true;
    for (double c : cols) {
      out << (first ? "" : ",") << format_value(c);
      first = false;
    }
    out << "\n";
  }
  return out.str();
}

std::string trajectory_csv(const Trajectory& traj, const UnitSystem& units) {
  std::ostringstream out;
  out << "t_ms";
  for (int i = 0; i < traj.dim(); ++i) {
    if (static_cast<std::size_t>(i) < traj.labels.size()) {
      out << ",occ_" << traj.labels[i];
    } else {
      out << ",occ_" << i;
    }
  }
  out << ",norm_error\n";
  for (int s = 0; s < traj.samples(); ++s) {
    out << format_value(units.time_to_ms(traj.t[s]));
    for (int i = 0; i < traj.dim(); ++i) {
      out << "," << format_value(traj.occupation(s, i));
    }
    out << "," << format_value(std::abs(traj.states[s].norm() - 1.0)) << "\n";
  }
  return out.str();
}

std::string scan_csv(const ScanResult& scan, const UnitSystem& units) {
  std::ostringstream out;
  out << "omega_hz,omega_recoil,efficiency\n";
  for (std::size_t i = 0; i < scan.omega.size(); ++i) {
    out << format_value(units.omega_to_hz(scan.omega[i])) << ","
        << format_value(scan.omega[i]) << ","
        << format_value(scan.efficiency[i]) << "\n";
  }
  return out.str();
}

std::string peaks_json(const ScanResult& scan, const UnitSystem& units) {
  std::ostringstream out;
  out << "[\n";
  for (std::size_t i = 0; i < scan.peaks.size(); ++i) {
    const Peak& p = scan.peaks[i];
    out << "  {\"center_hz\": " << format_value(units.omega_to_hz(p.center))
        << ", \"height\": " << format_value(p.height)
        << ", \"fwhm_hz\": " << format_value(units.omega_to_hz(p.fwhm))
        << ", \"target_state\": \"" << p.target << "\""
        << ", \"resolved\": " << (p.resolved ? "true" : "false") << "}"
        << (i + 1 < scan.peaks.size() ? "," : "") << "\n";
  }
  out << "]\n";
  return out.str();
}

std::string phase_csv(const PhaseReport& report, const UnitSystem& units) {
  std::ostringstream out;
  out << "t_ms,occ_pxpx,occ_pypy,relative_phase,phase_defined,vortex,"
         "vortex_sign\n";
  for (const PhaseSample& s : report.series) {
    out << format_value(units.time_to_ms(s.t)) << ","
        << format_value(s.occ_a) << "," << format_value(s.occ_b) << ","
        << (s.defined ? format_value(s.phase) : "nan") << ","
        << (s.defined ? 1 : 0) << "," << (s.vortex ? 1 : 0) << ","
        << s.vortex_sign << "\n";
  }
  return out.str();
}

std::string manybody_csv(const ManyBodyTrajectory& traj, const FockBasis& basis,
                         const UnitSystem& units) {
  std::ostringstream out;
  out << "t_ms";
  for (int o = 0; o < basis.n_orbitals(); ++o) {
    for (int s = 0; s < basis.sites(); ++s) {
      out << ",occ_" << basis.orbitals()[o].name() << "_site" << s;
    }
  }
  for (int s = 0; s < basis.sites(); ++s) out << ",var_n_site" << s;
  out << ",energy,norm_error\n";
  for (std::size_t i = 0; i < traj.t.size(); ++i) {
    out << format_value(units.time_to_ms(traj.t[i]));
    for (int o = 0; o < basis.n_orbitals(); ++o) {
      for (int s = 0; s < basis.sites(); ++s) {
        out << "," << format_value(traj.mode_occupation[i](basis.mode(s, o)));
      }
    }
    for (int s = 0; s < basis.sites(); ++s) {
      out << "," << format_value(traj.site_variance[i](s));
    }
    out << "," << format_value(traj.energy[i]) << ","
        << format_value(traj.norm_error[i]) << "\n";
  }
  return out.str();
}

}  // namespace latvib
