#include "latvib/config.hpp"

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>
#include <stdexcept>

namespace latvib {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw std::invalid_argument("config: " + path + ": " + what);
}

void check_keys(const json& j, const std::string& path,
                const std::set<std::string>& allowed) {
  if (!j.is_object()) fail(path, "must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) fail(path + "." + key, "unknown key");
  }
}

double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "must be a number");
  return j.get<double>();
}

int get_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "must be an integer");
  return j.get<int>();
}

/// Number (already dimensionless) or string with a unit suffix.
double get_quantity(const json& j, const std::string& path,
                    const UnitSystem& units, Dimension dim) {
  if (j.is_number()) return j.get<double>();
  if (!j.is_string()) fail(path, "must be a number or a 'value unit' string");
  std::istringstream in(j.get<std::string>());
  double value = 0.0;
  std::string unit;
  in >> value >> unit;
  if (in.fail()) fail(path, "cannot parse quantity");
  if (unit.empty()) return value;
  const std::map<std::string, std::pair<Dimension, double>> table = {
      {"hz", {Dimension::Frequency, 1.0}}, {"khz", {Dimension::Frequency, 1e3}},
      {"mhz", {Dimension::Frequency, 1e6}}, {"s", {Dimension::Time, 1.0}},
      {"ms", {Dimension::Time, 1e-3}},      {"us", {Dimension::Time, 1e-6}},
  };
  std::string lower;
  for (char c : unit) lower += char(std::tolower(c));
  auto it = table.find(lower);
  if (it == table.end()) fail(path, "unknown unit '" + unit + "'");
  if (it->second.first != dim) fail(path, "unit '" + unit + "' has the wrong dimension");
  double physical = value * it->second.second;
  if (dim == Dimension::Frequency) {
    // Interpret frequencies as ordinary frequencies (Hz -> angular recoil).
    return units.hz_to_omega(physical);
  }
  return units.from_physical(physical, dim);
}

}  // namespace

LatticeGeometry RunConfig::resolved_geometry() const {
  LatticeGeometry g = geometry;
  if (g.g == 0.0) g.g = preset_coupling(preset);
  return g;
}

std::string RunConfig::provenance() const {
  return "config " + config_to_json(*this).dump();
}

RunConfig parse_config(const json& j) {
  RunConfig cfg;
  check_keys(j, "config",
             {"command", "preset", "model", "geometry", "out", "threads",
              "bands", "params", "drive", "scan", "evolve", "protocol",
              "manybody"});

  if (!j.contains("command")) fail("config.command", "required");
  if (!j.at("command").is_string()) fail("config.command", "must be a string");
  cfg.command = j.at("command").get<std::string>();
  const std::set<std::string> commands = {"bands",  "params",   "scan",
                                          "evolve", "protocol", "manybody"};
  if (!commands.count(cfg.command)) {
    fail("config.command", "must be one of bands|params|scan|evolve|protocol|manybody");
  }

  if (j.contains("preset")) {
    cfg.preset = j.at("preset").get<std::string>();
    UnitSystem::preset(cfg.preset);  // validates the name
  }
  if (j.contains("model")) {
    cfg.model = j.at("model").get<std::string>();
    orbital_set(cfg.model);  // validates
  }
  if (j.contains("out")) cfg.out_dir = j.at("out").get<std::string>();
  if (j.contains("threads")) {
    cfg.threads = get_int(j.at("threads"), "config.threads");
    if (cfg.threads < 0) fail("config.threads", "must be >= 0");
  }

  const UnitSystem units = cfg.units();

  if (j.contains("geometry")) {
    const json& g = j.at("geometry");
    check_keys(g, "config.geometry", {"qx", "qy", "kappa", "g"});
    if (g.contains("qx")) cfg.geometry.qx = get_number(g.at("qx"), "config.geometry.qx");
    if (g.contains("qy")) cfg.geometry.qy = get_number(g.at("qy"), "config.geometry.qy");
    if (g.contains("kappa")) cfg.geometry.kappa = get_number(g.at("kappa"), "config.geometry.kappa");
    if (g.contains("g")) cfg.geometry.g = get_number(g.at("g"), "config.geometry.g");
    try {
      LatticeGeometry resolved = cfg.geometry;
      if (resolved.g == 0.0) resolved.g = 1.0;
      resolved.validate();
    } catch (const std::exception& e) {
      fail("config.geometry", e.what());
    }
  }

  if (j.contains("bands")) {
    const json& b = j.at("bands");
    check_keys(b, "config.bands", {"q", "count", "k_points", "plane_waves", "wannier_band"});
    if (b.contains("q")) cfg.bands_q = get_number(b.at("q"), "config.bands.q");
    if (cfg.bands_q < 0) fail("config.bands.q", "must be >= 0");
    if (b.contains("count")) cfg.bands_count = get_int(b.at("count"), "config.bands.count");
    if (b.contains("k_points")) cfg.bands_k_points = get_int(b.at("k_points"), "config.bands.k_points");
    if (b.contains("plane_waves")) cfg.bands_plane_waves = get_int(b.at("plane_waves"), "config.bands.plane_waves");
    if (b.contains("wannier_band")) cfg.wannier_band = get_int(b.at("wannier_band"), "config.bands.wannier_band");
  }

  if (j.contains("params")) {
    const json& p = j.at("params");
    check_keys(p, "config.params", {"q_min", "q_max", "points"});
    if (p.contains("q_min")) cfg.sweep_q_min = get_number(p.at("q_min"), "config.params.q_min");
    if (p.contains("q_max")) cfg.sweep_q_max = get_number(p.at("q_max"), "config.params.q_max");
    if (p.contains("points")) cfg.sweep_points = get_int(p.at("points"), "config.params.points");
    if (!(cfg.sweep_q_min >= 0) || !(cfg.sweep_q_max >= cfg.sweep_q_min)) {
      fail("config.params", "need 0 <= q_min <= q_max");
    }
    if (cfg.sweep_points < 2) fail("config.params.points", "must be >= 2");
  }

  if (j.contains("drive")) {
    const json& d = j.at("drive");
    check_keys(d, "config.drive", {"axis", "amplitude", "omega"});
    if (d.contains("axis")) {
      try {
        cfg.drive_axis = axis_from_name(d.at("axis").get<std::string>());
      } catch (const std::exception& e) {
        fail("config.drive.axis", e.what());
      }
    }
    if (d.contains("amplitude")) {
      cfg.drive_amplitude = get_number(d.at("amplitude"), "config.drive.amplitude");
      if (cfg.drive_amplitude < 0) fail("config.drive.amplitude", "must be >= 0");
    }
    if (d.contains("omega")) {
      cfg.drive_omega = get_quantity(d.at("omega"), "config.drive.omega", units,
                                     Dimension::Frequency);
      if (cfg.drive_omega < 0) fail("config.drive.omega", "must be >= 0");
    }
  }

  if (j.contains("scan")) {
    const json& s = j.at("scan");
    check_keys(s, "config.scan",
               {"omega_min", "omega_max", "points", "threshold", "duration"});
    if (s.contains("omega_min")) {
      cfg.scan_omega_min = get_quantity(s.at("omega_min"), "config.scan.omega_min",
                                        units, Dimension::Frequency);
    }
    if (s.contains("omega_max")) {
      cfg.scan_omega_max = get_quantity(s.at("omega_max"), "config.scan.omega_max",
                                        units, Dimension::Frequency);
    }
    if (s.contains("points")) cfg.scan_points = get_int(s.at("points"), "config.scan.points");
    if (s.contains("threshold")) {
      cfg.scan_threshold = get_number(s.at("threshold"), "config.scan.threshold");
      if (!(cfg.scan_threshold > 0 && cfg.scan_threshold <= 1)) {
        fail("config.scan.threshold", "must be in (0, 1]");
      }
    }
    if (s.contains("duration")) {
      cfg.duration_ms = units.time_to_ms(get_quantity(
          s.at("duration"), "config.scan.duration", units, Dimension::Time));
    }
  }

  if (j.contains("evolve")) {
    const json& e = j.at("evolve");
    check_keys(e, "config.evolve", {"duration", "tolerance", "integrator"});
    if (e.contains("duration")) {
      cfg.duration_ms = units.time_to_ms(get_quantity(
          e.at("duration"), "config.evolve.duration", units, Dimension::Time));
    }
    if (e.contains("tolerance")) {
      cfg.evolve_tolerance = get_number(e.at("tolerance"), "config.evolve.tolerance");
      if (!(cfg.evolve_tolerance > 0)) fail("config.evolve.tolerance", "must be > 0");
    }
    if (e.contains("integrator")) {
      cfg.integrator = e.at("integrator").get<std::string>();
      if (cfg.integrator != "magnus" && cfg.integrator != "rk45") {
        fail("config.evolve.integrator", "must be magnus or rk45");
      }
    }
  }

  if (j.contains("protocol")) {
    const json& p = j.at("protocol");
    check_keys(p, "config.protocol",
               {"scenario", "ramp_duration", "hold_duration", "segments"});
    if (p.contains("scenario")) {
      cfg.scenario = p.at("scenario").get<std::string>();
      if (cfg.scenario != "a" && cfg.scenario != "b") {
        fail("config.protocol.scenario", "must be 'a' or 'b'");
      }
    }
    if (p.contains("ramp_duration")) {
      cfg.ramp_duration_ms = units.time_to_ms(
          get_quantity(p.at("ramp_duration"), "config.protocol.ramp_duration",
                       units, Dimension::Time));
    }
    if (p.contains("hold_duration")) {
      cfg.hold_duration_ms = units.time_to_ms(
          get_quantity(p.at("hold_duration"), "config.protocol.hold_duration",
                       units, Dimension::Time));
    }
    if (p.contains("segments")) {
      if (!p.at("segments").is_array()) {
        fail("config.protocol.segments", "must be an array");
      }
      DriveProtocol proto;
      proto.orbitals = orbital_set(cfg.model);
      int idx = -1;
      for (const json& seg : p.at("segments")) {
        ++idx;
        const std::string path = "config.protocol.segments[" + std::to_string(idx) + "]";
        if (!seg.is_object() || !seg.contains("type")) fail(path, "needs a 'type'");
        const std::string type = seg.at("type").get<std::string>();
        if (type == "vibrate") {
          check_keys(seg, path,
                     {"type", "omega", "amplitude", "axis", "duration",
                      "depletion_target", "max_duration"});
          VibrateSegment v;
          if (!seg.contains("omega")) fail(path + ".omega", "required");
          v.omega = get_quantity(seg.at("omega"), path + ".omega", units,
                                 Dimension::Frequency);
          if (seg.contains("amplitude")) {
            v.amplitude = get_number(seg.at("amplitude"), path + ".amplitude");
          }
          if (seg.contains("axis")) {
            v.axis = axis_from_name(seg.at("axis").get<std::string>());
          }
          if (seg.contains("duration")) {
            v.stop.duration_ms = units.time_to_ms(get_quantity(
                seg.at("duration"), path + ".duration", units, Dimension::Time));
          }
          if (seg.contains("depletion_target")) {
            v.stop.depletion_target =
                get_number(seg.at("depletion_target"), path + ".depletion_target");
            v.stop.max_duration_ms =
                seg.contains("max_duration")
                    ? units.time_to_ms(get_quantity(seg.at("max_duration"),
                                                    path + ".max_duration", units,
                                                    Dimension::Time))
                    : 30.0;
          }
          proto.segments.emplace_back(v);
        } else if (type == "ramp") {
          check_keys(seg, path, {"type", "parameter", "from", "to", "duration", "shape"});
          RampSegment r;
          if (seg.contains("parameter")) {
            r.axis = axis_from_name(seg.at("parameter").get<std::string>());
          }
          if (!seg.contains("from") || !seg.contains("to")) {
            fail(path, "ramp needs 'from' and 'to'");
          }
          r.from = get_number(seg.at("from"), path + ".from");
          r.to = get_number(seg.at("to"), path + ".to");
          if (!seg.contains("duration")) fail(path + ".duration", "required");
          r.duration_ms = units.time_to_ms(get_quantity(
              seg.at("duration"), path + ".duration", units, Dimension::Time));
          if (seg.contains("shape")) {
            const std::string shape = seg.at("shape").get<std::string>();
            if (shape == "raised_cosine") {
              r.shape = RampSegment::Shape::RaisedCosine;
            } else if (shape == "linear") {
              r.shape = RampSegment::Shape::Linear;
            } else {
              fail(path + ".shape", "must be raised_cosine or linear");
            }
          }
          proto.segments.emplace_back(r);
        } else if (type == "hold") {
          check_keys(seg, path, {"type", "duration"});
          HoldSegment hs;
          if (!seg.contains("duration")) fail(path + ".duration", "required");
          hs.duration_ms = units.time_to_ms(get_quantity(
              seg.at("duration"), path + ".duration", units, Dimension::Time));
          proto.segments.emplace_back(hs);
        } else {
          fail(path + ".type", "must be vibrate, ramp or hold");
        }
      }
      cfg.protocol = std::move(proto);
    }
  }

  if (j.contains("manybody")) {
    const json& m = j.at("manybody");
    check_keys(m, "config.manybody",
               {"sites", "particles", "pbc", "chain_axis", "duration"});
    if (m.contains("sites")) cfg.mb_sites = get_int(m.at("sites"), "config.manybody.sites");
    if (m.contains("particles")) cfg.mb_particles = get_int(m.at("particles"), "config.manybody.particles");
    if (m.contains("pbc")) {
      if (!m.at("pbc").is_boolean()) fail("config.manybody.pbc", "must be a boolean");
      cfg.mb_pbc = m.at("pbc").get<bool>();
    }
    if (m.contains("chain_axis")) {
      const std::string a = m.at("chain_axis").get<std::string>();
      if (a == "x") cfg.mb_chain_axis = 0;
      else if (a == "y") cfg.mb_chain_axis = 1;
      else fail("config.manybody.chain_axis", "must be 'x' or 'y'");
    }
    if (m.contains("duration")) {
      cfg.mb_duration_ms = units.time_to_ms(get_quantity(
          m.at("duration"), "config.manybody.duration", units, Dimension::Time));
    }
    if (cfg.mb_sites < 1) fail("config.manybody.sites", "must be >= 1");
    if (cfg.mb_particles < 0) fail("config.manybody.particles", "must be >= 0");
  }

  return cfg;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("config: JSON parse error: " + std::string(e.what()));
  }
  return parse_config(j);
}

namespace {
/// Durations are serialized as "value ms" strings so that a re-parse lands
/// on the same milliseconds regardless of the preset's time unit.
json ms_string(double ms) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.17g ms", ms);
  return json(std::string(buf));
}
}  // namespace

nlohmann::json config_to_json(const RunConfig& cfg) {
  json j;
  j["command"] = cfg.command;
  j["preset"] = cfg.preset;
  j["model"] = cfg.model;
  j["geometry"] = {{"qx", cfg.geometry.qx},
                   {"qy", cfg.geometry.qy},
                   {"kappa", cfg.geometry.kappa},
                   {"g", cfg.geometry.g}};
  j["out"] = cfg.out_dir;
  j["threads"] = cfg.threads;
  if (cfg.command == "bands") {
    j["bands"] = {{"q", cfg.bands_q},
                  {"count", cfg.bands_count},
                  {"k_points", cfg.bands_k_points},
                  {"plane_waves", cfg.bands_plane_waves},
                  {"wannier_band", cfg.wannier_band}};
  }
  if (cfg.command == "params") {
    j["params"] = {{"q_min", cfg.sweep_q_min},
                   {"q_max", cfg.sweep_q_max},
                   {"points", cfg.sweep_points}};
  }
  if (cfg.command == "scan" || cfg.command == "evolve" || cfg.command == "manybody") {
    j["drive"] = {{"axis", axis_name(cfg.drive_axis)},
                  {"amplitude", cfg.drive_amplitude},
                  {"omega", cfg.drive_omega}};
  }
  if (cfg.command == "scan") {
    json s = {{"points", cfg.scan_points}, {"duration", ms_string(cfg.duration_ms)}};
    s["omega_min"] = cfg.scan_omega_min;
    s["omega_max"] = cfg.scan_omega_max;
    if (cfg.scan_threshold > 0) s["threshold"] = cfg.scan_threshold;
    j["scan"] = s;
  }
  if (cfg.command == "evolve") {
    j["evolve"] = {{"duration", ms_string(cfg.duration_ms)},
                   {"tolerance", cfg.evolve_tolerance},
                   {"integrator", cfg.integrator}};
  }
  if (cfg.command == "protocol") {
    json p;
    if (!cfg.scenario.empty()) p["scenario"] = cfg.scenario;
    p["ramp_duration"] = ms_string(cfg.ramp_duration_ms);
    p["hold_duration"] = ms_string(cfg.hold_duration_ms);
    j["protocol"] = p;
  }
  if (cfg.command == "manybody") {
    j["manybody"] = {{"sites", cfg.mb_sites},
                     {"particles", cfg.mb_particles},
                     {"pbc", cfg.mb_pbc},
                     {"chain_axis", cfg.mb_chain_axis == 0 ? "x" : "y"},
                     {"duration", ms_string(cfg.mb_duration_ms)}};
  }
  return j;
}

}  // namespace latvib
