#pragma once

#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pulseuq/common.hpp"

namespace pulseuq {

/// Blood properties plus the velocity-profile correction factor. The friction
/// force per unit length is f = -2 mu pi (alpha/(alpha-1)) u, and the profile
/// exponent zeta = (2-alpha)/(alpha-1) drives the Poiseuille-like segment
/// resistance 2(zeta+2) pi mu l / A0^2.
struct FluidProperties {
  double rho = 1060.0;   // kg/m^3
  double mu = 4.0e-3;    // Pa s
  double alpha = 1.1;

  double zeta() const { return (2.0 - alpha) / (alpha - 1.0); }
  double friction_coefficient() const { return 2.0 * M_PI * mu * alpha / (alpha - 1.0); }
};

/// Three-element R1-C-R2 terminal. p_C (pressure across C) is per-simulation
/// state and lives in the solver, not here.
struct WindkesselOutlet {
  double R1 = 0.0;   // Pa s / m^3, 0 means "default to rho c0 / A0 of the attached segment"
  double R2 = 0.0;   // Pa s / m^3
  double C = 0.0;    // m^3 / Pa
  double p_v = 0.0;  // Pa
};

struct Bifurcation {
  int parent = 0;
  int daughter1 = 0;
  int daughter2 = 0;
};

// --- wall-law parameterization conversions (nu = 1/2 unless stated) ---

inline double beta_from_c0(double c0, double A0, double rho) {
  if (c0 <= 0 || A0 <= 0 || rho <= 0)
    throw ValidationError("beta_from_c0: positive inputs required");
  return 2.0 * rho * c0 * c0 / std::sqrt(A0);
}

inline double c0_from_beta(double beta, double A0, double rho) {
  if (beta <= 0 || A0 <= 0 || rho <= 0)
    throw ValidationError("c0_from_beta: positive inputs required");
  return std::sqrt(beta * std::sqrt(A0) / (2.0 * rho));
}

inline double beta_from_modulus(double E, double h0, double A0, double nu = 0.5) {
  if (E <= 0 || h0 <= 0 || A0 <= 0)
    throw ValidationError("beta_from_modulus: positive inputs required");
  return std::sqrt(M_PI) * h0 * E / ((1.0 - nu * nu) * A0);
}

inline double modulus_from_beta(double beta, double h0, double A0, double nu = 0.5) {
  if (beta <= 0 || h0 <= 0 || A0 <= 0)
    throw ValidationError("modulus_from_beta: positive inputs required");
  return beta * (1.0 - nu * nu) * A0 / (std::sqrt(M_PI) * h0);
}

/// One vessel of the tree. The wall law is stored canonically as beta(x) > 0;
/// whatever parameterization the input file used is converted on load.
struct ArterySegment {
  int id = 0;
  std::string name;
  double length = 0.0;            // m
  double reference_area = 0.0;    // m^2, constant along the segment
  double external_pressure = 0.0; // Pa
  int cells = 1;
  int poly_order = 3;
  LinearProfile beta;             // Pa/m vs axial position in [0, length]

  double beta_at(double x) const { return beta(x); }
  double c0_at(double x, double rho) const { return c0_from_beta(beta(x), reference_area, rho); }

  /// Wave speed at area A: c^2 = beta sqrt(A) / (2 rho).
  double wave_speed(double A, double x, double rho) const {
    return std::sqrt(beta(x) * std::sqrt(A) / (2.0 * rho));
  }

  double pressure(double A, double x) const {
    return external_pressure + beta(x) * (std::sqrt(A) - std::sqrt(reference_area));
  }

  /// DC friction resistance 2(zeta+2) pi mu l / A0^2.
  double friction_resistance(const FluidProperties& fluid) const {
    return 2.0 * (fluid.zeta() + 2.0) * M_PI * fluid.mu * length /
           (reference_area * reference_area);
  }
};

/// Immutable-after-load description of the vessel tree. Safe to share across
/// concurrently running simulations.
struct NetworkTopology {
  FluidProperties fluid;
  std::vector<ArterySegment> segments;
  std::vector<Bifurcation> bifurcations;
  int inlet_id = 0;
  std::map<int, WindkesselOutlet> terminals;
  std::set<int> reflective_ends;  // closed (u=0) leaf ends; benchmark/test use
  std::vector<int> aorta_path;
  std::map<std::string, std::vector<int>> groups;

  const ArterySegment& segment(int id) const {
    for (const auto& s : segments)
      if (s.id == id) return s;
    throw ValidationError("unknown segment id " + std::to_string(id));
  }

  ArterySegment& segment(int id) {
    for (auto& s : segments)
      if (s.id == id) return s;
    throw ValidationError("unknown segment id " + std::to_string(id));
  }

  bool is_terminal(int id) const {
    return terminals.count(id) > 0 || reflective_ends.count(id) > 0;
  }

  /// Effective R1 of a terminal: the stored value, or the characteristic
  /// impedance rho c0 / A0 of the attached segment end when unset.
  double terminal_R1(int id) const {
    const auto& wk = terminals.at(id);
    if (wk.R1 > 0.0) return wk.R1;
    const auto& seg = segment(id);
    return fluid.rho * seg.c0_at(seg.length, fluid.rho) / seg.reference_area;
  }

  std::vector<int> terminal_ids() const {
    std::vector<int> ids;
    for (const auto& [id, wk] : terminals) ids.push_back(id);
    return ids;
  }

  /// Mean venous pressure over the terminals.
  double venous_pressure() const {
    if (terminals.empty()) return 0.0;
    double s = 0.0;
    for (const auto& [id, wk] : terminals) s += wk.p_v;
    return s / static_cast<double>(terminals.size());
  }

  /// Arclength offset of each aorta-path segment start, plus the total span.
  std::pair<std::vector<double>, double> aorta_arclength() const {
    std::vector<double> offset;
    double acc = 0.0;
    for (int id : aorta_path) {
      offset.push_back(acc);
      acc += segment(id).length;
    }
    return {offset, acc};
  }
};

namespace detail {

inline void validate_segment(const ArterySegment& s) {
  const std::string tag = "segment " + std::to_string(s.id) + ": ";
  if (!(s.length > 0.0)) throw ValidationError(tag + "l > 0 violated");
  if (!(s.reference_area > 0.0)) throw ValidationError(tag + "A0 > 0 violated");
  if (!(s.beta.min_value() > 0.0)) throw ValidationError(tag + "beta(x) > 0 violated");
  if (s.cells < 1) throw ValidationError(tag + "cells >= 1 violated");
  if (s.poly_order < 1) throw ValidationError(tag + "poly_order >= 1 violated");
}

}  // namespace detail

/// Full structural validation: rooted tree, one inlet, every leaf terminated,
/// no cycles or orphans, connected aorta path, positive outlet parameters.
inline void validate_topology(const NetworkTopology& net) {
  if (net.segments.empty()) throw ValidationError("network has no segments");
  if (std::abs(net.fluid.alpha - 1.0) < 1e-12)
    throw ValidationError("alpha != 1 required (friction factor alpha/(alpha-1))");

  std::set<int> ids;
  for (const auto& s : net.segments) {
    detail::validate_segment(s);
    if (!ids.insert(s.id).second)
      throw ValidationError("duplicate segment id " + std::to_string(s.id));
  }
  if (!ids.count(net.inlet_id)) throw ValidationError("inlet segment not present");

  std::map<int, int> parent_of;  // daughter -> parent
  std::map<int, const Bifurcation*> bif_of_parent;
  for (const auto& b : net.bifurcations) {
    for (int id : {b.parent, b.daughter1, b.daughter2})
      if (!ids.count(id))
        throw ValidationError("bifurcation references unknown segment " + std::to_string(id));
    if (bif_of_parent.count(b.parent))
      throw ValidationError("segment " + std::to_string(b.parent) +
                            ": outlet attached to more than one bifurcation");
    bif_of_parent[b.parent] = &b;
    for (int d : {b.daughter1, b.daughter2}) {
      if (parent_of.count(d))
        throw ValidationError("segment " + std::to_string(d) +
                              ": inlet attached to more than one parent (cycle or merge)");
      parent_of[d] = b.parent;
    }
  }
  if (parent_of.count(net.inlet_id))
    throw ValidationError("inlet segment appears as a daughter");

  for (const auto& s : net.segments) {
    if (s.id == net.inlet_id) continue;
    if (!parent_of.count(s.id))
      throw ValidationError("segment " + std::to_string(s.id) + ": orphan (not reachable)");
  }

  for (const auto& s : net.segments) {
    const bool has_bif = bif_of_parent.count(s.id) > 0;
    const bool has_term = net.terminals.count(s.id) > 0;
    const bool closed = net.reflective_ends.count(s.id) > 0;
    if (has_bif + has_term + closed != 1)
      throw ValidationError("segment " + std::to_string(s.id) +
                            ": outlet must have exactly one of {bifurcation, terminal}");
  }

  // Reachability from the inlet (also rules out cycles among the maps above).
  std::set<int> seen;
  std::vector<int> stack{net.inlet_id};
  while (!stack.empty()) {
    const int id = stack.back();
    stack.pop_back();
    if (!seen.insert(id).second)
      throw ValidationError("cycle detected at segment " + std::to_string(id));
    if (auto it = bif_of_parent.find(id); it != bif_of_parent.end()) {
      stack.push_back(it->second->daughter1);
      stack.push_back(it->second->daughter2);
    }
  }
  if (seen.size() != net.segments.size())
    throw ValidationError("graph has segments not reachable from the inlet");

  for (const auto& [id, wk] : net.terminals) {
    const std::string tag = "terminal " + std::to_string(id) + ": ";
    if (wk.R1 < 0.0) throw ValidationError(tag + "R1 >= 0 violated");
    if (!(wk.R2 > 0.0)) throw ValidationError(tag + "R2 > 0 violated");
    if (!(wk.C > 0.0)) throw ValidationError(tag + "C > 0 violated");
  }

  if (!net.aorta_path.empty()) {
    if (net.aorta_path.front() != net.inlet_id)
      throw ValidationError("aorta_path must start at the inlet segment");
    for (std::size_t i = 0; i + 1 < net.aorta_path.size(); ++i) {
      const int a = net.aorta_path[i], b = net.aorta_path[i + 1];
      auto it = bif_of_parent.find(a);
      const bool ok = it != bif_of_parent.end() &&
                      (it->second->daughter1 == b || it->second->daughter2 == b);
      if (!ok)
        throw ValidationError("aorta_path link " + std::to_string(a) + " -> " +
                              std::to_string(b) + " is not a parent/daughter pair");
    }
  }

  for (const auto& [gname, gids] : net.groups)
    for (int id : gids)
      if (!ids.count(id))
        throw ValidationError("group '" + gname + "' references unknown segment " +
                              std::to_string(id));
}

namespace detail {

inline LinearProfile profile_from_json(const nlohmann::json& j, double length,
                                       const std::string& tag) {
  if (j.is_number()) return LinearProfile::constant(j.get<double>());
  if (j.is_array()) {
    std::vector<double> x, v;
    for (const auto& pair : j) {
      if (!pair.is_array() || pair.size() != 2)
        throw ParseError(tag + ": profile samples must be [x, value] pairs");
      x.push_back(pair[0].get<double>());
      v.push_back(pair[1].get<double>());
    }
    if (x.front() < -1e-12 || x.back() > length + 1e-12)
      throw ValidationError(tag + ": profile samples outside [0, l]");
    return LinearProfile(std::move(x), std::move(v));
  }
  throw ParseError(tag + ": profile must be a number or [x, value] pairs");
}

inline LinearProfile stiffness_to_beta(const nlohmann::json& stiff, double A0, double rho,
                                       const std::string& tag) {
  const std::string kind = stiff.at("kind").get<std::string>();
  if (kind == "beta") {
    return profile_from_json(stiff.at("values"), 1e300, tag);
  }
  if (kind == "c0") {
    const auto c0 = profile_from_json(stiff.at("values"), 1e300, tag);
    return c0.map([&](double, double v) { return beta_from_c0(v, A0, rho); });
  }
  if (kind == "Eh") {
    const auto& v = stiff.at("values");
    const double h0 = v.at("h0_m").get<double>();
    const auto E = profile_from_json(v.at("E_Pa"), 1e300, tag);
    return E.map([&](double, double e) { return beta_from_modulus(e, h0, A0); });
  }
  throw ParseError(tag + ": unknown stiffness kind '" + kind + "'");
}

}  // namespace detail

inline NetworkTopology network_from_json(const nlohmann::json& j) {
  NetworkTopology net;
  try {
    const auto& fluid = j.at("fluid");
    net.fluid.rho = fluid.at("rho").get<double>();
    net.fluid.mu = fluid.at("mu").get<double>();
    net.fluid.alpha = fluid.at("alpha").get<double>();

    for (const auto& js : j.at("segments")) {
      ArterySegment s;
      s.id = js.at("id").get<int>();
      s.name = js.value("name", "A" + std::to_string(s.id));
      s.length = js.at("length_m").get<double>();
      s.reference_area = js.at("A0_m2").get<double>();
      s.external_pressure = js.value("p0_Pa", 0.0);
      s.cells = js.value("cells", 1);
      s.poly_order = js.value("poly_order", 3);
      const std::string tag = "segment " + std::to_string(s.id);
      if (!(s.reference_area > 0.0)) throw ValidationError(tag + ": A0 > 0 violated");
      s.beta = detail::stiffness_to_beta(js.at("stiffness"), s.reference_area, net.fluid.rho, tag);
      net.segments.push_back(std::move(s));
    }

    for (const auto& jb : j.at("bifurcations")) {
      if (!jb.is_array() || jb.size() != 3)
        throw ParseError("bifurcations entries must be [parent, daughter1, daughter2]");
      net.bifurcations.push_back({jb[0].get<int>(), jb[1].get<int>(), jb[2].get<int>()});
    }

    net.inlet_id = j.at("inlet").get<int>();

    for (const auto& [key, jt] : j.at("terminals").items()) {
      WindkesselOutlet wk;
      wk.R1 = jt.value("R1", 0.0);
      wk.R2 = jt.at("R2").get<double>();
      wk.C = jt.at("C").get<double>();
      wk.p_v = jt.value("pv", 0.0);
      net.terminals[std::stoi(key)] = wk;
    }

    if (j.contains("aorta_path"))
      net.aorta_path = j.at("aorta_path").get<std::vector<int>>();
    if (j.contains("groups"))
      for (const auto& [gname, gids] : j.at("groups").items())
        net.groups[gname] = gids.get<std::vector<int>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("network file: ") + e.what());
  }

  validate_topology(net);
  return net;
}

inline NetworkTopology load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open network file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("network file " + path + ": " + e.what());
  }
  return network_from_json(j);
}

/// Total DC resistance of the tree by series/parallel reduction: segment
/// friction in series with either its terminal (R1 + R2) or the parallel
/// combination of its daughter subtrees.
inline double total_resistance(const NetworkTopology& net) {
  std::map<int, const Bifurcation*> bif_of_parent;
  for (const auto& b : net.bifurcations) bif_of_parent[b.parent] = &b;

  auto reduce = [&](auto&& self, int id) -> double {
    const auto& seg = net.segment(id);
    double r = seg.friction_resistance(net.fluid);
    if (auto it = bif_of_parent.find(id); it != bif_of_parent.end()) {
      const double r1 = self(self, it->second->daughter1);
      const double r2 = self(self, it->second->daughter2);
      r += r1 * r2 / (r1 + r2);
    } else {
      const auto& wk = net.terminals.at(id);
      r += net.terminal_R1(id) + wk.R2;
    }
    return r;
  };
  return reduce(reduce, net.inlet_id);
}

/// Steady flow through every segment for a total inflow q_total, from the
/// same series/parallel reduction (daughters split inversely to their
/// subtree resistances).
inline std::map<int, double> dc_segment_flows(const NetworkTopology& net, double q_total) {
  std::map<int, const Bifurcation*> bif_of_parent;
  for (const auto& b : net.bifurcations) bif_of_parent[b.parent] = &b;

  std::map<int, double> subtree;
  auto reduce = [&](auto&& self, int id) -> double {
    const auto& seg = net.segment(id);
    double r = seg.friction_resistance(net.fluid);
    if (auto it = bif_of_parent.find(id); it != bif_of_parent.end()) {
      const double r1 = self(self, it->second->daughter1);
      const double r2 = self(self, it->second->daughter2);
      r += r1 * r2 / (r1 + r2);
    } else if (net.terminals.count(id)) {
      const auto& wk = net.terminals.at(id);
      r += net.terminal_R1(id) + wk.R2;
    }
    subtree[id] = r;
    return r;
  };
  reduce(reduce, net.inlet_id);

  std::map<int, double> flows;
  auto walk = [&](auto&& self, int id, double q) -> void {
    flows[id] = q;
    if (auto it = bif_of_parent.find(id); it != bif_of_parent.end()) {
      const double r1 = subtree.at(it->second->daughter1);
      const double r2 = subtree.at(it->second->daughter2);
      self(self, it->second->daughter1, q * r2 / (r1 + r2));
      self(self, it->second->daughter2, q * r1 / (r1 + r2));
    }
  };
  walk(walk, net.inlet_id, q_total);
  return flows;
}

/// Terminal subset of dc_segment_flows.
inline std::map<int, double> dc_terminal_flows(const NetworkTopology& net, double q_total) {
  auto flows = dc_segment_flows(net, q_total);
  std::map<int, double> out;
  for (const auto& [id, wk] : net.terminals) out[id] = flows.at(id);
  return out;
}

}  // namespace pulseuq
