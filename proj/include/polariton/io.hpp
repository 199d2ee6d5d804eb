#ifndef POLARITON_IO_HPP
#define POLARITON_IO_HPP

#include <fstream>

#include <json.hpp>

#include "polariton/dispersion.hpp"
#include "polariton/greens.hpp"

namespace polariton {

using json = nlohmann::json;

namespace detail {

// strict schemas: anything not listed is an error naming the field
inline void check_fields(const json& j, const char* context,
                         const std::vector<std::string>& required,
                         const std::vector<std::string>& optional = {}) {
  if (!j.is_object())
    throw validation_error(std::string(context) + ": expected a JSON object");
  for (const auto& k : required)
    if (!j.contains(k))
      throw validation_error(std::string(context) + ": missing field '" + k + "'");
  for (const auto& [k, v] : j.items()) {
    if (std::find(required.begin(), required.end(), k) != required.end())
      continue;
    if (std::find(optional.begin(), optional.end(), k) != optional.end())
      continue;
    throw validation_error(std::string(context) + ": unknown field '" + k + "'");
  }
}

inline double as_number(const json& j, const char* context) {
  if (!j.is_number())
    throw validation_error(std::string(context) + ": expected a number");
  return j.get<double>();
}

}  // namespace detail

// {label, resonances: [{f, omega, gamma}]}; doubles round-trip bit-exactly
inline Medium medium_from_json(const json& j) {
  detail::check_fields(j, "medium", {"resonances"}, {"label"});
  if (!j["resonances"].is_array())
    throw validation_error("medium: 'resonances' must be an array");
  std::vector<LorentzResonance> res;
  for (const auto& r : j["resonances"]) {
    detail::check_fields(r, "resonance", {"f", "omega", "gamma"});
    res.push_back({detail::as_number(r["f"], "resonance.f"),
                   detail::as_number(r["omega"], "resonance.omega"),
                   detail::as_number(r["gamma"], "resonance.gamma")});
  }
  return Medium(std::move(res), j.value("label", std::string{}));
}

inline json medium_to_json(const Medium& m) {
  json j;
  j["label"] = m.label();
  j["resonances"] = json::array();
  for (const auto& r : m.resonances())
    j["resonances"].push_back({{"f", r.f}, {"omega", r.omega}, {"gamma", r.gamma}});
  return j;
}

// {dx, background, cells: [{i, j, k, medium}]}
inline ScattererGrid grid_from_json(const json& j) {
  detail::check_fields(j, "grid", {"dx", "background", "cells"});
  ScattererGrid g;
  g.dx = detail::as_number(j["dx"], "grid.dx");
  if (!j["cells"].is_array())
    throw validation_error("grid: 'cells' must be an array");
  for (const auto& c : j["cells"]) {
    detail::check_fields(c, "cell", {"i", "j", "k", "medium"});
    GridCell cell;
    cell.idx = Eigen::Vector3i(c["i"].get<int>(), c["j"].get<int>(),
                               c["k"].get<int>());
    cell.medium = medium_from_json(c["medium"]);
    g.cells.push_back(std::move(cell));
  }
  return g;
}

inline Medium grid_background_from_json(const json& j) {
  return medium_from_json(j.at("background"));
}

// Root table: [{re_omega, im_omega}]; D and eps are recomputed from the
// medium so a hand-edited (e.g. truncated) table stays self-consistent.
inline std::vector<PolaritonRoot> roots_from_json(const json& j,
                                                  const Medium& medium,
                                                  double omega_alpha) {
  if (!j.is_array()) throw validation_error("roots: expected a JSON array");
  std::vector<PolaritonRoot> roots;
  int m = 0;
  for (const auto& e : j) {
    detail::check_fields(e, "root", {"re_omega", "im_omega"});
    PolaritonRoot r;
    r.Omega = complex(detail::as_number(e["re_omega"], "root.re_omega"),
                      detail::as_number(e["im_omega"], "root.im_omega"));
    r.D = omega_alpha / r.Omega +
          r.Omega * r.Omega * epsilon_derivative(medium, r.Omega) /
              (2.0 * omega_alpha);
    r.eps = epsilon(medium, r.Omega);
    r.m = m++;
    r.family = RootFamily::transverse;
    r.omega_alpha = omega_alpha;
    roots.push_back(r);
  }
  return roots;
}

inline json roots_to_json(const std::vector<PolaritonRoot>& roots) {
  json j = json::array();
  for (const auto& r : roots)
    j.push_back({{"re_omega", r.Omega.real()}, {"im_omega", r.Omega.imag()}});
  return j;
}

inline json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot open file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw validation_error("malformed JSON in " + path + ": " + e.what());
  }
  return j;
}

inline void save_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw validation_error("cannot open file for writing: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace polariton

#endif
