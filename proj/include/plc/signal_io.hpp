#pragma once

// JSON export/import of generated signals.
//
// {
//   "spec":    { "grid": {...}, "sparsity_factor": k, "num_samples": T, "seed": s,
//                "noise_std": x, "real_amplitudes": false, "offgrid": [...] },
//   "samples": [[re, im], ...],
//   "true_states": { "n": N, "support": [i, ...], "values": [[[re, im], ...], ...] }
// }
//
// true_states is stored on the (time-invariant) support only; values[m][j]
// is the amplitude of grid bin support[j] at sample m.

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "plc/core.hpp"
#include "plc/siggen.hpp"

namespace plc {

using json = nlohmann::json;

inline json complex_to_json(cplx v) { return json::array({v.real(), v.imag()}); }

inline cplx complex_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw invalid_argument("expected a complex number as [re, im], got " + j.dump());
  return {j[0].get<double>(), j[1].get<double>()};
}

/// Reject keys outside `allowed`.
inline void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw invalid_argument(where + ": expected an object");
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || item.key() == a;
    if (!ok) throw invalid_argument(where + ": unknown key '" + item.key() + "'");
  }
}

inline json grid_to_json(const FrequencyGrid& g) {
  json j{{"tau", g.tau()}, {"window_len", g.window_len()}};
  if (g.is_uniform_imaginary()) {
    j["n"] = g.n();
    j["omega0"] = g.omega0();
  } else {
    json z = json::array();
    for (cplx v : g.exponents()) z.push_back(complex_to_json(v));
    j["exponents"] = std::move(z);
  }
  return j;
}

inline FrequencyGrid grid_from_json(const json& j) {
  check_keys(j, {"n", "omega0", "exponents", "tau", "window_len"}, "grid");
  const double tau = j.at("tau").get<double>();
  const auto m = j.at("window_len").get<std::size_t>();
  if (j.contains("exponents")) {
    if (j.contains("omega0")) throw invalid_argument("grid: give either omega0 or exponents, not both");
    std::vector<cplx> z;
    for (const auto& v : j.at("exponents")) z.push_back(complex_from_json(v));
    if (j.contains("n") && j.at("n").get<std::size_t>() != z.size())
      throw invalid_argument("grid: n differs from the number of exponents");
    return FrequencyGrid(std::move(z), tau, m);
  }
  return FrequencyGrid::uniform_imaginary(j.at("n").get<std::size_t>(), j.at("omega0").get<double>(), tau, m);
}

inline json offgrid_to_json(const OffGridComponent& c) {
  return {{"gamma", c.gamma},
          {"delta_omega", c.delta_omega},
          {"grid_index", c.grid_index},
          {"amplitude", complex_to_json(c.amplitude)}};
}

inline OffGridComponent offgrid_from_json(const json& j) {
  check_keys(j, {"gamma", "delta_omega", "grid_index", "amplitude"}, "offgrid component");
  OffGridComponent c;
  c.gamma = j.at("gamma").get<double>();
  c.delta_omega = j.at("delta_omega").get<double>();
  c.grid_index = j.at("grid_index").get<std::size_t>();
  if (j.contains("amplitude")) c.amplitude = complex_from_json(j.at("amplitude"));
  return c;
}

inline json spec_to_json(const SignalSpec& s) {
  json off = json::array();
  for (const auto& c : s.offgrid) off.push_back(offgrid_to_json(c));
  return {{"grid", grid_to_json(s.grid)},         {"sparsity_factor", s.sparsity_factor},
          {"num_samples", s.num_samples},         {"seed", s.seed},
          {"noise_std", s.noise_std},             {"real_amplitudes", s.real_amplitudes},
          {"offgrid", std::move(off)}};
}

inline SignalSpec spec_from_json(const json& j) {
  check_keys(j, {"grid", "sparsity_factor", "num_samples", "seed", "noise_std", "real_amplitudes", "offgrid"}, "spec");
  SignalSpec s{grid_from_json(j.at("grid"))};
  s.sparsity_factor = j.at("sparsity_factor").get<double>();
  s.num_samples = j.at("num_samples").get<std::size_t>();
  s.seed = j.at("seed").get<std::uint64_t>();
  s.noise_std = j.value("noise_std", 0.0);
  s.real_amplitudes = j.value("real_amplitudes", false);
  if (j.contains("offgrid"))
    for (const auto& c : j.at("offgrid")) s.offgrid.push_back(offgrid_from_json(c));
  return s;
}

inline json signal_to_json(const GeneratedSignal& sig) {
  json samples = json::array();
  for (cplx x : sig.samples) samples.push_back(complex_to_json(x));
  json values = json::array();
  for (const auto& row : sig.support_values) {
    json r = json::array();
    for (cplx v : row) r.push_back(complex_to_json(v));
    values.push_back(std::move(r));
  }
  return {{"spec", spec_to_json(sig.spec)},
          {"samples", std::move(samples)},
          {"true_states", {{"n", sig.spec.grid.n()}, {"support", sig.support}, {"values", std::move(values)}}}};
}

inline GeneratedSignal signal_from_json(const json& j) {
  check_keys(j, {"spec", "samples", "true_states"}, "signal");
  GeneratedSignal sig{spec_from_json(j.at("spec")), {}, {}, {}};
  for (const auto& x : j.at("samples")) sig.samples.push_back(complex_from_json(x));
  const json& ts = j.at("true_states");
  check_keys(ts, {"n", "support", "values"}, "true_states");
  if (ts.at("n").get<std::size_t>() != sig.spec.grid.n()) throw invalid_argument("true_states: n differs from grid");
  sig.support = ts.at("support").get<std::vector<std::size_t>>();
  for (std::size_t i : sig.support)
    if (i >= sig.spec.grid.n()) throw invalid_argument("true_states: support index out of range");
  for (const auto& row : ts.at("values")) {
    std::vector<cplx> r;
    for (const auto& v : row) r.push_back(complex_from_json(v));
    if (r.size() != sig.support.size()) throw invalid_argument("true_states: row length differs from support");
    sig.support_values.push_back(std::move(r));
  }
  if (sig.support_values.size() != sig.samples.size())
    throw invalid_argument("true_states: sample count differs from samples");
  return sig;
}

inline void save_signal(const std::string& path, const GeneratedSignal& sig) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << signal_to_json(sig).dump() << '\n';
  if (!f) throw std::runtime_error("write failed: " + path);
}

inline GeneratedSignal load_signal(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  return signal_from_json(json::parse(f));
}

}  // namespace plc
