#pragma once

// Monte Carlo experiment harness: metrics, the (k, p, EC) sweep and the
// off-grid tracking scenario, plus the JSON experiment configuration.
//
// Config layout (unknown keys anywhere are errors):
//
// {
//   "grid":      { "n": 100, "omega0": 10, "tau": 5e-4, "window_len": 50 },
//   "signal":    { "sparsity_factors": [0.025, 0.05], "num_samples": 3000,
//                  "noise_std": 0, "real_amplitudes": false, "offgrid": [...] },
//   "estimator": { "lambda1": 6000, "lambda2": 100, "sigma0": 1, "sigma_growth": 1.1,
//                  "delta0": 1, "delta_growth": 1.01, "sigma_cap": 1e6, "delta_cap": 16,
//                  "propagate_first": true, "case2_rule": "corrected" },
//   "channel":   { "p": [0, 0.025, 0.05] },
//   "ec":        { "theta": 7, "epsilon": 0.2, "steps_per_sample": 1, "modes": [false, true] },
//   "runs": 20,
//   "master_seed": 1
// }
//
// Every section and key is optional; missing values take the defaults below.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "plc/channel.hpp"
#include "plc/core.hpp"
#include "plc/decoder.hpp"
#include "plc/encoder.hpp"
#include "plc/estimator.hpp"
#include "plc/rng.hpp"
#include "plc/siggen.hpp"
#include "plc/signal_io.hpp"

namespace plc {

inline constexpr double kMseFloorDb = -120.0;
inline constexpr double kDivergenceDb = -5.0;

/// 10 log10(||S - S_hat||^2 / ||S||^2), floored at -120 dB.
inline double mse_db(const SpectralState& truth, const SpectralState& estimate) {
  if (truth.size() != estimate.size()) throw invalid_argument("mse_db: state lengths differ");
  const double ref = truth.amps.squaredNorm();
  if (!(ref > 0.0)) throw invalid_argument("mse_db: reference state has zero norm");
  const double err = (truth.amps - estimate.amps).squaredNorm();
  if (!std::isfinite(err)) return std::numeric_limits<double>::infinity();
  if (err == 0.0) return kMseFloorDb;
  return std::max(kMseFloorDb, 10.0 * std::log10(err / ref));
}

inline bool is_divergent(double final_mse_db) { return !(final_mse_db <= kDivergenceDb); }

// ---- configuration --------------------------------------------------------

struct ExperimentConfig {
  FrequencyGrid grid = FrequencyGrid::uniform_imaginary(100, 10.0, 5e-4, 50);
  std::vector<double> sparsity_factors{0.05};
  std::size_t num_samples = 3000;
  double noise_std = 0.0;
  bool real_amplitudes = false;
  std::vector<OffGridComponent> offgrid;
  EstimatorParams estimator;
  std::vector<double> flip_rates{0.0};
  EcParams ec;
  std::vector<bool> ec_modes{false, true};
  std::size_t runs = 20;
  std::uint64_t master_seed = 1;

  void validate() const {
    if (runs < 1) throw invalid_argument("runs must be >= 1");
    if (sparsity_factors.empty()) throw invalid_argument("signal.sparsity_factors must not be empty");
    if (flip_rates.empty()) throw invalid_argument("channel.p must not be empty");
    if (ec_modes.empty()) throw invalid_argument("ec.modes must not be empty");
    estimator.validate();
    EcParams on = ec;
    on.enabled = true;
    on.validate();
    for (double p : flip_rates) ChannelSpec{p, 0}.validate();
    for (double k : sparsity_factors) signal_spec(k, 0).validate();
  }

  /// Signal spec for sparsity factor k with the given seed.
  [[nodiscard]] SignalSpec signal_spec(double k, std::uint64_t seed) const {
    SignalSpec s{grid};
    s.sparsity_factor = k;
    s.num_samples = num_samples;
    s.seed = seed;
    s.offgrid = offgrid;
    s.noise_std = noise_std;
    s.real_amplitudes = real_amplitudes;
    return s;
  }

  /// Desk-scale profile: N = 100, M = 50, T = 3000, 20 runs.
  static ExperimentConfig desk() { return {}; }

  /// Full-size profile: N = 500, M = 50, T = 5000, 100 runs.
  static ExperimentConfig paper_scale() {
    ExperimentConfig c;
    c.grid = FrequencyGrid::uniform_imaginary(500, 10.0, 5e-4, 50);
    c.num_samples = 5000;
    c.runs = 100;
    return c;
  }
};

// Seed streams. The signal depends only on (k, run), so every (p, EC) cell
// of one k row sees the same signals and encoded streams.
enum class SeedStream : std::uint64_t { Signal = 1, Channel = 2, Ec = 3 };

inline std::uint64_t signal_seed(std::uint64_t master, std::size_t k_index, std::size_t run) {
  return derive_seed(master, {static_cast<std::uint64_t>(SeedStream::Signal), k_index, run});
}
inline std::uint64_t channel_seed(std::uint64_t master, std::size_t k_index, std::size_t p_index, std::size_t run) {
  return derive_seed(master, {static_cast<std::uint64_t>(SeedStream::Channel), k_index, p_index, run});
}
inline std::uint64_t ec_seed(std::uint64_t master, std::size_t k_index, std::size_t p_index, std::size_t run) {
  return derive_seed(master, {static_cast<std::uint64_t>(SeedStream::Ec), k_index, p_index, run});
}

inline json estimator_to_json(const EstimatorParams& p) {
  return {{"lambda1", p.lambda1},
          {"lambda2", p.lambda2},
          {"sigma0", p.sigma0},
          {"sigma_growth", p.sigma_growth},
          {"delta0", p.delta0},
          {"delta_growth", p.delta_growth},
          {"sigma_cap", p.sigma_cap},
          {"delta_cap", p.delta_cap},
          {"propagate_first", p.propagate_first},
          {"case2_rule", p.case2_rule == Case2Rule::Corrected ? "corrected" : "as_printed"}};
}

inline EstimatorParams estimator_from_json(const json& j, EstimatorParams p = {}) {
  check_keys(j,
             {"lambda1", "lambda2", "sigma0", "sigma_growth", "delta0", "delta_growth", "sigma_cap", "delta_cap",
              "propagate_first", "case2_rule"},
             "estimator");
  p.lambda1 = j.value("lambda1", p.lambda1);
  p.lambda2 = j.value("lambda2", p.lambda2);
  p.sigma0 = j.value("sigma0", p.sigma0);
  p.sigma_growth = j.value("sigma_growth", p.sigma_growth);
  p.delta0 = j.value("delta0", p.delta0);
  p.delta_growth = j.value("delta_growth", p.delta_growth);
  p.sigma_cap = j.value("sigma_cap", p.sigma_cap);
  p.delta_cap = j.value("delta_cap", p.delta_cap);
  p.propagate_first = j.value("propagate_first", p.propagate_first);
  if (j.contains("case2_rule")) {
    const auto rule = j.at("case2_rule").get<std::string>();
    if (rule == "corrected")
      p.case2_rule = Case2Rule::Corrected;
    else if (rule == "as_printed")
      p.case2_rule = Case2Rule::AsPrinted;
    else
      throw invalid_argument("estimator.case2_rule must be \"corrected\" or \"as_printed\"");
  }
  p.validate();
  return p;
}

inline json config_to_json(const ExperimentConfig& c) {
  json off = json::array();
  for (const auto& o : c.offgrid) off.push_back(offgrid_to_json(o));
  json modes = json::array();
  for (bool m : c.ec_modes) modes.push_back(m);
  return {{"grid", grid_to_json(c.grid)},
          {"signal",
           {{"sparsity_factors", c.sparsity_factors},
            {"num_samples", c.num_samples},
            {"noise_std", c.noise_std},
            {"real_amplitudes", c.real_amplitudes},
            {"offgrid", std::move(off)}}},
          {"estimator", estimator_to_json(c.estimator)},
          {"channel", {{"p", c.flip_rates}}},
          {"ec",
           {{"theta", c.ec.theta},
            {"epsilon", c.ec.epsilon},
            {"steps_per_sample", c.ec.steps_per_sample},
            {"modes", std::move(modes)}}},
          {"runs", c.runs},
          {"master_seed", c.master_seed}};
}

inline ExperimentConfig config_from_json(const json& j) {
  check_keys(j, {"grid", "signal", "estimator", "channel", "ec", "runs", "master_seed"}, "config");
  ExperimentConfig c;
  if (j.contains("grid")) c.grid = grid_from_json(j.at("grid"));
  if (j.contains("signal")) {
    const json& s = j.at("signal");
    check_keys(s, {"sparsity_factors", "num_samples", "noise_std", "real_amplitudes", "offgrid"}, "signal");
    if (s.contains("sparsity_factors")) c.sparsity_factors = s.at("sparsity_factors").get<std::vector<double>>();
    c.num_samples = s.value("num_samples", c.num_samples);
    c.noise_std = s.value("noise_std", c.noise_std);
    c.real_amplitudes = s.value("real_amplitudes", c.real_amplitudes);
    if (s.contains("offgrid"))
      for (const auto& o : s.at("offgrid")) c.offgrid.push_back(offgrid_from_json(o));
  }
  if (j.contains("estimator")) c.estimator = estimator_from_json(j.at("estimator"));
  if (j.contains("channel")) {
    const json& ch = j.at("channel");
    check_keys(ch, {"p"}, "channel");
    if (ch.contains("p")) c.flip_rates = ch.at("p").get<std::vector<double>>();
  }
  if (j.contains("ec")) {
    const json& e = j.at("ec");
    check_keys(e, {"theta", "epsilon", "steps_per_sample", "modes"}, "ec");
    c.ec.theta = e.value("theta", c.ec.theta);
    c.ec.epsilon = e.value("epsilon", c.ec.epsilon);
    c.ec.steps_per_sample = e.value("steps_per_sample", c.ec.steps_per_sample);
    if (e.contains("modes")) c.ec_modes = e.at("modes").get<std::vector<bool>>();
  }
  c.runs = j.value("runs", c.runs);
  c.master_seed = j.value("master_seed", c.master_seed);
  c.validate();
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  json j;
  try {
    j = json::parse(f);
  } catch (const json::parse_error& e) {
    throw invalid_argument(path + ": " + e.what());
  }
  return config_from_json(j);
}

// ---- single run -----------------------------------------------------------

struct RunResult {
  double final_mse_db = 0.0;
  std::vector<double> mse_trace;
  bool diverged = false;
  double wall_time = 0.0;  // seconds
  /// Non-empty when the decoder aborted; the run then counts as divergent.
  std::string error;
};

/// Decode `stream` and score it against `truth` sample by sample.
inline RunResult score_decode(const SignStream& stream, const GeneratedSignal& truth, const EstimatorParams& params,
                              const EcParams& ec, bool keep_trace) {
  const auto start = std::chrono::steady_clock::now();
  RunResult r;
  DecodeOptions opts;
  opts.record_states = false;
  double last = 0.0;
  opts.on_state = [&](std::size_t m, const SpectralState& s) {
    last = mse_db(truth.true_state(m), s);
    if (keep_trace) r.mse_trace.push_back(last);
  };
  try {
    decode(stream, truth.spec.grid, params, ec, opts);
    r.final_mse_db = last;
  } catch (const std::exception& e) {
    r.error = e.what();
    r.final_mse_db = std::numeric_limits<double>::infinity();
  }
  r.diverged = is_divergent(r.final_mse_db);
  r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

// ---- (k, p, EC) sweep ------------------------------------------------------

struct CellKey {
  double k = 0.0;
  double p = 0.0;
  bool ec = false;
};

struct CellResult {
  CellKey key;
  std::vector<RunResult> runs;

  [[nodiscard]] std::vector<double> finals() const {
    std::vector<double> v;
    for (const auto& r : runs) v.push_back(r.final_mse_db);
    return v;
  }
  [[nodiscard]] double mean_db() const {
    const auto v = finals();
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  }
  [[nodiscard]] double std_db() const {
    const auto v = finals();
    if (v.size() < 2) return 0.0;
    const double mu = mean_db();
    double acc = 0.0;
    for (double x : v) acc += (x - mu) * (x - mu);
    return std::sqrt(acc / static_cast<double>(v.size() - 1));
  }
  [[nodiscard]] std::size_t divergent() const {
    return static_cast<std::size_t>(std::count_if(runs.begin(), runs.end(), [](const RunResult& r) { return r.diverged; }));
  }
};

struct Table1Result {
  std::vector<CellResult> cells;

  [[nodiscard]] const CellResult& cell(double k, double p, bool ec) const {
    for (const auto& c : cells)
      if (c.key.k == k && c.key.p == p && c.key.ec == ec) return c;
    throw invalid_argument("no such table cell");
  }
};

/// Every (k, p, EC) cell over `config.runs` seeded runs. A run is
/// generate -> encode -> corrupt -> decode; cells are ordered k-major, then
/// p, then EC mode. Decoder failures are recorded per run, never thrown.
inline Table1Result run_table1(const ExperimentConfig& config, bool keep_traces = false) {
  config.validate();
  Table1Result out;
  for (double k : config.sparsity_factors)
    for (double p : config.flip_rates)
      for (bool e : config.ec_modes) out.cells.push_back({{k, p, e}, {}});

  const std::size_t per_k = config.flip_rates.size() * config.ec_modes.size();
  for (std::size_t ki = 0; ki < config.sparsity_factors.size(); ++ki) {
    for (std::size_t run = 0; run < config.runs; ++run) {
      const GeneratedSignal sig =
          generate(config.signal_spec(config.sparsity_factors[ki], signal_seed(config.master_seed, ki, run)));
      std::optional<EncodeResult> enc;
      std::string enc_error;
      try {
        enc = encode(sig.samples, config.grid, config.estimator);
      } catch (const std::exception& e) {
        enc_error = e.what();
      }
      for (std::size_t pi = 0; pi < config.flip_rates.size(); ++pi) {
        const SignStream received =
            enc ? corrupt(enc->stream, {config.flip_rates[pi], channel_seed(config.master_seed, ki, pi, run)}).corrupted
                : SignStream{};
        for (std::size_t ei = 0; ei < config.ec_modes.size(); ++ei) {
          CellResult& cell = out.cells[ki * per_k + pi * config.ec_modes.size() + ei];
          if (!enc) {
            RunResult r;
            r.final_mse_db = std::numeric_limits<double>::infinity();
            r.diverged = true;
            r.error = enc_error;
            cell.runs.push_back(std::move(r));
            continue;
          }
          EcParams ec = config.ec;
          ec.enabled = config.ec_modes[ei];
          ec.seed = ec_seed(config.master_seed, ki, pi, run);
          cell.runs.push_back(score_decode(received, sig, config.estimator, ec, keep_traces));
        }
      }
    }
  }
  return out;
}

inline std::string format_double(double v) {
  std::ostringstream s;
  s.precision(10);
  s << v;
  return s.str();
}

/// One row per cell: k,p,ec,runs,mean_mse_db,std_mse_db,divergent_runs.
inline void write_table1_csv(std::ostream& os, const Table1Result& t) {
  os << "k,p,ec,runs,mean_mse_db,std_mse_db,divergent_runs\n";
  for (const auto& c : t.cells)
    os << format_double(c.key.k) << ',' << format_double(c.key.p) << ',' << (c.key.ec ? "on" : "off") << ','
       << c.runs.size() << ',' << format_double(c.mean_db()) << ',' << format_double(c.std_db()) << ','
       << c.divergent() << '\n';
}

// ---- off-grid scenario ----------------------------------------------------

/// The two off-grid components of the reference experiment on a uniform
/// grid: omega = j 2148 and -1.5 + j 4421 rad/s, folded onto the nearest bin.
inline std::vector<OffGridComponent> default_offgrid(const FrequencyGrid& grid) {
  if (!grid.is_uniform_imaginary()) throw invalid_argument("default off-grid components need a uniform grid");
  const double w0 = grid.omega0();
  std::vector<OffGridComponent> out;
  for (auto [gamma, omega] : {std::pair{0.0, 2148.0}, std::pair{-1.5, 4421.0}}) {
    // Bin i sits at (i + 1) omega0.
    const double bin = std::round(omega / w0);
    if (bin < 1.0 || bin > static_cast<double>(grid.n()))
      throw invalid_argument("default off-grid component lies outside the grid; use N >= 443 with omega0 = 10");
    out.push_back({gamma, omega - bin * w0, static_cast<std::size_t>(bin) - 1, cplx(1.0, 0.0)});
  }
  return out;
}

struct OffgridResult {
  std::vector<RunResult> runs;
  std::vector<double> mean_trace;  // per-sample mean over runs
};

/// Noiseless-channel runs of the first sparsity factor with off-grid
/// components (the two default ones when the config lists none).
inline OffgridResult run_offgrid(ExperimentConfig config) {
  if (config.offgrid.empty()) config.offgrid = default_offgrid(config.grid);
  config.validate();
  OffgridResult out;
  out.mean_trace.assign(config.num_samples, 0.0);
  for (std::size_t run = 0; run < config.runs; ++run) {
    const GeneratedSignal sig = generate(config.signal_spec(config.sparsity_factors.front(), signal_seed(config.master_seed, 0, run)));
    RunResult r;
    try {
      const EncodeResult enc = encode(sig.samples, config.grid, config.estimator);
      r = score_decode(enc.stream, sig, config.estimator, EcParams{}, true);
    } catch (const std::exception& e) {
      r.error = e.what();
      r.final_mse_db = std::numeric_limits<double>::infinity();
      r.diverged = true;
    }
    r.mse_trace.resize(config.num_samples, std::numeric_limits<double>::infinity());
    for (std::size_t m = 0; m < config.num_samples; ++m) out.mean_trace[m] += r.mse_trace[m] / static_cast<double>(config.runs);
    out.runs.push_back(std::move(r));
  }
  return out;
}

/// Mean of trace[first, last).
inline double trace_mean(const std::vector<double>& trace, std::size_t first, std::size_t last) {
  if (first >= last || last > trace.size()) throw invalid_argument("trace_mean: bad range");
  return std::accumulate(trace.begin() + static_cast<std::ptrdiff_t>(first), trace.begin() + static_cast<std::ptrdiff_t>(last), 0.0) /
         static_cast<double>(last - first);
}

/// iteration,mse_db — one row per sample, then one column per run.
inline void write_offgrid_csv(std::ostream& os, const OffgridResult& r) {
  os << "iteration,mse_db";
  for (std::size_t i = 0; i < r.runs.size(); ++i) os << ",run" << i;
  os << '\n';
  for (std::size_t m = 0; m < r.mean_trace.size(); ++m) {
    os << m << ',' << format_double(r.mean_trace[m]);
    for (const auto& run : r.runs) os << ',' << format_double(run.mse_trace[m]);
    os << '\n';
  }
}

}  // namespace plc
