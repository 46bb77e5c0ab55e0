#pragma once

// Random spectrum-sparse test signals on the sample lattice t = m tau.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "plc/core.hpp"
#include "plc/rng.hpp"

namespace plc {

/// A component off the grid, folded onto grid bin `grid_index` as the
/// time-varying amplitude amplitude * exp((gamma + j delta_omega) t).
struct OffGridComponent {
  double gamma = 0.0;        // <= 0, 1/s
  double delta_omega = 0.0;  // rad/s
  std::size_t grid_index = 0;
  cplx amplitude{1.0, 0.0};

  friend bool operator==(const OffGridComponent&, const OffGridComponent&) = default;
};

struct SignalSpec {
  explicit SignalSpec(FrequencyGrid g) : grid(std::move(g)) {}

  FrequencyGrid grid;
  double sparsity_factor = 0.05;
  std::size_t num_samples = 1000;
  std::uint64_t seed = 0;
  std::vector<OffGridComponent> offgrid;
  double noise_std = 0.0;
  /// Draw real N(0,1) amplitudes instead of complex ones with unit power.
  bool real_amplitudes = false;

  /// round(k N): total number of active grid bins, off-grid bins included.
  [[nodiscard]] std::size_t active_count() const {
    return static_cast<std::size_t>(std::llround(sparsity_factor * static_cast<double>(grid.n())));
  }

  void validate() const {
    if (!(sparsity_factor > 0.0 && sparsity_factor <= 1.0)) throw invalid_argument("sparsity factor must be in (0, 1]");
    if (active_count() < 1) throw invalid_argument("sparsity factor rounds to zero active components");
    if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) throw invalid_argument("noise_std must be >= 0");
    std::vector<bool> seen(grid.n(), false);
    for (const auto& c : offgrid) {
      if (c.grid_index >= grid.n()) throw invalid_argument("off-grid component index out of range");
      if (seen[c.grid_index]) throw invalid_argument("two off-grid components share a grid bin");
      seen[c.grid_index] = true;
      if (c.gamma > 0.0 || !std::isfinite(c.gamma) || !std::isfinite(c.delta_omega))
        throw invalid_argument("off-grid gamma must be finite and <= 0");
    }
    if (offgrid.size() > active_count())
      throw invalid_argument("more off-grid components than round(k N) active bins");
  }

  friend bool operator==(const SignalSpec&, const SignalSpec&) = default;
};

/// Ground truth for one signal. The support is fixed for the whole signal,
/// so states are stored as support values per sample.
struct GeneratedSignal {
  SignalSpec spec;
  std::vector<cplx> samples;
  std::vector<std::size_t> support;          // sorted grid indices
  std::vector<std::vector<cplx>> support_values;  // [m][j] = S_m[support[j]]

  [[nodiscard]] std::size_t size() const { return samples.size(); }

  [[nodiscard]] SpectralState true_state(std::size_t m) const {
    SpectralState s(spec.grid.n(), static_cast<std::int64_t>(m));
    for (std::size_t j = 0; j < support.size(); ++j)
      s.amps[static_cast<Eigen::Index>(support[j])] = support_values.at(m)[j];
    return s;
  }
};

inline GeneratedSignal generate(const SignalSpec& spec) {
  spec.validate();
  const FrequencyGrid& grid = spec.grid;
  const std::size_t n = grid.n();
  Rng rng(spec.seed);

  std::vector<bool> taken(n, false);
  for (const auto& c : spec.offgrid) taken[c.grid_index] = true;
  std::vector<std::size_t> pool;
  pool.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    if (!taken[i]) pool.push_back(i);

  // Partial Fisher-Yates: the first `want` entries become a uniform subset.
  const std::size_t want = spec.active_count() - spec.offgrid.size();
  for (std::size_t j = 0; j < want; ++j) {
    std::uniform_int_distribution<std::size_t> pick(j, pool.size() - 1);
    std::swap(pool[j], pool[pick(rng)]);
  }
  std::vector<std::size_t> on_grid(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(want));

  std::normal_distribution<double> amp_dist(0.0, spec.real_amplitudes ? 1.0 : std::sqrt(0.5));
  std::vector<cplx> amp0(want);
  for (auto& a : amp0) {
    const double re = amp_dist(rng);
    const double im = spec.real_amplitudes ? 0.0 : amp_dist(rng);
    a = cplx(re, im);
  }

  // Per-bin initial value and per-sample multiplier; off-grid bins pick up
  // the extra exp((gamma + j dw) tau) factor.
  struct Track {
    std::size_t bin;
    cplx value;
    cplx step;
  };
  std::vector<Track> tracks;
  for (std::size_t j = 0; j < want; ++j)
    tracks.push_back({on_grid[j], amp0[j], std::exp(grid.exponent(on_grid[j]) * grid.tau())});
  for (const auto& c : spec.offgrid)
    tracks.push_back({c.grid_index, c.amplitude,
                      std::exp((grid.exponent(c.grid_index) + cplx(c.gamma, c.delta_omega)) * grid.tau())});
  std::sort(tracks.begin(), tracks.end(), [](const Track& a, const Track& b) { return a.bin < b.bin; });

  GeneratedSignal out{spec, {}, {}, {}};
  out.support.reserve(tracks.size());
  for (const auto& t : tracks) out.support.push_back(t.bin);
  out.samples.resize(spec.num_samples);
  out.support_values.resize(spec.num_samples);

  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::size_t m = 0; m < spec.num_samples; ++m) {
    auto& row = out.support_values[m];
    row.resize(tracks.size());
    cplx x(0.0, 0.0);
    for (std::size_t j = 0; j < tracks.size(); ++j) {
      row[j] = tracks[j].value;
      x += tracks[j].value;
      tracks[j].value *= tracks[j].step;
    }
    if (spec.noise_std > 0.0) {
      const double nr = noise(rng);
      const double ni = noise(rng);
      x += spec.noise_std * cplx(nr, ni);
    }
    out.samples[m] = x;
  }
  return out;
}

}  // namespace plc
